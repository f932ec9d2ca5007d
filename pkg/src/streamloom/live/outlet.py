"""Outlets: the device side of the live transport.

An outlet listens on TCP, advertises itself over the discovery beacon,
and fans each pushed frame out to every connected client as a 4-byte
big-endian length prefix followed by the canonical JSON frame.
"""

import math
import socket
import threading
import time
from typing import Optional

from ..metadata import ChannelSpec, StreamMetadata
from ..sources.frames import Frame, frame_bytes
from .beacon import BEACON_INTERVAL, MULTICAST_GROUP, MULTICAST_PORT, BeaconSender

LENGTH_PREFIX = 4


def send_frame(sock: socket.socket, frame: Frame) -> None:
    payload = frame_bytes(frame)
    sock.sendall(len(payload).to_bytes(LENGTH_PREFIX, "big") + payload)


class LiveOutlet:
    """Serves one live stream to any number of subscribers."""

    def __init__(self, metadata: StreamMetadata, *,
                 host: str = "0.0.0.0", port: int = 0,
                 beacon: bool = True,
                 beacon_interval: float = BEACON_INTERVAL,
                 group: str = MULTICAST_GROUP,
                 beacon_port: int = MULTICAST_PORT):
        self.metadata = metadata
        self._server = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        self._server.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        # Receivers connect to the beacon datagram's source address, which
        # is whatever interface the kernel routes multicast through.  The
        # default bind must therefore cover every interface.
        self._server.bind((host, port))
        self._server.listen()
        self.host, self.port = self._server.getsockname()[:2]
        self._clients: list = []
        self._lock = threading.Lock()
        self._closed = threading.Event()
        self._acceptor = threading.Thread(
            target=self._accept_loop, name=f"outlet:{metadata.stream_id}",
            daemon=True,
        )
        self._acceptor.start()
        self._beacon: Optional[BeaconSender] = None
        if beacon:
            self._beacon = BeaconSender(
                metadata, self.port, interval=beacon_interval,
                group=group, port=beacon_port,
            )

    def _accept_loop(self) -> None:
        while not self._closed.is_set():
            try:
                client, _ = self._server.accept()
            except OSError:
                return
            client.setsockopt(socket.IPPROTO_TCP, socket.TCP_NODELAY, 1)
            with self._lock:
                self._clients.append(client)

    def client_count(self) -> int:
        with self._lock:
            return len(self._clients)

    def push(self, frame: Frame) -> None:
        """Send one frame to every connected client; drop dead connections."""
        payload = frame_bytes(frame)
        message = len(payload).to_bytes(LENGTH_PREFIX, "big") + payload
        with self._lock:
            clients = list(self._clients)
        dead = []
        for client in clients:
            try:
                client.sendall(message)
            except OSError:
                dead.append(client)
        if dead:
            with self._lock:
                for client in dead:
                    if client in self._clients:
                        self._clients.remove(client)
                    client.close()

    def close(self) -> None:
        if self._closed.is_set():
            return
        self._closed.set()
        if self._beacon is not None:
            self._beacon.close()
        self._server.close()
        with self._lock:
            clients, self._clients = self._clients, []
        for client in clients:
            try:
                client.shutdown(socket.SHUT_RDWR)
            except OSError:
                pass
            client.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def synthetic_gaze_metadata(stream_id: str = "live/gaze0") -> StreamMetadata:
    return StreamMetadata(
        stream_id=stream_id,
        name="synthetic-gaze",
        frequency_hz=50.0,
        channels=(
            ChannelSpec("x", "f32", "norm"),
            ChannelSpec("y", "f32", "norm"),
            ChannelSpec("d", "f32", "mm"),
        ),
        device={"model": "synthetic-wanderer"},
    )


def wandering_gaze(t: float) -> tuple:
    """Smooth deterministic gaze path staying inside the unit square."""
    x = 0.5 + 0.3 * math.sin(2 * math.pi * 0.23 * t)
    y = 0.5 + 0.3 * math.sin(2 * math.pi * 0.31 * t + 1.0)
    d = 4.0 + 0.5 * math.sin(2 * math.pi * 0.11 * t)
    return (x, y, d)


class SyntheticDevice:
    """A fake sensor: outlet plus a paced generator thread.

    Stands in for real hardware in demos and tests. Pacing uses absolute
    deadlines from a fixed anchor so the long-run rate matches the
    declared frequency.
    """

    def __init__(self, metadata: Optional[StreamMetadata] = None, *,
                 host: str = "0.0.0.0",
                 beacon_interval: float = BEACON_INTERVAL,
                 group: str = MULTICAST_GROUP,
                 beacon_port: int = MULTICAST_PORT,
                 signal=wandering_gaze):
        self.metadata = metadata or synthetic_gaze_metadata()
        self._signal = signal
        self.outlet = LiveOutlet(
            self.metadata, host=host, beacon_interval=beacon_interval,
            group=group, beacon_port=beacon_port,
        )
        self._stop = threading.Event()
        self._thread: Optional[threading.Thread] = None

    @property
    def port(self) -> int:
        return self.outlet.port

    def start(self) -> "SyntheticDevice":
        if self._thread is not None:
            return self
        self._thread = threading.Thread(
            target=self._run, name="synthetic-device", daemon=True
        )
        self._thread.start()
        return self

    def _run(self) -> None:
        interval = 1.0 / self.metadata.frequency_hz
        anchor = time.monotonic()
        k = 0
        while not self._stop.is_set():
            deadline = anchor + k * interval
            delay = deadline - time.monotonic()
            if delay > 0 and self._stop.wait(delay):
                return
            t = k * interval
            self.outlet.push(Frame(
                stream_id=self.metadata.stream_id, seq=k, t=t,
                values=self._signal(t),
            ))
            k += 1

    def close(self) -> None:
        self._stop.set()
        if self._thread is not None:
            self._thread.join(timeout=2.0)
        self.outlet.close()

    def __enter__(self):
        return self.start()

    def __exit__(self, *exc):
        self.close()
