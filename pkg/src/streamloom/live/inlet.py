"""Inlets: consuming a live outlet as a SourceHandle.

A live handle proxies frames as they arrive. There is no pacing (the
outlet sets the rhythm), no cursor, and no pause/seek; backpressure
drops the oldest queued frame per subscriber rather than stalling the
network reader.
"""

import json
import socket
import time
from typing import Optional

from ..errors import NotFound, SchemaError
from ..sources.frames import StreamError, parse_frame
from ..sources.handle import SourceHandle
from .beacon import (
    MULTICAST_GROUP,
    MULTICAST_PORT,
    LiveAdvertisement,
    discover_advertisements,
)
from .outlet import LENGTH_PREFIX


def _read_exact(sock: socket.socket, n: int) -> Optional[bytes]:
    """n bytes or None on a clean EOF; raises OSError on a broken socket."""
    chunks = []
    remaining = n
    while remaining > 0:
        chunk = sock.recv(remaining)
        if not chunk:
            return None
        chunks.append(chunk)
        remaining -= len(chunk)
    return b"".join(chunks)


class LiveSource(SourceHandle):
    """Frames proxied from one discovered outlet."""

    mode = "live"

    def __init__(self, advertisement: LiveAdvertisement,
                 connect_timeout: float = 5.0):
        super().__init__(advertisement.metadata)
        self.advertisement = advertisement
        self._connect_timeout = connect_timeout
        self._sock: Optional[socket.socket] = None

    def _run(self) -> None:
        stream_id = self.metadata.stream_id
        try:
            sock = socket.create_connection(
                (self.advertisement.host, self.advertisement.port),
                timeout=self._connect_timeout,
            )
        except OSError as exc:
            with self._cond:
                self._state = "ended"
            self._deliver_all(StreamError(stream_id, f"connect failed: {exc}"))
            return
        sock.settimeout(None)
        with self._lock:
            self._sock = sock
        epoch = None
        try:
            while True:
                with self._lock:
                    if self._state == "ended":
                        return
                header = _read_exact(sock, LENGTH_PREFIX)
                if header is None:
                    raise ConnectionResetError("outlet closed the connection")
                payload = _read_exact(sock, int.from_bytes(header, "big"))
                if payload is None:
                    raise ConnectionResetError("outlet closed mid-frame")
                arrival = time.monotonic()
                if epoch is None:
                    epoch = arrival
                try:
                    doc = json.loads(payload.decode("utf-8"))
                    if isinstance(doc, dict):
                        doc.setdefault("t", arrival - epoch)
                    frame = parse_frame(doc)
                except (UnicodeDecodeError, json.JSONDecodeError, SchemaError):
                    continue  # a garbled frame is dropped, not fatal
                self._deliver(frame)
        except OSError as exc:
            with self._cond:
                requested = self._state == "ended"
                self._state = "ended"
            if not requested:
                # stop()/close() already told subscribers; this path is
                # the outlet vanishing underneath us
                self._deliver_all(StreamError(stream_id, str(exc)))
        finally:
            sock.close()

    def stop(self) -> None:
        super().stop()
        self._shutdown_socket()

    def close(self) -> None:
        super().close()
        self._shutdown_socket()

    def _shutdown_socket(self) -> None:
        with self._lock:
            sock, self._sock = self._sock, None
        if sock is not None:
            try:
                sock.shutdown(socket.SHUT_RDWR)
            except OSError:
                pass
            sock.close()


def open_live(selector: str, *, timeout: float = 2.0,
              group: str = MULTICAST_GROUP,
              port: int = MULTICAST_PORT) -> LiveSource:
    """Attach to the live outlet whose stream id or name matches.

    Discovery listens for up to `timeout` seconds. The handle is idle;
    start() connects and begins proxying.
    """
    advertisements = discover_advertisements(timeout, group=group, port=port)
    for adv in advertisements:
        if selector in (adv.metadata.stream_id, adv.metadata.name):
            return LiveSource(adv)
    known = sorted(a.metadata.stream_id for a in advertisements)
    raise NotFound(
        f"no live outlet matches {selector!r}"
        + (f" (audible: {', '.join(known)})" if known else " (none audible)")
    )
