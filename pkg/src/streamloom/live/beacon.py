"""Discovery beacons for live outlets.

An outlet advertises itself by sending its stream description to a
well-known multicast group once per second. The payload is the canonical
JSON stream document with one extra field, ``port``, naming the TCP port
serving frames. A beacon not re-heard within the stale window means the
outlet is gone.
"""

import json
import socket
import struct
import threading
import time
from dataclasses import dataclass
from typing import Optional

from ..errors import SchemaError
from ..metadata import StreamMetadata, canonical_json_bytes, parse_stream, stream_doc

MULTICAST_GROUP = "239.77.77.1"
MULTICAST_PORT = 16571
BEACON_INTERVAL = 1.0
BEACON_STALE = 5.0


def beacon_payload(metadata: StreamMetadata, port: int) -> bytes:
    doc = stream_doc(metadata)
    doc["port"] = port
    return canonical_json_bytes(doc)


def parse_beacon(payload: bytes):
    """(StreamMetadata, data port) from one datagram; SchemaError if malformed."""
    try:
        doc = json.loads(payload.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise SchemaError(f"beacon is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise SchemaError("beacon must be an object")
    port = doc.pop("port", None)
    if not isinstance(port, int) or isinstance(port, bool) or not 0 < port < 65536:
        raise SchemaError(f"beacon port must be 1..65535, got {port!r}")
    return parse_stream(doc), port


@dataclass
class LiveAdvertisement:
    """One discovered outlet: what it streams and where to fetch it."""

    metadata: StreamMetadata
    host: str
    port: int
    last_seen: float  # monotonic seconds

    @property
    def key(self):
        return (self.metadata.stream_id, self.host, self.port)


def fresh_advertisements(advertisements, now: float,
                         stale: float = BEACON_STALE) -> list:
    """Drop outlets whose beacon has not been re-heard recently."""
    return [a for a in advertisements if now - a.last_seen < stale]


class BeaconSender:
    """Re-sends an outlet's advertisement on a fixed interval."""

    def __init__(self, metadata: StreamMetadata, data_port: int, *,
                 interval: float = BEACON_INTERVAL,
                 group: str = MULTICAST_GROUP, port: int = MULTICAST_PORT):
        self._payload = beacon_payload(metadata, data_port)
        self._target = (group, port)
        self._interval = interval
        self._stop = threading.Event()
        self._sock = socket.socket(socket.AF_INET, socket.SOCK_DGRAM)
        self._sock.setsockopt(socket.IPPROTO_IP, socket.IP_MULTICAST_TTL, 1)
        self._sock.setsockopt(socket.IPPROTO_IP, socket.IP_MULTICAST_LOOP, 1)
        self._thread = threading.Thread(
            target=self._run, name="beacon", daemon=True
        )
        self._thread.start()

    def _run(self) -> None:
        while not self._stop.is_set():
            try:
                self._sock.sendto(self._payload, self._target)
            except OSError:
                return
            self._stop.wait(self._interval)

    def close(self) -> None:
        self._stop.set()
        self._thread.join(timeout=2.0)
        self._sock.close()


def open_listener(group: str = MULTICAST_GROUP,
                  port: int = MULTICAST_PORT) -> socket.socket:
    sock = socket.socket(socket.AF_INET, socket.SOCK_DGRAM)
    sock.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
    if hasattr(socket, "SO_REUSEPORT"):
        sock.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEPORT, 1)
    sock.bind(("", port))
    membership = struct.pack(
        "4s4s", socket.inet_aton(group), socket.inet_aton("0.0.0.0")
    )
    sock.setsockopt(socket.IPPROTO_IP, socket.IP_ADD_MEMBERSHIP, membership)
    return sock


def discover_advertisements(timeout: float, *,
                            group: str = MULTICAST_GROUP,
                            port: int = MULTICAST_PORT,
                            stale: float = BEACON_STALE) -> list:
    """Listen for `timeout` seconds; fresh outlets, stable order.

    Malformed or foreign datagrams are ignored. An outlet heard early in
    a long window but silent since longer than `stale` is dropped.
    """
    seen: dict = {}
    sock = open_listener(group, port)
    deadline = time.monotonic() + timeout
    try:
        while True:
            remaining = deadline - time.monotonic()
            if remaining <= 0:
                break
            sock.settimeout(min(remaining, 0.25))
            try:
                payload, (host, _) = sock.recvfrom(65535)
            except socket.timeout:
                continue
            except OSError:
                break
            try:
                metadata, data_port = parse_beacon(payload)
            except SchemaError:
                continue
            adv = LiveAdvertisement(metadata, host, data_port, time.monotonic())
            seen[adv.key] = adv
    finally:
        sock.close()
    alive = fresh_advertisements(seen.values(), time.monotonic(), stale)
    return sorted(alive, key=lambda a: a.key)


def discover_live(timeout: float = 2.0, *,
                  group: str = MULTICAST_GROUP,
                  port: int = MULTICAST_PORT) -> list:
    """Stream descriptions of every live outlet audible right now."""
    return [
        adv.metadata
        for adv in discover_advertisements(timeout, group=group, port=port)
    ]


class BeaconMonitor:
    """Long-lived listener keeping a rolling table of live outlets."""

    def __init__(self, *, group: str = MULTICAST_GROUP,
                 port: int = MULTICAST_PORT, stale: float = BEACON_STALE):
        self._stale = stale
        self._seen: dict = {}
        self._lock = threading.Lock()
        self._sock = open_listener(group, port)
        self._sock.settimeout(0.25)
        self._stop = threading.Event()
        self._thread = threading.Thread(
            target=self._run, name="beacon-monitor", daemon=True
        )
        self._thread.start()

    def _run(self) -> None:
        while not self._stop.is_set():
            try:
                payload, (host, _) = self._sock.recvfrom(65535)
            except socket.timeout:
                continue
            except OSError:
                return
            try:
                metadata, data_port = parse_beacon(payload)
            except SchemaError:
                continue
            adv = LiveAdvertisement(metadata, host, data_port, time.monotonic())
            with self._lock:
                self._seen[adv.key] = adv

    def advertisements(self) -> list:
        with self._lock:
            current = list(self._seen.values())
        alive = fresh_advertisements(current, time.monotonic(), self._stale)
        return sorted(alive, key=lambda a: a.key)

    def close(self) -> None:
        self._stop.set()
        self._thread.join(timeout=2.0)
        self._sock.close()
