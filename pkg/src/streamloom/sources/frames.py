"""The unit of transmission: one timestamped sample of one stream.

A Frame carries the values of every channel at one sample instant, in the
channel order declared by the stream's metadata. ``seq`` counts emissions
and is strictly increasing per stream, across pauses and seeks alike; ``t``
is the stream-clock timestamp and is non-decreasing except across a seek
discontinuity. A value may be None when a merger withholds a stale
contribution (see the aggregator).

Wire form is canonical JSON so two frames are byte-identical exactly when
they are value-identical.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Optional

from ..errors import SchemaError
from ..metadata.jsonio import canonical_json_bytes

__all__ = [
    "Frame",
    "EndOfStream",
    "StreamError",
    "frame_doc",
    "parse_frame",
    "frame_bytes",
]


@dataclass(frozen=True)
class Frame:
    stream_id: str
    seq: int
    t: float
    values: tuple

    def value(self, metadata, channel: str):
        """Look up one channel's value via the stream's metadata."""
        return self.values[metadata.channel_names.index(channel)]


@dataclass(frozen=True)
class EndOfStream:
    """Terminal marker delivered to subscribers when a source finishes."""

    stream_id: str
    reason: str = "end of data"


@dataclass(frozen=True)
class StreamError:
    """Error event delivered in-band so consumers see failures in order."""

    stream_id: str
    message: str


def frame_doc(frame: Frame) -> dict:
    return {
        "stream_id": frame.stream_id,
        "seq": frame.seq,
        "t": frame.t,
        "values": list(frame.values),
    }


def frame_bytes(frame: Frame) -> bytes:
    """Canonical JSON encoding of a frame."""
    return canonical_json_bytes(frame_doc(frame))


def parse_frame(doc: Any) -> Frame:
    if not isinstance(doc, dict):
        raise SchemaError(f"frame must be an object, got {type(doc).__name__}")
    try:
        stream_id, seq, t, values = (
            doc["stream_id"], doc["seq"], doc["t"], doc["values"],
        )
    except KeyError as exc:
        raise SchemaError(f"frame missing field {exc.args[0]!r}") from None
    if not isinstance(seq, int) or isinstance(seq, bool) or seq < 0:
        raise SchemaError(f"frame seq must be a non-negative integer, got {seq!r}")
    if not isinstance(t, (int, float)) or isinstance(t, bool):
        raise SchemaError(f"frame t must be a number, got {t!r}")
    if not isinstance(values, list):
        raise SchemaError("frame values must be a list")
    return Frame(stream_id=str(stream_id), seq=seq, t=float(t), values=tuple(values))
