"""Shared machinery for node instances.

A Transform is push-based and single-threaded: `process` takes one input
frame on a named port and returns zero or more (port, frame) emissions;
`finish` flushes whatever the instance buffered. Instances build their
output frames through per-port Emitters so seq numbering stays strictly
increasing without every kind repeating the bookkeeping.
"""

from __future__ import annotations

from typing import Iterable, Mapping

from ..errors import ParamError
from ..metadata import NUMERIC_DTYPES, StreamMetadata
from ..sources.frames import Frame

__all__ = ["Emitter", "Transform", "take_params", "require_numeric", "run_transform"]


class Emitter:
    """Builds consecutive frames of one output stream."""

    def __init__(self, stream_id: str):
        self.stream_id = stream_id
        self._seq = 0

    def frame(self, t: float, values: tuple) -> Frame:
        frame = Frame(stream_id=self.stream_id, seq=self._seq, t=t, values=values)
        self._seq += 1
        return frame


class Transform:
    """Base node instance; subclasses implement `process`."""

    def __init__(self, out_metadata: Mapping[str, StreamMetadata]):
        self.emitters = {
            port: Emitter(meta.stream_id) for port, meta in out_metadata.items()
        }

    def emit(self, port: str, t: float, values: tuple):
        return port, self.emitters[port].frame(t, values)

    def process(self, port: str, frame: Frame) -> list:
        raise NotImplementedError

    def finish(self) -> list:
        return []


def take_params(params: dict, defaults: dict) -> dict:
    """Overlay params on defaults, rejecting keys no default exists for."""
    unknown = set(params) - set(defaults)
    if unknown:
        raise ParamError(
            f"unknown parameters {sorted(unknown)}; accepted: {sorted(defaults)}"
        )
    merged = dict(defaults)
    merged.update(params)
    return merged


def require_numeric(meta: StreamMetadata, what: str) -> None:
    bad = [c.name for c in meta.channels if c.dtype not in NUMERIC_DTYPES]
    if bad:
        raise ParamError(f"{what} requires numeric channels; non-numeric: {bad}")


def run_transform(instance: Transform, frames: Iterable[Frame], port: str = "in") -> list:
    """Drive one instance over a frame sequence; returns all (port, frame) pairs."""
    out = []
    for frame in frames:
        out.extend(instance.process(port, frame))
    out.extend(instance.finish())
    return out
