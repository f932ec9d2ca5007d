"""Eye-movement nodes: velocity-threshold classification and gaze synthesis.

The classifier is pointwise: speed at or above the threshold is a saccade,
below is a fixation (the tie goes to saccade). The synthesizer is the
inverse operation: given labeled positions it rebuilds an idealized gaze
signal, holding each fixation at its run centroid (plus optional jitter)
and moving linearly through saccades between the surrounding centroids.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping

import numpy as np
from scipy.special import ndtri

from ..errors import ParamError
from ..metadata import ChannelSpec, StreamMetadata
from .base import Transform, take_params

__all__ = [
    "IvtParams",
    "IvtTransform",
    "ivt_metadata",
    "make_ivt",
    "SynthesizerTransform",
    "synthesizer_metadata",
    "make_synthesizer",
    "FIXATION",
    "SACCADE",
]

FIXATION = "fixation"
SACCADE = "saccade"

_IVT_DEFAULTS = {
    "velocity_threshold": 80.0,
    "velocity_channels": ("vx", "vy"),
    "units_scale": 1.0,
}


@dataclass(frozen=True)
class IvtParams:
    velocity_threshold: float
    velocity_channels: tuple
    units_scale: float

    @classmethod
    def from_params(cls, params: dict) -> "IvtParams":
        merged = take_params(params, _IVT_DEFAULTS)
        threshold = merged["velocity_threshold"]
        channels = tuple(merged["velocity_channels"])
        scale = merged["units_scale"]
        if not threshold > 0:
            raise ParamError(f"velocity_threshold must be > 0, got {threshold}")
        if len(channels) != 2:
            raise ParamError(
                f"velocity_channels must name two channels, got {channels}"
            )
        if not scale > 0:
            raise ParamError(f"units_scale must be > 0, got {scale}")
        return cls(
            velocity_threshold=float(threshold),
            velocity_channels=channels,
            units_scale=float(scale),
        )


def _channel_indices(meta: StreamMetadata, names: tuple) -> tuple:
    missing = [n for n in names if n not in meta.channel_names]
    if missing:
        raise ParamError(
            f"velocity channels {missing} not in stream {meta.stream_id!r} "
            f"(has {list(meta.channel_names)})"
        )
    return tuple(meta.channel_names.index(n) for n in names)


def ivt_metadata(in_meta: Mapping[str, StreamMetadata], params: dict) -> dict:
    meta = in_meta["in"]
    parsed = IvtParams.from_params(params)
    _channel_indices(meta, parsed.velocity_channels)
    unit = meta.channel(parsed.velocity_channels[0]).unit
    channels = (
        ChannelSpec(name="label", dtype="label"),
        ChannelSpec(name="v", dtype="f64", unit=unit),
    )
    return {"out": meta.replace(channels=channels)}


class IvtTransform(Transform):
    def __init__(self, params: IvtParams, in_meta: StreamMetadata, out_metadata):
        super().__init__(out_metadata)
        self._ix, self._iy = _channel_indices(in_meta, params.velocity_channels)
        self._threshold = params.velocity_threshold
        self._scale = params.units_scale

    def process(self, port, frame):
        v = self._scale * math.hypot(frame.values[self._ix], frame.values[self._iy])
        label = SACCADE if v >= self._threshold else FIXATION
        return [self.emit("out", frame.t, (label, v))]


def make_ivt(params: dict, in_meta, out_meta) -> IvtTransform:
    return IvtTransform(IvtParams.from_params(params), in_meta["in"], out_meta)


_SYNTH_DEFAULTS = {"jitter": 0.0, "seed": 0}


def _unit_open(u: float) -> float:
    return u * (1.0 - 2.0**-52) + 2.0**-53


def synthesizer_metadata(in_meta: Mapping[str, StreamMetadata], params: dict) -> dict:
    meta = in_meta["in"]
    merged = take_params(params, _SYNTH_DEFAULTS)
    if merged["jitter"] < 0:
        raise ParamError(f"jitter must be >= 0, got {merged['jitter']}")
    for name in ("label", "x", "y"):
        if name not in meta.channel_names:
            raise ParamError(
                f"synthesizer requires channels (label, x, y); stream "
                f"{meta.stream_id!r} has {list(meta.channel_names)}"
            )
    channels = (meta.channel("x"), meta.channel("y"))
    return {"out": meta.replace(channels=channels)}


class SynthesizerTransform(Transform):
    """Rebuild gaze from labeled runs, one run of lookahead.

    A fixation run is emittable once it closes (its centroid is then
    known); a saccade run additionally waits for the following fixation to
    close, because its path ends at that fixation's centroid. A saccade
    with no fixation on one side (stream edge) passes its raw positions
    through.
    """

    def __init__(self, params: dict, in_meta: StreamMetadata, out_metadata):
        super().__init__(out_metadata)
        merged = take_params(params, _SYNTH_DEFAULTS)
        self._jitter = float(merged["jitter"])
        self._rng = np.random.default_rng(merged["seed"])
        names = in_meta.channel_names
        self._il = names.index("label")
        self._ix = names.index("x")
        self._iy = names.index("y")
        self._runs: list[dict] = []  # {"label", "samples": [(t, x, y)]}
        self._prev_centroid = None

    def process(self, port, frame):
        label = frame.values[self._il]
        sample = (frame.t, frame.values[self._ix], frame.values[self._iy])
        if self._runs and self._runs[-1]["label"] == label:
            self._runs[-1]["samples"].append(sample)
        else:
            self._runs.append({"label": label, "samples": [sample]})
        return self._flush(final=False)

    def finish(self):
        return self._flush(final=True)

    def _flush(self, final: bool):
        out = []
        while self._runs:
            run = self._runs[0]
            closed = len(self._runs) > 1 or final
            if not closed:
                break
            if run["label"] == FIXATION:
                out.extend(self._emit_fixation(run))
                self._runs.pop(0)
                continue
            # saccade: resolve only when its landing centroid is known
            follower = self._runs[1] if len(self._runs) > 1 else None
            follower_closed = len(self._runs) > 2 or final
            if follower is None:
                if final:
                    out.extend(self._emit_passthrough(run))
                    self._runs.pop(0)
                    continue
                break
            if not follower_closed:
                break
            if self._prev_centroid is None:
                out.extend(self._emit_passthrough(run))
            else:
                target = _centroid(follower["samples"])
                out.extend(self._emit_saccade(run, self._prev_centroid, target))
            self._runs.pop(0)
        return out

    def _emit_fixation(self, run):
        cx, cy = _centroid(run["samples"])
        self._prev_centroid = (cx, cy)
        out = []
        for t, _, _ in run["samples"]:
            x, y = cx, cy
            if self._jitter > 0:
                u = self._rng.random(2)
                x += self._jitter * float(ndtri(_unit_open(u[0])))
                y += self._jitter * float(ndtri(_unit_open(u[1])))
            out.append(self.emit("out", t, (x, y)))
        return out

    def _emit_saccade(self, run, start, target):
        n = len(run["samples"])
        out = []
        for i, (t, _, _) in enumerate(run["samples"]):
            frac = (i + 1) / (n + 1)
            out.append(
                self.emit(
                    "out", t,
                    (
                        start[0] + (target[0] - start[0]) * frac,
                        start[1] + (target[1] - start[1]) * frac,
                    ),
                )
            )
        return out

    def _emit_passthrough(self, run):
        return [self.emit("out", t, (x, y)) for t, x, y in run["samples"]]


def _centroid(samples):
    n = len(samples)
    return (
        sum(s[1] for s in samples) / n,
        sum(s[2] for s in samples) / n,
    )


def make_synthesizer(params: dict, in_meta, out_meta) -> SynthesizerTransform:
    return SynthesizerTransform(params, in_meta["in"], out_meta)
