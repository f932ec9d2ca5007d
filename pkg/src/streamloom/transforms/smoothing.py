"""Low-pass smoothing with a causal Butterworth biquad cascade.

Order 2 by default, cutoff a quarter of Nyquist unless given. The filter
runs in second-order sections with per-channel state, so each frame is
processed as it arrives; output rate and channel shapes are unchanged.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Optional

import numpy as np
from scipy.signal import butter, sosfilt

from ..errors import ParamError
from ..metadata import NUMERIC_DTYPES, StreamMetadata
from .base import Transform, take_params

__all__ = ["ButterworthParams", "SmoothTransform", "smooth_metadata", "make_smooth"]

_DEFAULTS = {"order": 2, "cutoff_hz": None}


@dataclass(frozen=True)
class ButterworthParams:
    order: int
    cutoff_hz: float

    @classmethod
    def from_params(cls, params: dict, f_s: float) -> "ButterworthParams":
        merged = take_params(params, _DEFAULTS)
        order = merged["order"]
        cutoff = merged["cutoff_hz"]
        if cutoff is None:
            cutoff = f_s / 8.0  # a quarter of Nyquist
        if not (isinstance(order, int) and order >= 1):
            raise ParamError(f"order must be a positive integer, got {order!r}")
        if not (0 < cutoff < f_s / 2):
            raise ParamError(
                f"cutoff_hz must lie in (0, {f_s / 2}) for a {f_s} Hz stream, "
                f"got {cutoff}"
            )
        return cls(order=order, cutoff_hz=float(cutoff))


def smooth_metadata(in_meta: Mapping[str, StreamMetadata], params: dict) -> dict:
    meta = in_meta["in"]
    ButterworthParams.from_params(params, meta.frequency_hz)  # validation only
    return {"out": meta}


class SmoothTransform(Transform):
    def __init__(self, params: ButterworthParams, in_meta: StreamMetadata, out_metadata):
        super().__init__(out_metadata)
        self.sos = butter(
            params.order, params.cutoff_hz, btype="low", fs=in_meta.frequency_hz,
            output="sos",
        )
        self._numeric = [
            i for i, c in enumerate(in_meta.channels) if c.dtype in NUMERIC_DTYPES
        ]
        self._zi = {
            i: np.zeros((self.sos.shape[0], 2)) for i in self._numeric
        }

    def process(self, port, frame):
        values = list(frame.values)
        for i in self._numeric:
            y, self._zi[i] = sosfilt(self.sos, [values[i]], zi=self._zi[i])
            values[i] = float(y[0])
        return [self.emit("out", frame.t, tuple(values))]


def make_smooth(params: dict, in_meta, out_meta) -> SmoothTransform:
    parsed = ButterworthParams.from_params(params, in_meta["in"].frequency_hz)
    return SmoothTransform(parsed, in_meta["in"], out_meta)
