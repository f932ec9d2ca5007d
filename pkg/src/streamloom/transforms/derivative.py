"""Streaming first derivatives via a centered Savitzky-Golay filter.

The derivative at sample n needs (window-1)/2 samples of future context,
so emission lags by that much and nothing is emitted during warm-up; the
emitted frame carries the center sample's timestamp. Values are scaled by
the sample rate, turning per-sample differences into per-second rates, and
every channel is promoted to f64 (a derivative of integers is not an
integer).
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Mapping

import numpy as np
from scipy.signal import savgol_coeffs

from ..errors import ParamError
from ..metadata import ChannelSpec, StreamMetadata
from .base import Transform, require_numeric, take_params

__all__ = ["SavGolParams", "DifferentiateTransform", "differentiate_metadata", "make_differentiate"]

_DEFAULTS = {"window": 7, "polyorder": 2}


@dataclass(frozen=True)
class SavGolParams:
    window: int
    polyorder: int

    @classmethod
    def from_params(cls, params: dict) -> "SavGolParams":
        merged = take_params(params, _DEFAULTS)
        window, polyorder = merged["window"], merged["polyorder"]
        if not (isinstance(window, int) and window >= 3 and window % 2 == 1):
            raise ParamError(f"window must be an odd integer >= 3, got {window!r}")
        if not (isinstance(polyorder, int) and 1 <= polyorder < window):
            raise ParamError(
                f"polyorder must be an integer in [1, window), got {polyorder!r}"
            )
        return cls(window=window, polyorder=polyorder)

    @property
    def warmup(self) -> int:
        return (self.window - 1) // 2


def _rate_unit(unit: str) -> str:
    return f"{unit}/s" if unit else "1/s"


def differentiate_metadata(in_meta: Mapping[str, StreamMetadata], params: dict) -> dict:
    meta = in_meta["in"]
    SavGolParams.from_params(params)
    require_numeric(meta, "differentiate")
    channels = tuple(
        ChannelSpec(name=c.name, dtype="f64", unit=_rate_unit(c.unit))
        for c in meta.channels
    )
    return {"out": meta.replace(channels=channels)}


class DifferentiateTransform(Transform):
    def __init__(self, params: SavGolParams, in_meta: StreamMetadata, out_metadata):
        super().__init__(out_metadata)
        center = params.warmup
        self._coeffs = savgol_coeffs(
            params.window, params.polyorder, deriv=1,
            delta=1.0 / in_meta.frequency_hz, pos=center, use="dot",
        )
        self._window = params.window
        self._center = center
        self._buffer: deque = deque(maxlen=params.window)
        self._times: deque = deque(maxlen=params.window)

    def process(self, port, frame):
        self._buffer.append(frame.values)
        self._times.append(frame.t)
        if len(self._buffer) < self._window:
            return []
        block = np.asarray(self._buffer, dtype=float)
        rates = self._coeffs @ block
        return [self.emit("out", self._times[self._center], tuple(rates.tolist()))]


def make_differentiate(params: dict, in_meta, out_meta) -> DifferentiateTransform:
    parsed = SavGolParams.from_params(params)
    return DifferentiateTransform(parsed, in_meta["in"], out_meta)
