"""Workaday nodes: strided mean, noise injection, value routing, aligned
join, identity plumbing, and a rate throttle for fault injection.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from ..errors import ParamError, UnknownKey
from ..metadata import ChannelSpec, StreamMetadata
from ..sources.aggregate import Merger
from .base import Transform, require_numeric, take_params

__all__ = [
    "MeanParams",
    "MeanTransform",
    "mean_metadata",
    "make_mean",
    "NoiseTransform",
    "noise_metadata",
    "make_noise",
    "RouterTransform",
    "router_ports",
    "router_metadata",
    "make_router",
    "JoinTransform",
    "join_ports",
    "join_metadata",
    "make_join",
    "IdentityTransform",
    "identity_metadata",
    "make_identity",
    "ThrottleTransform",
    "throttle_metadata",
    "make_throttle",
]

_MEAN_DEFAULTS = {"window": 50, "stride": 50}


@dataclass(frozen=True)
class MeanParams:
    window: int
    stride: int

    @classmethod
    def from_params(cls, params: dict) -> "MeanParams":
        merged = take_params(params, _MEAN_DEFAULTS)
        window, stride = merged["window"], merged["stride"]
        if not (isinstance(window, int) and window > 0):
            raise ParamError(f"window must be a positive integer, got {window!r}")
        if not (isinstance(stride, int) and stride > 0):
            raise ParamError(f"stride must be a positive integer, got {stride!r}")
        if stride > window:
            raise ParamError(
                f"stride {stride} > window {window} would skip samples"
            )
        return cls(window=window, stride=stride)


def _float_channels(meta: StreamMetadata) -> tuple:
    # integer channels promote to f64: their mean is not an integer
    return tuple(
        c if c.dtype in ("f32", "f64") else ChannelSpec(c.name, "f64", c.unit)
        for c in meta.channels
    )


def mean_metadata(in_meta: Mapping[str, StreamMetadata], params: dict) -> dict:
    meta = in_meta["in"]
    parsed = MeanParams.from_params(params)
    require_numeric(meta, "mean")
    return {
        "out": meta.replace(
            channels=_float_channels(meta),
            frequency_hz=meta.frequency_hz / parsed.stride,
        )
    }


class MeanTransform(Transform):
    def __init__(self, params: MeanParams, in_meta: StreamMetadata, out_metadata):
        super().__init__(out_metadata)
        self._window = params.window
        self._stride = params.stride
        self._values: deque = deque(maxlen=params.window)
        self._sums = [0.0] * len(in_meta.channels)
        self._count = 0

    def process(self, port, frame):
        if len(self._values) == self._window:
            oldest = self._values[0]
            for i, v in enumerate(oldest):
                self._sums[i] -= v
        self._values.append(frame.values)
        for i, v in enumerate(frame.values):
            self._sums[i] += v
        self._count += 1
        if self._count < self._window or (self._count - self._window) % self._stride:
            return []
        w = self._window
        return [self.emit("out", frame.t, tuple(s / w for s in self._sums))]


def make_mean(params: dict, in_meta, out_meta) -> MeanTransform:
    return MeanTransform(MeanParams.from_params(params), in_meta["in"], out_meta)


_NOISE_DEFAULTS = {"sigma": 1.0, "seed": 0}


def noise_metadata(in_meta: Mapping[str, StreamMetadata], params: dict) -> dict:
    meta = in_meta["in"]
    merged = take_params(params, _NOISE_DEFAULTS)
    sigma = merged["sigma"]
    sigmas = sigma if isinstance(sigma, dict) else {c.name: sigma for c in meta.channels}
    for name, value in sigmas.items():
        if name not in meta.channel_names:
            raise ParamError(f"sigma names unknown channel {name!r}")
        if value < 0:
            raise ParamError(f"sigma must be >= 0, got {value} for {name!r}")
        if meta.channel(name).dtype in ("bool", "label") and value > 0:
            raise ParamError(f"cannot add noise to non-numeric channel {name!r}")
    channels = tuple(
        ChannelSpec(c.name, "f64", c.unit)
        if c.dtype not in ("f32", "f64", "bool", "label") and sigmas.get(c.name, 0) > 0
        else c
        for c in meta.channels
    )
    return {"out": meta.replace(channels=channels)}


class NoiseTransform(Transform):
    def __init__(self, params: dict, in_meta: StreamMetadata, out_metadata):
        super().__init__(out_metadata)
        merged = take_params(params, _NOISE_DEFAULTS)
        sigma = merged["sigma"]
        sigmas = sigma if isinstance(sigma, dict) else {c.name: sigma for c in in_meta.channels}
        self._noisy = [
            (i, float(sigmas[c.name]))
            for i, c in enumerate(in_meta.channels)
            if sigmas.get(c.name, 0) > 0
        ]
        self._rng = np.random.default_rng(merged["seed"])

    def process(self, port, frame):
        if not self._noisy:
            return [self.emit("out", frame.t, frame.values)]
        values = list(frame.values)
        draws = self._rng.standard_normal(len(self._noisy))
        for (i, sd), g in zip(self._noisy, draws):
            values[i] += sd * g
        return [self.emit("out", frame.t, tuple(values))]


def make_noise(params: dict, in_meta, out_meta) -> NoiseTransform:
    return NoiseTransform(params, in_meta["in"], out_meta)


_ROUTER_DEFAULTS = {"key": None, "values": None, "overflow": "overflow"}


def _router_parsed(params: dict) -> tuple:
    merged = take_params(params, _ROUTER_DEFAULTS)
    key, values, overflow = merged["key"], merged["values"], merged["overflow"]
    if not key:
        raise ParamError("router requires a `key` channel name")
    if not values:
        raise ParamError("router requires the list of expected `values`")
    values = [str(v) for v in values]
    if len(set(values)) != len(values):
        raise ParamError(f"router values must be distinct, got {values}")
    if overflow in values:
        raise ParamError(f"overflow port {overflow!r} collides with a value")
    return key, tuple(values), overflow


def router_ports(params: dict) -> tuple:
    _, values, overflow = _router_parsed(params)
    return ("in",), values + (overflow,)


def router_metadata(in_meta: Mapping[str, StreamMetadata], params: dict) -> dict:
    meta = in_meta["in"]
    key, values, overflow = _router_parsed(params)
    if key not in meta.channel_names:
        raise UnknownKey(
            f"router key {key!r} is not a channel of {meta.stream_id!r}"
        )
    rest = tuple(c for c in meta.channels if c.name != key)
    if not rest:
        raise ParamError("router needs at least one channel besides the key")
    # nominal split: each declared value assumed an equal share of frames
    per_port = meta.replace(channels=rest, frequency_hz=meta.frequency_hz / len(values))
    return {port: per_port for port in values + (overflow,)}


class RouterTransform(Transform):
    def __init__(self, params: dict, in_meta: StreamMetadata, out_metadata):
        super().__init__(out_metadata)
        key, values, overflow = _router_parsed(params)
        self._key_index = in_meta.channel_names.index(key)
        self._known = set(values)
        self._overflow = overflow
        self._rest = [i for i, c in enumerate(in_meta.channels) if c.name != key]

    def process(self, port, frame):
        value = str(frame.values[self._key_index])
        target = value if value in self._known else self._overflow
        rest = tuple(frame.values[i] for i in self._rest)
        return [self.emit(target, frame.t, rest)]


def make_router(params: dict, in_meta, out_meta) -> RouterTransform:
    return RouterTransform(params, in_meta["in"], out_meta)


_JOIN_DEFAULTS = {"inputs": ("a", "b"), "select": None, "window": 1.0}


def _join_parsed(params: dict) -> tuple:
    merged = take_params(params, _JOIN_DEFAULTS)
    inputs = tuple(merged["inputs"])
    select = merged["select"]
    window = merged["window"]
    if len(inputs) < 1 or len(set(inputs)) != len(inputs):
        raise ParamError(f"join inputs must be distinct port names, got {inputs}")
    if not select:
        raise ParamError(
            "join requires `select`: output channel -> 'port/channel'"
        )
    parsed = {}
    for out_name, ref in select.items():
        port, _, channel = str(ref).partition("/")
        if not channel or port not in inputs:
            raise ParamError(
                f"join select {out_name!r}: {ref!r} must be 'port/channel' "
                f"with port in {inputs}"
            )
        parsed[str(out_name)] = (port, channel)
    return inputs, parsed, float(window)


def join_ports(params: dict) -> tuple:
    inputs, _, _ = _join_parsed(params)
    return inputs, ("out",)


def join_metadata(in_meta: Mapping[str, StreamMetadata], params: dict) -> dict:
    inputs, select, window = _join_parsed(params)
    missing = [p for p in inputs if p not in in_meta]
    if missing:
        raise ParamError(f"join ports {missing} not connected")
    channels = []
    for out_name, (port, channel) in select.items():
        src = in_meta[port]
        if channel not in src.channel_names:
            raise ParamError(
                f"join select {out_name!r}: no channel {channel!r} on port {port!r}"
            )
        spec = src.channel(channel)
        channels.append(ChannelSpec(out_name, spec.dtype, spec.unit))
    clock = max(in_meta[p].frequency_hz for p in inputs)
    base = in_meta[inputs[0]]
    return {"out": base.replace(channels=tuple(channels), frequency_hz=clock)}


class JoinTransform(Transform):
    """Zero-order-hold alignment of several ports onto the fastest clock."""

    def __init__(self, params: dict, in_meta: Mapping[str, StreamMetadata], out_metadata):
        super().__init__(out_metadata)
        inputs, select, window = _join_parsed(params)
        self._ports = {port: i for i, port in enumerate(inputs)}
        # namespace each port's channels as port/channel inside the merger
        namespaced = [
            in_meta[port].replace(stream_id=port) for port in inputs
        ]
        self._merger = Merger(namespaced, window) if len(inputs) > 1 else None
        merged_names = (
            self._merger.metadata.channel_names
            if self._merger
            else tuple(f"{inputs[0]}/{c}" for c in in_meta[inputs[0]].channel_names)
        )
        self._pick = [
            merged_names.index(f"{port}/{channel}")
            for port, channel in select.values()
        ]

    def process(self, port, frame):
        if self._merger is None:
            merged_values = frame.values
        else:
            merged = self._merger.feed(self._ports[port], frame)
            if merged is None:
                return []
            merged_values = merged.values
        values = tuple(merged_values[i] for i in self._pick)
        return [self.emit("out", frame.t, values)]


def make_join(params: dict, in_meta, out_meta) -> JoinTransform:
    return JoinTransform(params, in_meta, out_meta)


def identity_metadata(in_meta: Mapping[str, StreamMetadata], params: dict) -> dict:
    take_params(params, {})
    return {"out": in_meta["in"]}


class IdentityTransform(Transform):
    def process(self, port, frame):
        return [self.emit("out", frame.t, frame.values)]


def make_identity(params: dict, in_meta, out_meta) -> IdentityTransform:
    take_params(params, {})
    return IdentityTransform(out_meta)


class PassthroughTransform(Transform):
    """Forwards frame objects untouched: same stream id, same seq."""

    def process(self, port, frame):
        return [("out", frame)]


def make_passthrough(params: dict, in_meta, out_meta) -> PassthroughTransform:
    take_params(params, {})
    return PassthroughTransform(out_meta)


_THROTTLE_DEFAULTS = {"rate_hz": None}


def throttle_metadata(in_meta: Mapping[str, StreamMetadata], params: dict) -> dict:
    merged = take_params(params, _THROTTLE_DEFAULTS)
    if not merged["rate_hz"] or merged["rate_hz"] <= 0:
        raise ParamError(f"rate_hz must be positive, got {merged['rate_hz']!r}")
    # declares the input rate untouched: this node simulates a bottleneck,
    # so the shortfall must show up in fluidity, not in expectations
    return {"out": in_meta["in"]}


class ThrottleTransform(Transform):
    """Identity capped at rate_hz output frames per second of stream time.

    Emission slots form a fixed grid anchored at the first frame, so the
    long-run rate is exactly the cap; after a discontinuity (seek) the
    grid re-anchors instead of bursting to catch up.
    """

    def __init__(self, params: dict, in_meta: StreamMetadata, out_metadata):
        super().__init__(out_metadata)
        merged = take_params(params, _THROTTLE_DEFAULTS)
        self._step = 1.0 / float(merged["rate_hz"])
        self._next = None

    def process(self, port, frame):
        if self._next is not None and frame.t - self._next > 2 * self._step:
            self._next = None  # discontinuity: re-anchor
        if self._next is None:
            self._next = frame.t + self._step
            return [self.emit("out", frame.t, frame.values)]
        if frame.t >= self._next - 1e-9:
            self._next += self._step
            return [self.emit("out", frame.t, frame.values)]
        return []


def make_throttle(params: dict, in_meta, out_meta) -> ThrottleTransform:
    return ThrottleTransform(params, in_meta["in"], out_meta)
