"""Synthetic streams: per-channel generators and scripted gaze runs.

Determinism contract: (metadata, spec, seed) fully determines the value
sequence, independent of pacing, platform, and seek history. Randomness is
drawn from numpy's seeded PCG64 generator as uniform variates only; shaped
distributions (gaussian, fixation jitter) are produced by deterministic
transforms of those uniforms. Every tick consumes a fixed number of
uniforms, so seeking to tick k can reproduce the generator state by
discarding exactly k ticks' worth of draws.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np
from scipy.special import ndtri

from ..errors import SpecError
from ..metadata import StreamMetadata
from .frames import Frame
from .handle import SourceHandle

__all__ = [
    "Constant",
    "Uniform",
    "Gaussian",
    "Sine",
    "Fixation",
    "Saccade",
    "SimulationSpec",
    "SimulationSource",
    "open_simulation",
    "script_position",
    "script_duration",
]

_SKIP_CHUNK = 65536


def _unit_open(u: float) -> float:
    # map [0,1) onto (0,1) so inverse-CDF transforms never hit an endpoint
    return u * (1.0 - 2.0**-52) + 2.0**-53


@dataclass(frozen=True)
class Constant:
    value: float

    n_uniforms = 0

    def sample(self, t: float, u: Sequence[float]) -> float:
        return self.value


@dataclass(frozen=True)
class Uniform:
    lo: float
    hi: float

    n_uniforms = 1

    def sample(self, t: float, u: Sequence[float]) -> float:
        return self.lo + (self.hi - self.lo) * u[0]


@dataclass(frozen=True)
class Gaussian:
    mean: float
    sd: float

    n_uniforms = 1

    def sample(self, t: float, u: Sequence[float]) -> float:
        return self.mean + self.sd * float(ndtri(_unit_open(u[0])))


@dataclass(frozen=True)
class Sine:
    amp: float
    freq_hz: float
    phase: float = 0.0

    n_uniforms = 0

    def sample(self, t: float, u: Sequence[float]) -> float:
        return self.amp * math.sin(2.0 * math.pi * self.freq_hz * t + self.phase)


Generator = Union[Constant, Uniform, Gaussian, Sine]


@dataclass(frozen=True)
class Fixation:
    """Hold gaze at (x, y) for `duration` seconds, with per-sample jitter."""

    x: float
    y: float
    duration: float


@dataclass(frozen=True)
class Saccade:
    """Move gaze linearly to (to_x, to_y) over `duration` seconds."""

    to_x: float
    to_y: float
    duration: float


ScriptEvent = Union[Fixation, Saccade]


def script_duration(script: Sequence[ScriptEvent]) -> float:
    return sum(e.duration for e in script)


def script_position(script: Sequence[ScriptEvent], t: float):
    """Noise-free gaze position at script time `t`, plus the event phase.

    Returns (x, y, phase) with phase in {"fixation", "saccade"}; None once
    the script is exhausted. Saccades interpolate from the position the
    previous event ended at.
    """
    if t < 0:
        return None
    x, y = 0.0, 0.0
    clock = 0.0
    for event in script:
        end = clock + event.duration
        if isinstance(event, Fixation):
            if t < end:
                return event.x, event.y, "fixation"
            x, y = event.x, event.y
        else:
            if t < end:
                frac = (t - clock) / event.duration if event.duration > 0 else 1.0
                return (
                    x + (event.to_x - x) * frac,
                    y + (event.to_y - y) * frac,
                    "saccade",
                )
            x, y = event.to_x, event.to_y
        clock = end
    return None


@dataclass(frozen=True)
class SimulationSpec:
    """What to synthesize.

    kind "unguided": `generators` maps every channel name to a Generator.
    kind "guided": `script` drives an (x, y) gaze trajectory; `jitter` is
    the fixation noise sd. Guided streams end when the script does;
    unguided streams are endless.
    """

    kind: str
    generators: Optional[dict] = None
    script: Optional[tuple] = None
    jitter: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.kind not in ("unguided", "guided"):
            raise SpecError(f"unknown simulation kind {self.kind!r}")
        if self.kind == "unguided" and not self.generators:
            raise SpecError("unguided simulation requires per-channel generators")
        if self.kind == "guided" and not self.script:
            raise SpecError("guided simulation requires a script")
        if self.jitter < 0:
            raise SpecError(f"jitter must be >= 0, got {self.jitter}")

    def validate_against(self, metadata: StreamMetadata) -> None:
        if self.kind == "unguided":
            have = set(self.generators)
            want = set(metadata.channel_names)
            if have != want:
                raise SpecError(
                    f"generators {sorted(have)} do not match channels {sorted(want)}"
                )
        else:
            if metadata.channel_names[:2] != ("x", "y"):
                raise SpecError(
                    "guided simulation requires channels (x, y) first, got "
                    f"{metadata.channel_names}"
                )
            if len(metadata.channel_names) > 2:
                raise SpecError("guided simulation produces exactly (x, y)")

    def uniforms_per_tick(self, metadata: StreamMetadata) -> int:
        if self.kind == "guided":
            return 2  # x/y jitter, drawn every tick so seeks stay aligned
        return sum(
            self.generators[name].n_uniforms for name in metadata.channel_names
        )


class SimulationSource(SourceHandle):
    mode = "simulate"

    def __init__(self, metadata: StreamMetadata, spec: SimulationSpec):
        super().__init__(metadata, rate_multiplier=1.0)
        spec.validate_against(metadata)
        self.spec = spec
        self._per_tick = spec.uniforms_per_tick(metadata)
        self._tick = 0
        self._rng = np.random.default_rng(spec.seed)

    def _next_frame(self) -> Optional[Frame]:
        t = self._tick / self.metadata.frequency_hz
        u = self._rng.random(self._per_tick) if self._per_tick else ()
        spec = self.spec
        if spec.kind == "guided":
            pos = script_position(spec.script, t)
            if pos is None:
                return None
            x, y, phase = pos
            if phase == "fixation" and spec.jitter > 0:
                x += spec.jitter * float(ndtri(_unit_open(u[0])))
                y += spec.jitter * float(ndtri(_unit_open(u[1])))
            values = (x, y)
        else:
            offset = 0
            values = []
            for name in self.metadata.channel_names:
                gen = spec.generators[name]
                values.append(gen.sample(t, u[offset : offset + gen.n_uniforms]))
                offset += gen.n_uniforms
            values = tuple(values)
        self._tick += 1
        return self._emit(t, values)

    def _seek_to(self, t: float) -> None:
        # first tick with sample time >= t; regenerate the draw position
        tick = math.ceil(t * self.metadata.frequency_hz - 1e-9)
        tick = max(tick, 0)
        self._rng = np.random.default_rng(self.spec.seed)
        remaining = tick * self._per_tick
        while remaining > 0:
            step = min(remaining, _SKIP_CHUNK)
            self._rng.random(step)
            remaining -= step
        self._tick = tick


def open_simulation(metadata: StreamMetadata, spec: SimulationSpec) -> SimulationSource:
    """Open a synthetic stream paced at the metadata's frequency."""
    return SimulationSource(metadata, spec)
