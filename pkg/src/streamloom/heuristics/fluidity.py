"""Output-rate health heuristic.

A node that cannot keep up emits slower than its declared output frequency.
``fluidity`` maps the ratio of observed to expected rate onto [0, 1] with a
deliberately steep penalty near the top end: a small shortfall in rate already
produces a visible drop, while a severe stall saturates to 0.

    F = 1 - sqrt(1 - (f_mu / f_e)**2)

``FluidityState`` maintains the observed-rate estimate online from emission
timestamps, with either a sliding-window counter or a scalar Kalman filter
over per-second counts.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass

import numpy as np

from ..errors import ParamError

__all__ = [
    "fluidity",
    "estimate_frequency",
    "WindowEstimator",
    "KalmanEstimator",
    "FluidityState",
]


def fluidity(f_mu: float, f_e: float) -> float:
    """Rate-health score in [0, 1] for observed rate `f_mu` against expected `f_e`.

    Parameters
    ----------
    f_mu : float
        Observed output frequency in Hz. Clamped into [0, f_e].
    f_e : float
        Expected output frequency in Hz. Must be positive.

    Returns
    -------
    float
        1.0 when the node keeps up exactly, 0.0 when fully stalled.

    Examples
    --------
    >>> fluidity(50, 50)
    1.0
    >>> fluidity(0, 50)
    0.0
    >>> round(fluidity(30, 50), 12)
    0.2
    """
    if f_e <= 0:
        raise ParamError(f"expected frequency must be positive, got {f_e}")
    f_mu = min(max(f_mu, 0.0), f_e)
    if f_mu == 0.0:
        return 0.0
    if f_mu == f_e:
        return 1.0
    # Factored radicand, subtracting before dividing: computing the ratio
    # first rounds it, and near full rate the formula amplifies that half
    # ulp into ~1e-8 of absolute error. (f_e - f_mu) is exact (Sterbenz)
    # whenever it is small, so this form stays within a few ulp everywhere.
    return 1.0 - math.sqrt((f_e - f_mu) * (f_e + f_mu)) / f_e


@dataclass(frozen=True)
class WindowEstimator:
    """Observed rate = event count in the trailing window / window length."""

    seconds: float = 1.0

    def __post_init__(self):
        if self.seconds <= 0:
            raise ParamError(f"window must be positive, got {self.seconds}")


@dataclass(frozen=True)
class KalmanEstimator:
    """Scalar constant-value Kalman filter over per-second event counts.

    The state is the rate itself; each completed second contributes its event
    count as a measurement. `q` is the process variance (how fast the true
    rate may drift), `r` the measurement variance (shot noise of the counts).
    """

    q: float
    r: float

    def __post_init__(self):
        if self.q < 0 or self.r <= 0:
            raise ParamError("need q >= 0 and r > 0")


def estimate_frequency(timestamps, estimator, t_end: float | None = None):
    """Estimate the event rate over time from raw event timestamps.

    Parameters
    ----------
    timestamps : array_like
        Non-decreasing event times in seconds.
    estimator : WindowEstimator or KalmanEstimator
        Estimation strategy.
    t_end : float, optional
        Extend the evaluation span past the last event (needed to observe a
        rate decaying to zero after events stop).

    Returns
    -------
    times, rates : ndarray, ndarray
        Rate estimates sampled at 1 s intervals after the first event.
    """
    ts = np.asarray(timestamps, dtype=float)
    if ts.size and np.any(np.diff(ts) < 0):
        raise ParamError("timestamps must be non-decreasing")
    if ts.size == 0:
        if t_end is None:
            return np.array([]), np.array([])
        ticks = np.arange(1.0, t_end + 1e-9)
        return ticks, np.zeros_like(ticks)

    t0 = ts[0]
    span = (ts[-1] if t_end is None else max(t_end, ts[-1])) - t0
    ticks = t0 + np.arange(1.0, span + 1e-9)
    if ticks.size == 0:
        return np.array([]), np.array([])

    if isinstance(estimator, WindowEstimator):
        w = estimator.seconds
        lo = np.searchsorted(ts, ticks - w, side="right")
        hi = np.searchsorted(ts, ticks, side="right")
        return ticks, (hi - lo) / w

    if isinstance(estimator, KalmanEstimator):
        counts = np.diff(np.searchsorted(ts, ticks, side="right"), prepend=0)
        x, p = float(counts[0]), estimator.r
        rates = np.empty(ticks.size)
        rates[0] = x
        for k in range(1, ticks.size):
            p += estimator.q
            gain = p / (p + estimator.r)
            x += gain * (counts[k] - x)
            p *= 1.0 - gain
            rates[k] = x
        return ticks, rates

    raise ParamError(f"unknown estimator {estimator!r}")


class FluidityState:
    """Online rate-health tracker for one output port.

    Call :meth:`observe` for every emitted frame, then :meth:`value` to read
    the current score. Before any frame has been observed the score is None
    (unknown, not zero) so an idle pipeline does not read as a bottleneck.
    """

    def __init__(self, f_e: float, estimator=None):
        if f_e <= 0:
            raise ParamError(f"expected frequency must be positive, got {f_e}")
        self.f_e = f_e
        self.estimator = estimator or WindowEstimator(1.0)
        # count of raw estimates clamped down to f_e (bursts above expectation)
        self.clamp_count = 0
        self._events: deque[float] = deque()
        self._seen_any = False
        # kalman internals: filter over completed-second counts
        self._kf_x: float | None = None
        self._kf_p = 0.0
        self._kf_origin: float | None = None
        self._kf_done = 0  # completed seconds already folded in
        self._kf_pending = 0

    def observe(self, t: float) -> None:
        """Record one emission at time `t` (stream or wall clock, caller's choice)."""
        self._seen_any = True
        if isinstance(self.estimator, KalmanEstimator):
            if self._kf_origin is None:
                self._kf_origin = t
            self._advance_kalman(t)
            self._kf_pending += 1
        else:
            self._events.append(t)

    def _advance_kalman(self, now: float) -> None:
        # fold every fully elapsed second into the filter
        est = self.estimator
        while now - (self._kf_origin + self._kf_done) >= 1.0:
            z = float(self._kf_pending)
            self._kf_pending = 0
            self._kf_done += 1
            if self._kf_x is None:
                self._kf_x, self._kf_p = z, est.r
            else:
                self._kf_p += est.q
                gain = self._kf_p / (self._kf_p + est.r)
                self._kf_x += gain * (z - self._kf_x)
                self._kf_p *= 1.0 - gain

    def measured_hz(self, now: float) -> float:
        """Current observed-rate estimate, clamped into [0, f_e]."""
        if isinstance(self.estimator, KalmanEstimator):
            if self._kf_origin is not None:
                self._advance_kalman(now)
            raw = self._kf_x if self._kf_x is not None else 0.0
        else:
            w = self.estimator.seconds
            events = self._events
            while events and events[0] <= now - w:
                events.popleft()
            # Spacing-based estimate rather than bare count/window: the count
            # is +-1 depending on phase, and the score's steep response near
            # full rate would turn that jitter into large swings.
            if len(events) >= 2 and events[-1] > events[0]:
                raw = (len(events) - 1) / (events[-1] - events[0])
            else:
                raw = len(events) / w
        if raw > self.f_e:
            self.clamp_count += 1
            return self.f_e
        return max(raw, 0.0)

    def value(self, now: float) -> float | None:
        """Current score, or None before the first observed frame."""
        if not self._seen_any:
            return None
        return fluidity(self.measured_hz(now), self.f_e)
