"""Source lifecycle, subscriptions, and wall-clock pacing.

A SourceHandle owns one producer thread that emits Frames to every
subscriber queue. The state machine is deliberately small:

    idle -> playing <-> paused
            playing -> ended
            paused  -> ended

Pacing uses absolute deadlines (epoch + k / rate) rather than relative
sleeps so scheduling jitter does not accumulate as drift. Pause and seek
re-anchor the epoch, so a paused interval never causes a catch-up burst.

Backpressure: when a subscriber queue is full, replayed and simulated
producers block (every frame matters more than freshness); live producers
drop the oldest queued frame and count the drop (freshness matters more).
"""

from __future__ import annotations

import queue
import threading
import time
from typing import Iterator, Optional

from ..errors import IllegalTransition, InvariantError, ParamError, UnsupportedInLive
from ..metadata import StreamMetadata
from .frames import EndOfStream, Frame, StreamError

__all__ = ["Subscription", "SourceHandle", "control", "CONTROL_ACTIONS"]

CONTROL_ACTIONS = ("start", "stop", "pause", "resume", "seek")


class Subscription:
    """Bounded, ordered queue of Frames and terminal events for one consumer."""

    def __init__(self, stream_id: str, maxsize: int = 256):
        self.stream_id = stream_id
        self._q: queue.Queue = queue.Queue(maxsize)
        self.drops = 0  # frames discarded under live backpressure
        self._closed = False

    def get(self, timeout: Optional[float] = None):
        """Next item: a Frame, EndOfStream, or StreamError. Raises queue.Empty."""
        return self._q.get(timeout=timeout)

    def __iter__(self) -> Iterator[Frame]:
        """Yield Frames until the stream ends; raise on stream error."""
        from ..errors import ConnectionLost

        while True:
            item = self._q.get()
            if isinstance(item, EndOfStream):
                return
            if isinstance(item, StreamError):
                raise ConnectionLost(item.message)
            yield item

    # producer side

    def _push_blocking(self, item) -> None:
        self._q.put(item)

    def _push_dropping(self, item) -> None:
        while True:
            try:
                self._q.put_nowait(item)
                return
            except queue.Full:
                try:
                    self._q.get_nowait()
                    self.drops += 1
                except queue.Empty:
                    pass


class SourceHandle:
    """Base for all source modes; subclasses supply `_next_frame`."""

    mode = "replay"  # overridden per subclass

    def __init__(self, metadata: StreamMetadata, rate_multiplier: float = 1.0):
        if rate_multiplier <= 0:
            raise ParamError(f"rate_multiplier must be positive, got {rate_multiplier}")
        self.metadata = metadata
        self.rate_multiplier = rate_multiplier
        self._state = "idle"
        self._cursor = 0.0
        self._seq = 0
        self._lock = threading.RLock()
        self._cond = threading.Condition(self._lock)
        self._subs: list[Subscription] = []
        self._thread: Optional[threading.Thread] = None
        self._pull_taken = False

    # introspection

    @property
    def state(self) -> str:
        with self._lock:
            return self._state

    @property
    def cursor(self) -> float:
        """Current position in stream time (seconds); replay/simulate only."""
        with self._lock:
            return self._cursor

    @property
    def interval(self) -> float:
        """Paced wall-clock spacing between frames."""
        return 1.0 / (self.metadata.frequency_hz * self.rate_multiplier)

    # subscriptions

    def subscribe(self, maxsize: int = 256) -> Subscription:
        sub = Subscription(self.metadata.stream_id, maxsize)
        with self._lock:
            if self._state == "ended":
                sub._push_blocking(EndOfStream(self.metadata.stream_id))
            self._subs.append(sub)
        return sub

    def unsubscribe(self, sub: Subscription) -> None:
        with self._lock:
            if sub in self._subs:
                self._subs.remove(sub)

    # control verbs

    def start(self) -> None:
        with self._cond:
            if self._pull_taken:
                raise InvariantError("handle already consumed via frames()")
            if self._state != "idle":
                raise IllegalTransition(self._state, "start")
            self._state = "playing"
            self._thread = threading.Thread(
                target=self._run, name=f"source:{self.metadata.stream_id}", daemon=True
            )
            self._thread.start()

    def stop(self) -> None:
        with self._cond:
            if self._state not in ("playing", "paused"):
                raise IllegalTransition(self._state, "stop")
            self._state = "ended"
            self._cond.notify_all()
        self._deliver_all(EndOfStream(self.metadata.stream_id, "stopped"))

    def pause(self) -> None:
        self._require_seekable("pause")
        with self._cond:
            if self._state != "playing":
                raise IllegalTransition(self._state, "pause")
            self._state = "paused"
            self._cond.notify_all()

    def resume(self) -> None:
        self._require_seekable("resume")
        with self._cond:
            if self._state != "paused":
                raise IllegalTransition(self._state, "resume")
            self._state = "playing"
            self._cond.notify_all()

    def seek(self, t: float) -> None:
        self._require_seekable("seek")
        if t < 0:
            raise ParamError(f"seek target must be >= 0, got {t}")
        with self._cond:
            if self._state == "ended":
                raise IllegalTransition(self._state, "seek")
            self._seek_to(t)
            self._cursor = t
            self._cond.notify_all()

    def _require_seekable(self, action: str) -> None:
        if self.mode == "live":
            raise UnsupportedInLive(f"{action} is not available on live streams")

    def close(self) -> None:
        """Idempotent teardown; safe in any state."""
        with self._cond:
            already = self._state == "ended"
            self._state = "ended"
            self._cond.notify_all()
        if not already:
            self._deliver_all(EndOfStream(self.metadata.stream_id, "closed"))

    # deterministic pull route (no pacing, no thread)

    def frames(self) -> Iterator[Frame]:
        """Unpaced frame iterator for deterministic processing.

        Mutually exclusive with the paced subscribe/start route: one handle
        is consumed through exactly one of the two.
        """
        if self.mode == "live":
            raise UnsupportedInLive("live streams cannot be iterated unpaced")
        with self._lock:
            if self._state != "idle":
                raise InvariantError(
                    "frames() requires an idle handle; this one was started"
                )
            self._pull_taken = True

        def generate():
            while True:
                with self._lock:
                    frame = self._next_frame()
                if frame is None:
                    return
                yield frame

        return generate()

    # producer internals

    def _next_frame(self) -> Optional[Frame]:
        """Produce the next frame and advance cursor/seq; None when exhausted."""
        raise NotImplementedError

    def _seek_to(self, t: float) -> None:
        """Reposition the production cursor to the first sample with time >= t."""
        raise NotImplementedError

    def _deliver(self, frame: Frame) -> None:
        with self._lock:
            subs = list(self._subs)
        if self.mode == "live":
            for sub in subs:
                sub._push_dropping(frame)
        else:
            for sub in subs:
                sub._push_blocking(frame)

    def _deliver_all(self, event) -> None:
        with self._lock:
            subs = list(self._subs)
        for sub in subs:
            sub._push_blocking(event)

    def _run(self) -> None:
        try:
            anchor = time.monotonic()
            k = 0
            interval = self.interval
            while True:
                with self._cond:
                    reanchor = False
                    while self._state == "paused":
                        self._cond.wait()
                        reanchor = True
                    if self._state == "ended":
                        return
                    frame = self._next_frame()
                    if frame is None:
                        self._state = "ended"
                        break
                if reanchor:
                    anchor = time.monotonic()
                    k = 0
                deadline = anchor + k * interval
                delay = deadline - time.monotonic()
                if delay > 0:
                    time.sleep(delay)
                k += 1
                self._deliver(frame)
            self._deliver_all(EndOfStream(self.metadata.stream_id))
        except Exception as exc:  # propagate in-band, never kill silently
            with self._cond:
                self._state = "ended"
            self._deliver_all(StreamError(self.metadata.stream_id, str(exc)))

    def _emit(self, t: float, values: tuple) -> Frame:
        """Build the next frame; callers hold the lock."""
        frame = Frame(
            stream_id=self.metadata.stream_id, seq=self._seq, t=t, values=values
        )
        self._seq += 1
        self._cursor = t
        return frame


def control(handle: SourceHandle, action: str, t: Optional[float] = None) -> str:
    """Apply one control verb by name and return the resulting state."""
    if action not in CONTROL_ACTIONS:
        raise ParamError(f"unknown control action {action!r}")
    if action == "seek":
        if t is None:
            raise ParamError("seek requires a target time")
        handle.seek(t)
    else:
        getattr(handle, action)()
    return handle.state
