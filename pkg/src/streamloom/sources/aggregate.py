"""Frequency-aware merging of several streams onto one clock.

The merged stream ticks with the highest-nominal-frequency input; every
other input contributes its most recent value (zero-order hold). A
contribution older than `window` seconds of stream time is withheld and
its channels carry None, so consumers can tell "slow by design" from
"stalled". Channels are namespaced `stream_id/channel` since inputs may
share channel names.
"""

from __future__ import annotations

import heapq
import threading
from typing import Iterable, Optional, Sequence

from ..errors import ParamError
from ..metadata import ChannelSpec, StreamMetadata
from .frames import EndOfStream, Frame, StreamError
from .handle import SourceHandle, Subscription

__all__ = ["merged_metadata", "Merger", "merge_iterables", "aggregate"]


def merged_metadata(inputs: Sequence[StreamMetadata]) -> StreamMetadata:
    """Metadata of the merge: fastest clock, all channels namespaced."""
    if not inputs:
        raise ParamError("aggregate requires at least one input")
    if len(inputs) == 1:
        return inputs[0]
    channels = tuple(
        ChannelSpec(name=f"{m.stream_id}/{c.name}", dtype=c.dtype, unit=c.unit)
        for m in inputs
        for c in m.channels
    )
    return StreamMetadata(
        stream_id="merged:" + "+".join(m.stream_id for m in inputs),
        name="merged",
        frequency_hz=max(m.frequency_hz for m in inputs),
        channels=channels,
    )


class Merger:
    """Order-driven merge core: feed frames, collect merged emissions.

    Pass-through when there is a single input. Staleness is measured in
    stream time (difference of frame timestamps), so the behavior is
    identical under pacing and under deterministic iteration.
    """

    def __init__(self, inputs: Sequence[StreamMetadata], window: float):
        if window <= 0:
            raise ParamError(f"window must be positive, got {window}")
        self.inputs = tuple(inputs)
        self.metadata = merged_metadata(inputs)
        self.window = window
        freqs = [m.frequency_hz for m in inputs]
        self.clock_index = freqs.index(max(freqs))
        self._held: list[Optional[tuple]] = [None] * len(inputs)
        self._held_t: list[Optional[float]] = [None] * len(inputs)
        self._seq = 0

    def feed(self, index: int, frame: Frame) -> Optional[Frame]:
        """Account one input frame; return a merged frame on clock ticks."""
        if len(self.inputs) == 1:
            return frame
        self._held[index] = frame.values
        self._held_t[index] = frame.t
        if index != self.clock_index:
            return None
        now = frame.t
        values: list = []
        for i, meta in enumerate(self.inputs):
            held, held_t = self._held[i], self._held_t[i]
            fresh = held_t is not None and now - held_t <= self.window
            values.extend(held if fresh else (None,) * len(meta.channels))
        merged = Frame(
            stream_id=self.metadata.stream_id,
            seq=self._seq,
            t=now,
            values=tuple(values),
        )
        self._seq += 1
        return merged


def merge_iterables(
    inputs: Sequence[tuple[StreamMetadata, Iterable[Frame]]],
    window: float,
) -> Iterable[Frame]:
    """Deterministically merge already-ordered frame iterables.

    Frames are consumed in (t, input) order; at equal timestamps the clock
    input is processed last so simultaneous slow-input values are visible
    in the merged frame of that instant.
    """
    merger = Merger([meta for meta, _ in inputs], window)

    def keyed(index, frames):
        clock = index == merger.clock_index
        for frame in frames:
            yield (frame.t, clock, index), frame

    streams = [keyed(i, frames) for i, (_, frames) in enumerate(inputs)]
    for (t, clock, index), frame in heapq.merge(*streams, key=lambda item: item[0]):
        out = merger.feed(index, frame)
        if out is not None:
            yield out


class AggregatedStream:
    """Paced merge of live handles; consumed through `subscribe`.

    A pump thread per input forwards frames into the shared merger in
    arrival order. Ends when every input has ended.
    """

    def __init__(self, handles: Sequence[SourceHandle], window: float):
        self.handles = tuple(handles)
        self.merger = Merger([h.metadata for h in handles], window)
        self.metadata = self.merger.metadata
        self._lock = threading.Lock()
        self._subs: list[Subscription] = []
        self._live = any(h.mode == "live" for h in handles)
        self._open = len(handles)
        self._threads: list[threading.Thread] = []
        self._started = False

    def subscribe(self, maxsize: int = 256) -> Subscription:
        sub = Subscription(self.metadata.stream_id, maxsize)
        with self._lock:
            self._subs.append(sub)
        return sub

    def start(self) -> None:
        with self._lock:
            if self._started:
                return
            self._started = True
        for i, handle in enumerate(self.handles):
            upstream = handle.subscribe()
            thread = threading.Thread(
                target=self._pump, args=(i, upstream), daemon=True,
                name=f"aggregate:{handle.metadata.stream_id}",
            )
            self._threads.append(thread)
            thread.start()
        for handle in self.handles:
            if handle.state == "idle":
                handle.start()

    def _pump(self, index: int, upstream: Subscription) -> None:
        while True:
            item = upstream.get()
            if isinstance(item, EndOfStream):
                with self._lock:
                    self._open -= 1
                    done = self._open == 0
                if done:
                    self._emit(EndOfStream(self.metadata.stream_id))
                return
            if isinstance(item, StreamError):
                self._emit(StreamError(self.metadata.stream_id, item.message))
                continue
            with self._lock:
                merged = self.merger.feed(index, item)
            if merged is not None:
                self._emit(merged)

    def _emit(self, item) -> None:
        with self._lock:
            subs = list(self._subs)
        for sub in subs:
            if self._live:
                sub._push_dropping(item)
            else:
                sub._push_blocking(item)


def aggregate(handles: Sequence[SourceHandle], window: float) -> AggregatedStream:
    """Merge several source handles onto the fastest input's clock.

    The returned stream is idle until `start()`, which also starts any
    still-idle inputs.
    """
    if not handles:
        raise ParamError("aggregate requires at least one input")
    return AggregatedStream(handles, window)
