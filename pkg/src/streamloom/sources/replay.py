"""Replaying stored CSV streams at their recorded frequency.

The whole file is parsed into memory before playback begins, so pacing
accuracy is never at the mercy of disk latency. Timestamps come from a
literal `t` column (seconds) when the file has one; otherwise row index
over the declared frequency.
"""

from __future__ import annotations

import csv
from bisect import bisect_left
from typing import Optional

from ..errors import FormatError
from ..metadata import ChannelSpec, ResolvedStream
from .frames import Frame
from .handle import SourceHandle

__all__ = ["ReplaySource", "open_replay", "load_csv_rows"]

TIME_COLUMN = "t"

_TRUE = frozenset({"1", "true", "yes"})
_FALSE = frozenset({"0", "false", "no"})


def _parse_cell(channel: ChannelSpec, text: str, where: str):
    try:
        if channel.dtype in ("f32", "f64"):
            return float(text)
        if channel.dtype == "bool":
            lowered = text.strip().lower()
            if lowered in _TRUE:
                return True
            if lowered in _FALSE:
                return False
            raise ValueError(text)
        if channel.dtype == "label":
            return text
        return int(float(text))  # integer channels tolerate "3.0"
    except ValueError:
        raise FormatError(
            f"{where}: cannot parse {text!r} as {channel.dtype} "
            f"for channel {channel.name!r}"
        ) from None


def load_csv_rows(resolved: ResolvedStream):
    """Parse the resolved CSV into (times, rows) fully in memory.

    times is None when the file has no `t` column; rows are tuples in the
    stream's channel order with dtype-coerced values.
    """
    meta = resolved.metadata
    path = resolved.locator.path
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        columns = [resolved.locator.column_for(c.name) for c in meta.channels]
        missing = [col for col in columns if col not in header]
        if missing:
            raise FormatError(f"{path}: missing columns {missing}")
        has_time = TIME_COLUMN in header
        times: Optional[list] = [] if has_time else None
        rows = []
        for lineno, record in enumerate(reader, start=2):
            where = f"{path}:{lineno}"
            if has_time:
                try:
                    tick = float(record[TIME_COLUMN])
                except (TypeError, ValueError):
                    raise FormatError(
                        f"{where}: cannot parse time {record[TIME_COLUMN]!r}"
                    ) from None
                if times and tick < times[-1]:
                    raise FormatError(f"{where}: time column must be non-decreasing")
                times.append(tick)
            rows.append(
                tuple(
                    _parse_cell(ch, record[col], where)
                    for ch, col in zip(meta.channels, columns)
                )
            )
    return times, rows


class ReplaySource(SourceHandle):
    mode = "replay"

    def __init__(self, resolved: ResolvedStream, rate_multiplier: float = 1.0):
        super().__init__(resolved.metadata, rate_multiplier)
        self.resolved = resolved
        times, rows = load_csv_rows(resolved)
        if times is None:
            times = [i / resolved.metadata.frequency_hz for i in range(len(rows))]
        self._times = times
        self._rows = rows
        self._idx = 0

    def __len__(self) -> int:
        return len(self._rows)

    def _next_frame(self) -> Optional[Frame]:
        if self._idx >= len(self._rows):
            return None
        t, values = self._times[self._idx], self._rows[self._idx]
        self._idx += 1
        return self._emit(t, values)

    def _seek_to(self, t: float) -> None:
        # first sample with data-time >= t
        self._idx = bisect_left(self._times, t)


def open_replay(resolved: ResolvedStream, rate_multiplier: float = 1.0) -> ReplaySource:
    """Open a resolved stored stream for paced playback.

    The returned handle is idle; `start()` begins emission at
    frequency_hz * rate_multiplier frames per wall-clock second.
    """
    return ReplaySource(resolved, rate_multiplier)
