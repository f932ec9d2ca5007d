"""Replay a recorded stream at its native rate, then faster.

Replay paces frames so the wall-clock interval matches
1 / (frequency_hz * rate_multiplier); the data is preloaded so pacing is
not at the mercy of disk I/O. Frame timestamps stay in stream time
regardless of the multiplier.
"""

import itertools
import time
from pathlib import Path

from streamloom import StreamQuery, discover_datasets, resolve
from streamloom.sources import open_replay

ROOT = Path(__file__).parent.parent / "datasets"

gaze = next(ds for ds in discover_datasets(ROOT)
            if ds.dataset_id == "synthetic-gaze")
resolved = resolve(gaze, StreamQuery("synthetic-gaze",
                                     attributes={"subject": "s01",
                                                 "task": "scan"}))[0]

for multiplier in (1.0, 5.0):
    handle = open_replay(resolved, rate_multiplier=multiplier)
    sub = handle.subscribe()
    t0 = time.perf_counter()
    handle.start()
    frames = list(itertools.islice(iter(sub), 100))
    elapsed = time.perf_counter() - t0
    handle.close()
    expected = 100 / (resolved.metadata.frequency_hz * multiplier)
    print(f"multiplier {multiplier:>3g}: {len(frames)} frames in "
          f"{elapsed:.3f} s wall (expected ~{expected:.3f} s), "
          f"stream time {frames[0].t:g} .. {frames[-1].t:g} s")
