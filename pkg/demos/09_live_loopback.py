"""Proxy a live sensor over the loopback network.

A synthetic device advertises itself with a multicast beacon and serves
frames over TCP, exactly like real hardware would. We discover it, open
a live handle, and read a second of gaze at its native 50 Hz. Live
streams accept start/stop only: there is no recorded past to pause
inside or seek through.
"""

import itertools
import time

from streamloom.errors import UnsupportedInLive
from streamloom.live import SyntheticDevice, discover_advertisements, open_live

with SyntheticDevice(beacon_interval=0.2).start() as device:
    found = discover_advertisements(2.0)
    print("discovered outlets:",
          [(a.metadata.name, f"{a.metadata.frequency_hz:g} Hz") for a in found])

    handle = open_live("synthetic-gaze")
    sub = handle.subscribe()
    handle.start()
    t0 = time.perf_counter()
    frames = list(itertools.islice(iter(sub), 50))
    elapsed = time.perf_counter() - t0
    print(f"read {len(frames)} live frames in {elapsed:.2f} s "
          f"(~{len(frames) / elapsed:.0f} Hz)")
    print(f"latest gaze point: ({frames[-1].values[0]:.3f}, "
          f"{frames[-1].values[1]:.3f})")

    try:
        handle.pause()
    except UnsupportedInLive as exc:
        print(f"pause on a live stream: {exc}")
    handle.close()
