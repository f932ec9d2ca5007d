"""Single-node micro-benchmark: drive one kind with synthetic frames.

Latency is what the benchmark is after, so replay mode pushes frames
back-to-back instead of pacing them: frame timestamps carry the nominal
rate on the stream clock, wall time measures only compute. Rate health
(F) and volume growth (GF) come out of the same run, F from emission
spacing on the stream clock, GF from declared metadata alone. The
live-adapter mode sends the same frames over a real local socket pair,
paced, to include transport in the measurement.
"""

from __future__ import annotations

import math
import queue
import threading
import time
from dataclasses import dataclass
from typing import Optional, Sequence

from ..errors import ParamError
from ..metadata import NUMERIC_DTYPES, ChannelSpec, StreamMetadata
from ..sources.frames import Frame, frame_bytes
from ..workflow.registry import NodeRegistry, default_registry, instantiate
from .fluidity import fluidity
from .volume import growth_factor

__all__ = ["BenchReport", "bench_node", "report_doc", "format_table"]


@dataclass(frozen=True)
class BenchReport:
    """Outcome of one bench run; byte totals use the wire encoding."""

    kind: str
    n_samples: int
    rate_hz: float
    mean_latency_s: float
    v_in_bytes: int
    v_out_bytes: int
    f: Optional[float]
    gf: Optional[float]
    n_out: int
    mode: str


def report_doc(report: BenchReport) -> dict:
    """JSON-able form, one dict per run (emitted as JSON lines by the CLI)."""
    return {
        "kind": report.kind,
        "n_samples": report.n_samples,
        "rate_hz": report.rate_hz,
        "mean_latency_s": report.mean_latency_s,
        "v_in_bytes": report.v_in_bytes,
        "v_out_bytes": report.v_out_bytes,
        "f": report.f,
        "gf": report.gf,
        "n_out": report.n_out,
        "mode": report.mode,
    }


def format_table(reports: Sequence[BenchReport]) -> str:
    """Aligned human-readable table over several runs."""
    header = ("kind", "n", "rate_hz", "t_mean_us", "V_in_B", "V_out_B", "F", "GF")
    rows = [header]
    for r in reports:
        rows.append((
            r.kind,
            str(r.n_samples),
            f"{r.rate_hz:g}",
            f"{r.mean_latency_s * 1e6:.2f}",
            str(r.v_in_bytes),
            str(r.v_out_bytes),
            "-" if r.f is None else f"{r.f:.3f}",
            "-" if r.gf is None else f"{r.gf:.2f}",
        ))
    widths = [max(len(row[i]) for row in rows) for i in range(len(header))]
    lines = []
    for k, row in enumerate(rows):
        lines.append("  ".join(cell.rjust(w) for cell, w in zip(row, widths)))
        if k == 0:
            lines.append("  ".join("-" * w for w in widths))
    return "\n".join(lines)


def _bench_frames(metadata: StreamMetadata, n: int) -> list:
    """Deterministic synthetic input: per-channel sinusoids, no RNG.

    Amplitude is large enough that velocity-style thresholds see both
    sides of their cut, so label-emitting kinds do real work.
    """
    frames = []
    integer = [c.dtype.startswith("i") for c in metadata.channels]
    k_channels = len(metadata.channels)
    for k in range(n):
        t = k / metadata.frequency_hz
        values = []
        for i in range(k_channels):
            v = 200.0 * math.sin(2 * math.pi * 0.4 * t + i)
            values.append(int(round(v)) if integer[i] else v)
        frames.append(Frame(stream_id=metadata.stream_id, seq=k, t=t,
                            values=tuple(values)))
    return frames


def _observed_total_rate(emitted_by_port: dict) -> Optional[float]:
    """Sum of per-port spacing rates; None until any port has a spacing."""
    rates = []
    for frames in emitted_by_port.values():
        if len(frames) >= 2:
            span = frames[-1].t - frames[0].t
            rates.append(float("inf") if span <= 0 else (len(frames) - 1) / span)
    if not rates:
        return None
    return sum(rates)


def bench_node(kind_name: str, params: Optional[dict] = None, *,
               n_samples: int = 10_000, rate_hz: float = 50.0,
               mode: str = "replay",
               dtype: str = "f32", channels: Sequence[str] = ("vx", "vy"),
               registry: Optional[NodeRegistry] = None) -> BenchReport:
    """Measure one node kind under synthetic load.

    Parameters
    ----------
    kind_name : str
        Registered kind to drive; must take exactly one input port.
    params : dict, optional
        Node parameters.
    n_samples : int
        Frames to push.
    rate_hz : float
        Nominal input rate. Stamped on frame timestamps in both modes;
        only live-adapter mode paces wall-clock delivery to it.
    mode : {"replay", "live-adapter"}
        replay pushes frames directly; live-adapter routes them through
        a loopback socket outlet first.
    dtype, channels
        Shape of the synthetic input stream.
    """
    if mode not in ("replay", "live-adapter"):
        raise ParamError(f"unknown bench mode {mode!r}")
    if n_samples <= 0:
        raise ParamError(f"n_samples must be positive, got {n_samples}")
    if dtype not in NUMERIC_DTYPES:
        raise ParamError(f"bench feeds numeric samples; {dtype!r} is not numeric")
    registry = registry or default_registry()
    kind = registry.get(kind_name)
    params = dict(params or {})
    inputs, _ = kind.ports(params)
    if len(inputs) != 1:
        raise ParamError(
            f"bench drives single-input kinds; {kind_name!r} takes {list(inputs)}"
        )
    in_port = inputs[0]

    metadata = StreamMetadata(
        stream_id="bench/in",
        name="bench input",
        frequency_hz=rate_hz,
        channels=tuple(ChannelSpec(name=c, dtype=dtype) for c in channels),
    )
    instance, out_streams = instantiate(kind, params, {in_port: metadata})
    frames = _bench_frames(metadata, n_samples)

    if mode == "live-adapter":
        inbound = _through_loopback(metadata, frames, rate_hz)
    else:
        inbound = frames

    emitted_by_port: dict = {port: [] for port in out_streams}
    busy = 0.0
    processed = 0
    for frame in inbound:
        t0 = time.perf_counter()
        out = instance.process(in_port, frame)
        busy += time.perf_counter() - t0
        processed += 1
        for port, emitted in out:
            emitted_by_port[port].append(emitted)
    # flushes are an end-of-run artifact: their frames and bytes are real,
    # their cost is not part of the steady-state per-sample latency
    for port, emitted in instance.finish():
        emitted_by_port[port].append(emitted)

    if processed == 0:
        raise ParamError("no samples reached the node (live transport dropped all)")

    v_in = sum(len(frame_bytes(f)) for f in inbound)
    v_out = sum(
        len(frame_bytes(f)) for port_frames in emitted_by_port.values()
        for f in port_frames
    )
    n_out = sum(len(port_frames) for port_frames in emitted_by_port.values())

    f_e = sum(m.frequency_hz for m in out_streams.values())
    f_mu = _observed_total_rate(emitted_by_port)
    f_score = None if f_mu is None else fluidity(f_mu, f_e)
    gf = growth_factor(
        [metadata], list(out_streams.values()),
        data_dependent=kind.volume_data_dependent,
    )

    return BenchReport(
        kind=kind_name,
        n_samples=processed,
        rate_hz=rate_hz,
        mean_latency_s=busy / processed,
        v_in_bytes=v_in,
        v_out_bytes=v_out,
        f=f_score,
        gf=gf,
        n_out=n_out,
        mode=mode,
    )


def _through_loopback(metadata: StreamMetadata, frames: list,
                      rate_hz: float) -> list:
    """Send frames through a local outlet/source pair, paced; return arrivals."""
    from ..live import LiveAdvertisement, LiveOutlet, LiveSource

    with LiveOutlet(metadata, host="127.0.0.1", beacon=False) as outlet:
        advert = LiveAdvertisement(
            metadata=metadata, host="127.0.0.1", port=outlet.port,
            last_seen=time.monotonic(),
        )
        handle = LiveSource(advert)
        handle.start()
        sub = handle.subscribe(maxsize=len(frames) + 16)
        try:
            deadline = time.monotonic() + 5.0
            while outlet.client_count() == 0:
                if time.monotonic() > deadline:
                    raise ParamError("bench outlet saw no connection")
                time.sleep(0.005)

            def pump():
                epoch = time.monotonic()
                for k, frame in enumerate(frames):
                    while time.monotonic() < epoch + k / rate_hz:
                        time.sleep(0.0005)
                    outlet.push(frame)

            producer = threading.Thread(target=pump, daemon=True)
            producer.start()
            arrived = []
            while len(arrived) < len(frames):
                try:
                    item = sub.get(timeout=10.0)
                except queue.Empty:
                    break
                if not isinstance(item, Frame):
                    break  # end or transport error: keep what arrived
                arrived.append(item)
            producer.join()
        finally:
            handle.close()
    return arrived
