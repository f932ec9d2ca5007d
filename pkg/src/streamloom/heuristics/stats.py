"""Point-in-time health snapshots of a running or finished workflow.

One snapshot entry per node: rate health (F), declared volume growth
(GF), mean per-call latency, and raw byte/frame counters. The snapshot
is a pure function of the counters and declared metadata, so two
snapshots with no traffic in between are identical. Encoded as plain
JSON-able dicts; this is the payload the stats endpoint serves.
"""

from __future__ import annotations

from typing import Mapping, Optional

from ..workflow.runner import NodeCounters, RunResult
from .fluidity import fluidity
from .volume import growth_factor

__all__ = ["observed_rate", "node_health", "stats_snapshot"]


def observed_rate(counters: NodeCounters) -> Optional[float]:
    """Output rate estimate on the stream clock, or None while warming up.

    Uses emission spacing, not count/elapsed: with fewer than two frames
    there is no spacing to measure, so the rate (and any score built on
    it) stays undefined instead of reading as stalled.
    """
    n = counters.total_out()
    if n < 2:
        return None
    span = counters.last_out_t - counters.first_out_t
    if span <= 0:
        return float("inf")  # burst at one instant; clamps to full rate
    return (n - 1) / span


def node_health(counters: NodeCounters, f_e: Optional[float],
                gf: Optional[float]) -> dict:
    """One snapshot row. `f_e` is the node's declared total output rate."""
    rate = observed_rate(counters)
    if rate is None or f_e is None:
        f = None
    else:
        f = fluidity(rate, f_e)
    latency = counters.busy_seconds / counters.calls if counters.calls else None
    return {
        "kind": counters.kind,
        "f": f,
        "gf": gf,
        "mean_latency_s": latency,
        "v_in_bytes": counters.bytes_in,
        "v_out_bytes": counters.bytes_out,
        "frames_in": counters.total_in(),
        "frames_out": counters.total_out(),
        "errors": counters.errors,
    }


def _declared_output_rate(runtime) -> float:
    # ports of one node share a clock only nominally; the aggregate
    # declared rate pairs with the aggregate observed rate above
    return sum(m.stream.frequency_hz for m in runtime.out_metadata.values())


def _node_growth(runtime) -> Optional[float]:
    if runtime.kind.volume_data_dependent or runtime.kind.transparent:
        return None if runtime.kind.volume_data_dependent else 1.0
    return growth_factor(
        [m.stream for m in runtime.in_metadata.values()],
        [m.stream for m in runtime.out_metadata.values()],
    )


def stats_snapshot(result: RunResult) -> dict:
    """Per-node health map for a workflow run: {"nodes": {node_id: row}}.

    Idle nodes report F as None (unknown), never 0: an undriven pipeline
    is not a bottleneck.
    """
    if result.plan is None:
        raise ValueError("run result carries no plan; snapshot needs one")
    nodes = {}
    for node_id, counters in result.node_stats.items():
        runtime = result.plan.nodes[node_id]
        nodes[node_id] = node_health(
            counters, _declared_output_rate(runtime), _node_growth(runtime)
        )
    return {"nodes": nodes}
