"""Runtime health heuristics: rate fluidity, volume growth, node benchmarks."""

from .bench import BenchReport, bench_node, format_table, report_doc
from .fluidity import (
    FluidityState,
    KalmanEstimator,
    WindowEstimator,
    estimate_frequency,
    fluidity,
)
from .stats import node_health, observed_rate, stats_snapshot
from .volume import (
    COMPRESSION,
    EXPANSION,
    NEUTRAL,
    VolumeProfile,
    classify_growth,
    growth_factor,
    volume_profile,
)

__all__ = [
    "fluidity",
    "estimate_frequency",
    "WindowEstimator",
    "KalmanEstimator",
    "FluidityState",
    "VolumeProfile",
    "volume_profile",
    "growth_factor",
    "classify_growth",
    "COMPRESSION",
    "EXPANSION",
    "NEUTRAL",
    "BenchReport",
    "bench_node",
    "report_doc",
    "format_table",
    "observed_rate",
    "node_health",
    "stats_snapshot",
]
