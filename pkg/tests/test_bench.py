"""Node micro-benchmarks and run-health snapshots."""

import copy
import json
import time

import pytest

from streamloom import ParamError, load_workflow, run_workflow
from streamloom.heuristics import (
    bench_node,
    format_table,
    node_health,
    observed_rate,
    report_doc,
    stats_snapshot,
)
from streamloom.metadata import ChannelSpec, StreamMetadata
from streamloom.sources.frames import Frame, frame_bytes
from streamloom.workflow import NodeCounters


def make_meta(freq=50.0, dtypes=("f32", "f32"), names=("x", "y")):
    return StreamMetadata(
        stream_id="g", name="g", frequency_hz=freq,
        channels=tuple(ChannelSpec(n, d) for n, d in zip(names, dtypes)),
    )


def make_frames(n, freq=50.0, values=(0.5, 0.5)):
    return [Frame("g", k, k / freq, values) for k in range(n)]


class TestBenchNode:
    def test_mean_stride_fifty_keeps_up(self):
        r = bench_node("mean", {"window": 50, "stride": 50},
                       n_samples=10_000, rate_hz=50.0)
        assert r.n_samples == 10_000
        assert r.n_out == 200
        assert abs(r.f - 1.0) <= 0.01
        assert abs(r.gf - 0.02) < 1e-9

    def test_differentiate_widens_int_input(self):
        r = bench_node("differentiate", n_samples=2_000, rate_hz=50.0,
                       dtype="i32")
        assert abs(r.gf - 2.0) < 1e-9
        assert abs(r.f - 1.0) <= 0.01

    def test_smooth_volume_neutral(self):
        r = bench_node("smooth", {"cutoff_hz": 5.0}, n_samples=2_000)
        assert r.gf == 1.0
        assert r.n_out == r.n_samples

    def test_label_rate_has_no_growth_factor(self):
        r = bench_node("ivt_threshold", n_samples=2_000)
        assert r.gf is None
        assert r.f is not None

    def test_throttled_node_reads_point_two(self):
        # capped at 30 out/s against a declared 50 Hz: the 3-4-5 triple
        r = bench_node("throttle", {"rate_hz": 30.0},
                       n_samples=5_000, rate_hz=50.0)
        assert abs(r.f - 0.2) <= 0.02

    def test_latency_ordering_by_compute_demand(self):
        # best of three: a loaded machine can flip the close pairs
        t0 = time.perf_counter()
        lat = {}
        for kind, params, kw in [
            ("mean", {"window": 50, "stride": 50}, {}),
            ("ivt_threshold", {}, {}),
            ("differentiate", {}, {"dtype": "i32"}),
            ("smooth", {"cutoff_hz": 5.0}, {}),
        ]:
            lat[kind] = min(
                bench_node(kind, params, n_samples=10_000, rate_hz=50.0,
                           **kw).mean_latency_s
                for _ in range(3)
            )
        elapsed = time.perf_counter() - t0
        assert elapsed < 30.0  # unpaced: nominal span would be 200 s each
        assert (lat["mean"] < lat["ivt_threshold"]
                < lat["differentiate"] < lat["smooth"])

    def test_unpaced_timestamps_carry_nominal_rate(self):
        r = bench_node("smooth", {"cutoff_hz": 5.0},
                       n_samples=1_000, rate_hz=200.0)
        # stream clock says 5 s of data regardless of wall time
        assert r.rate_hz == 200.0
        assert r.f == 1.0

    def test_live_adapter_round_trip(self):
        r = bench_node("smooth", {"cutoff_hz": 5.0},
                       n_samples=60, rate_hz=120.0, mode="live-adapter")
        assert r.mode == "live-adapter"
        assert r.n_samples == 60
        assert r.n_out == 60
        assert r.f is not None

    def test_validation(self):
        with pytest.raises(ParamError, match="mode"):
            bench_node("smooth", mode="turbo")
        with pytest.raises(ParamError, match="positive"):
            bench_node("smooth", n_samples=0)
        with pytest.raises(ParamError, match="numeric"):
            bench_node("smooth", dtype="label")
        with pytest.raises(ParamError, match="single-input"):
            bench_node("join", {"select": {"x": "a/x"}, "inputs": ["a", "b"]})

    def test_report_doc_is_json_ready(self):
        r = bench_node("mean", {"window": 10, "stride": 10}, n_samples=100)
        doc = json.loads(json.dumps(report_doc(r)))
        assert doc["kind"] == "mean"
        assert doc["n_samples"] == 100
        assert doc["v_in_bytes"] > 0

    def test_table_has_one_row_per_report(self):
        rs = [bench_node("mean", {"window": 10, "stride": 10}, n_samples=100),
              bench_node("ivt_threshold", n_samples=100)]
        table = format_table(rs)
        lines = table.splitlines()
        assert len(lines) == 2 + len(rs)
        assert "kind" in lines[0] and "GF" in lines[0]
        assert "ivt_threshold" in table


class TestObservedRate:
    def counters(self, out_ts):
        c = NodeCounters("n", "k")
        for t in out_ts:
            c.saw_output("out", Frame("s", 0, t, (1.0,)))
        return c

    def test_warmup_is_undefined(self):
        assert observed_rate(self.counters([])) is None
        assert observed_rate(self.counters([0.0])) is None

    def test_spacing_estimate(self):
        rate = observed_rate(self.counters([0.0, 0.02, 0.04, 0.06]))
        assert abs(rate - 50.0) < 1e-9

    def test_burst_at_one_instant_clamps_full(self):
        c = self.counters([1.0, 1.0, 1.0])
        assert observed_rate(c) == float("inf")
        assert node_health(c, 50.0, None)["f"] == 1.0


class TestNodeHealth:
    def test_idle_row(self):
        row = node_health(NodeCounters("n", "k"), 50.0, 1.0)
        assert row["f"] is None
        assert row["mean_latency_s"] is None
        assert row["frames_in"] == row["frames_out"] == 0
        assert row["v_in_bytes"] == row["v_out_bytes"] == 0


def snapshot_workflow():
    doc = {
        "name": "snap",
        "nodes": [
            {"node_id": "s1", "kind": "smooth", "params": {"cutoff_hz": 5.0}},
            {"node_id": "m1", "kind": "mean", "params": {"window": 10, "stride": 10}},
        ],
        "connectors": [{"from": "s1.out", "to": "m1.in"}],
        "sources": {"s1.in": "gaze"},
        "sinks": {"out": "m1.out"},
    }
    return load_workflow(json.dumps(doc).encode())


class TestStatsSnapshot:
    def test_idle_run_is_all_undefined(self):
        result = run_workflow(snapshot_workflow(), {"s1.in": (make_meta(), [])})
        snap = stats_snapshot(result)
        for row in snap["nodes"].values():
            assert row["f"] is None
            assert row["frames_in"] == 0
            assert row["v_in_bytes"] == 0

    def test_inbound_bytes_match_offline_recount(self):
        frames = make_frames(500)
        result = run_workflow(snapshot_workflow(),
                              {"s1.in": (make_meta(), frames)})
        snap = stats_snapshot(result)
        assert snap["nodes"]["s1"]["v_in_bytes"] == sum(
            len(frame_bytes(f)) for f in frames
        )
        assert snap["nodes"]["s1"]["frames_in"] == 500

    def test_growth_mirrors_declarations(self):
        result = run_workflow(snapshot_workflow(),
                              {"s1.in": (make_meta(), make_frames(100))})
        snap = stats_snapshot(result)
        assert snap["nodes"]["s1"]["gf"] == 1.0
        assert abs(snap["nodes"]["m1"]["gf"] - 0.1) < 1e-12

    def test_snapshot_is_pure(self):
        result = run_workflow(snapshot_workflow(),
                              {"s1.in": (make_meta(), make_frames(100))})
        first = copy.deepcopy(stats_snapshot(result))
        assert stats_snapshot(result) == first

    def test_snapshot_serializes(self):
        result = run_workflow(snapshot_workflow(),
                              {"s1.in": (make_meta(), make_frames(100))})
        blob = json.dumps(stats_snapshot(result))
        assert json.loads(blob)["nodes"]["m1"]["frames_out"] == 10
