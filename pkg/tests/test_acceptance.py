"""Acceptance gate: the headline behaviors, one test and one verdict line each.

Every test prints a single [PASS]/[FAIL] line (visible with `pytest -s`
or on failure) and asserts the same condition, so the suite doubles as a
checklist. Oracles here are deliberately independent of the library
internals: high-precision arithmetic, brute-force reimplementations, and
graph walks.
"""

import itertools
import json
import math
import queue
import random
import time

import numpy as np
from mpmath import mp, mpf, sqrt as mpsqrt

from streamloom import load_workflow, export_workflow, run_workflow
from streamloom.errors import UnsupportedInLive
from streamloom.heuristics import FluidityState, fluidity
from streamloom.heuristics.bench import bench_node
from streamloom.live import SyntheticDevice, open_live
from streamloom.metadata import ChannelSpec, StreamMetadata, StreamQuery, \
    discover_datasets, resolve, serialize_metadata
from streamloom.protocol import ServerCore, messages as pm
from streamloom.protocol.state import ConnectionModel, transition
from streamloom.sources import Frame, open_replay
from streamloom.workflow import WorkflowPlan, default_registry

from test_protocol import write_dataset_tree
from test_workflow import gaze_frames, gaze_meta, provenance_oracle, \
    random_dag_doc

from pathlib import Path

REPO = Path(__file__).parent.parent


def check(name, ok, detail=""):
    print(f"\n[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
    assert ok, f"{name}: {detail}"


def test_growth_factor_table():
    t0 = time.perf_counter()
    mean = bench_node("mean", {"window": 50, "stride": 50},
                      n_samples=10_000, rate_hz=50.0)
    diff = bench_node("differentiate", {}, n_samples=10_000, rate_hz=50.0,
                      dtype="i32")
    smooth = bench_node("smooth", {}, n_samples=10_000, rate_hz=50.0)
    ivt = bench_node("ivt_threshold", {}, n_samples=10_000, rate_hz=50.0)
    elapsed = time.perf_counter() - t0

    problems = []
    if not abs(mean.gf - 0.02) <= 1e-9:
        problems.append(f"mean gf {mean.gf}")
    if not abs(diff.gf - 2.00) <= 1e-9:
        problems.append(f"differentiate gf {diff.gf}")
    if not abs(smooth.gf - 1.00) <= 1e-9:
        problems.append(f"smooth gf {smooth.gf}")
    if ivt.gf is not None:
        problems.append(f"ivt gf {ivt.gf} (expected undefined)")
    if elapsed >= 10.0:
        problems.append(f"took {elapsed:.1f} s")
    check("growth-factor table",
          not problems,
          "; ".join(problems) or
          f"mean 0.02, differentiate 2.00, smooth 1.00, "
          f"ivt undefined ({elapsed:.1f} s at 10^4 samples)")


def test_fluidity_closed_form():
    rng = random.Random(20260822)
    mp.dps = 50
    t0 = time.perf_counter()
    worst = 0.0
    for _ in range(1000):
        f_e = rng.uniform(1e-3, 1e4)
        f_mu = rng.uniform(0.0, f_e)
        oracle = float(1 - mpsqrt(1 - (mpf(f_mu) / mpf(f_e)) ** 2))
        worst = max(worst, abs(fluidity(f_mu, f_e) - oracle))
    exact = all(fluidity(0.0, f_e) == 0.0 and fluidity(f_e, f_e) == 1.0
                for f_e in (1.0, 50.0, 123.456))
    elapsed = time.perf_counter() - t0
    check("fluidity closed form",
          worst <= 1e-12 and exact and elapsed < 1.0,
          f"worst error {worst:.2e} over 1000 pairs, boundaries exact, "
          f"{elapsed * 1000:.0f} ms")


def test_fluidity_under_throttle():
    # 1500 frames at 50 Hz = 30 s of stream time through a 30/s cap
    r = bench_node("throttle", {"rate_hz": 30.0},
                   n_samples=1500, rate_hz=50.0)
    check("fluidity under throttle",
          abs(r.f - 0.2) <= 0.02,
          f"F = {r.f:.3f} (expected 0.2 +- 0.02)")


def test_latency_ordering():
    ordered = ["mean", "ivt_threshold", "differentiate", "smooth"]
    lat = {
        kind: min(
            bench_node(kind, {}, n_samples=10_000,
                       rate_hz=50.0).mean_latency_s
            for _ in range(3)
        )
        for kind in ordered
    }
    ok = lat["mean"] < lat["ivt_threshold"] < lat["differentiate"] < lat["smooth"]
    check("latency ordering",
          ok,
          " < ".join(f"{k} {lat[k] * 1e6:.2f}us" for k in ordered)
          + " (ordering only; absolute times are hardware-specific)")


def test_replay_pacing(tmp_path):
    write_dataset_tree(tmp_path)  # s1/t2 holds exactly 100 rows at 50 Hz
    dataset = discover_datasets(tmp_path)[0]
    hundred = resolve(dataset, StreamQuery(
        "demo", attributes={"subject": "s1", "task": "t2"}))[0]
    handle = open_replay(hundred)
    sub = handle.subscribe()
    t0 = time.perf_counter()
    handle.start()
    n = sum(1 for _ in sub)
    gaze_elapsed = time.perf_counter() - t0
    handle.close()

    weather = next(ds for ds in discover_datasets(REPO / "datasets")
                   if ds.dataset_id == "synthetic-weather")
    resolved = resolve(weather, StreamQuery(
        "synthetic-weather", attributes={"city": "millbrook"}))[0]
    wh = open_replay(resolved)
    wsub = wh.subscribe()
    arrivals = []
    wh.start()
    for frame in wsub:
        arrivals.append(time.perf_counter())
        if len(arrivals) == 8:
            break
    wh.close()
    gaps = [b - a for a, b in zip(arrivals, arrivals[1:])]
    mean_gap = sum(gaps) / len(gaps)

    ok = n == 100 and 1.9 <= gaze_elapsed <= 2.1 and 0.95 <= mean_gap <= 1.05
    check("replay pacing",
          ok,
          f"100 frames at 50 Hz in {gaze_elapsed:.3f} s; "
          f"1 Hz records every {mean_gap:.3f} s")


def test_protocol_state_machine(tmp_path):
    write_dataset_tree(tmp_path)
    core = ServerCore(str(tmp_path))
    conn = core.connect()
    rng = random.Random(97031)
    known = ["gaze/s1/t1", "gaze/s1/t2", "gaze/s2/t1"]
    ref = ConnectionModel()
    active = []  # sids the reference believes in, for op generation
    n_ops = 10_000
    problems = []

    def drain():
        nonlocal ref
        while True:
            try:
                msg = conn.outbound.get_nowait()
            except queue.Empty:
                return
            if isinstance(msg, pm.Subscribed):
                ref = transition(ref, "subscribed", msg.subscription_id)
                active.append(msg.subscription_id)
            elif isinstance(msg, pm.EndMessage):
                ref = transition(ref, "subscription_ended",
                                 msg.subscription_id)
                active.remove(msg.subscription_id)
            elif isinstance(msg, pm.ErrorMessage):
                ref = transition(ref, "error")

    for op in range(n_ops):
        roll = rng.random()
        if roll < 0.35:
            before = conn.model.state
            core.handle(conn, pm.encode(pm.ListDatasets(req=op)))
            ref = transition(ref, "discovery")
            if conn.model.state != before:
                problems.append(f"op {op}: discovery changed state")
                break
        elif roll < 0.50 and len(active) < 25:
            streams = rng.sample(known, k=rng.randint(1, 2))
            if rng.random() < 0.25:
                streams[-1] = "gaze/ghost/ghost"
            core.handle(conn, pm.encode(pm.Subscribe(
                req=op, mode="replay", streams=tuple(streams),
                options=pm.SubscribeOptions(autostart=False))))
        elif roll < 0.80:
            sid = rng.choice(active) if active and rng.random() < 0.7 \
                else f"sub-{rng.randint(1, 40)}-bogus"
            action = rng.choice(["pause", "resume", "seek", "stop"])
            core.handle(conn, pm.encode(pm.Control(
                req=op, subscription_id=sid, action=action,
                t=0.0 if action == "seek" else None)))
        else:
            sid = rng.choice(active) if active and rng.random() < 0.7 \
                else f"sub-{rng.randint(1, 40)}-bogus"
            core.handle(conn, pm.encode(pm.Unsubscribe(
                req=op, subscription_id=sid)))
        drain()
        if conn.model.subscriptions != ref.subscriptions \
                or conn.model.state != ref.state:
            problems.append(
                f"op {op}: server {conn.model.state}/"
                f"{sorted(conn.model.subscriptions)} != reference "
                f"{ref.state}/{sorted(ref.subscriptions)}")
            break
    core.disconnect(conn)

    # subset delivery: subscribing 2 of the 3 streams yields only those 2
    conn2 = core.connect()
    subset = ("gaze/s1/t1", "gaze/s2/t1")
    core.handle(conn2, pm.encode(pm.Subscribe(
        req=1, mode="replay", streams=subset,
        options=pm.SubscribeOptions(rate_multiplier=200.0))))
    seen = set()
    deadline = time.monotonic() + 10.0
    while time.monotonic() < deadline:
        try:
            msg = conn2.next_message(1.0)
        except queue.Empty:
            continue
        if isinstance(msg, pm.FrameMessage):
            seen.add(msg.frame.stream_id)
        if isinstance(msg, pm.EndMessage):
            break
    core.disconnect(conn2)
    if seen != set(subset):
        problems.append(f"subset delivered {sorted(seen)}")

    check("protocol state machine",
          not problems,
          "; ".join(problems) or
          f"{n_ops} random ops tracked the reference model; "
          f"discovery inert; subset delivery exact")


def test_provenance_propagation():
    chain = {
        "name": "classify",
        "nodes": [
            {"node_id": "s", "kind": "smooth"},
            {"node_id": "d", "kind": "differentiate"},
            {"node_id": "t", "kind": "ivt_threshold",
             "params": {"velocity_channels": ["x", "y"],
                        "velocity_threshold": 1.5}},
        ],
        "connectors": [{"from": "s.out", "to": "d.in"},
                       {"from": "d.out", "to": "t.in"}],
        "sources": {"s.in": "gaze"},
        "sinks": {"end": "t.out"},
    }
    spec = load_workflow(json.dumps(chain).encode())
    runs = [
        serialize_metadata(
            run_workflow(spec, {"s.in": (gaze_meta(), gaze_frames())})
            .sinks["end"].metadata)
        for _ in range(2)
    ]
    kinds = [rec["node_kind"] for rec in json.loads(runs[0])["provenance"]]
    problems = []
    if kinds != ["smooth", "differentiate", "ivt_threshold"]:
        problems.append(f"chain records {kinds}")
    if runs[0] != runs[1]:
        problems.append("reruns differ byte-wise")

    rng = np.random.default_rng(20260822)
    registry = default_registry()
    mismatches = 0
    for _ in range(100):
        doc = random_dag_doc(rng)
        spec = load_workflow(json.dumps(doc).encode())
        flat = spec.expand()
        source_meta = {target: gaze_meta(stream_id=str(sel))
                       for target, sel in spec.sources.items()}
        plan = WorkflowPlan(spec, source_meta)
        expected = provenance_oracle(flat, registry)
        for sink_name, meta in plan.sink_metadata().items():
            got = tuple(r.node_id for r in meta.provenance)
            if got != expected[sink_name]:
                mismatches += 1
    if mismatches:
        problems.append(f"{mismatches} random-DAG sink mismatches")

    check("provenance propagation",
          not problems,
          "; ".join(problems) or
          "3-record chain byte-stable; 100 random DAGs match graph walk")


def test_ivt_oracle_equivalence():
    rng = np.random.default_rng(8121)
    n = 10_000
    vx = rng.normal(0, 60, n)
    vy = rng.normal(0, 60, n)
    # plant exact threshold hits: the tie must label saccade
    vx[:3], vy[:3] = (48.0, 80.0, -48.0), (64.0, 0.0, -64.0)

    meta = StreamMetadata(
        stream_id="velocity", name="velocity", frequency_hz=50.0,
        channels=(ChannelSpec("vx", "f64", "deg/s"),
                  ChannelSpec("vy", "f64", "deg/s")),
    )
    frames = [Frame("velocity", i, i / 50.0, (float(vx[i]), float(vy[i])))
              for i in range(n)]
    doc = {"name": "ivt", "nodes": [{"node_id": "t", "kind": "ivt_threshold"}],
           "connectors": [], "sources": {"t.in": "velocity"},
           "sinks": {"end": "t.out"}}
    result = run_workflow(load_workflow(json.dumps(doc).encode()),
                          {"t.in": (meta, frames)})
    got = [f.values[0] for f in result.sinks["end"].frames]

    speed = np.sqrt(vx * vx + vy * vy)  # brute force, numpy not math.hypot
    expected = np.where(speed >= 80.0, "saccade", "fixation")
    mismatches = sum(g != e for g, e in zip(got, expected))
    check("ivt oracle equivalence",
          len(got) == n and mismatches == 0,
          f"{mismatches} mismatches over {n} samples (ties included)")


def test_savitzky_golay_exactness():
    rng = np.random.default_rng(515)
    f_s = 50.0
    n = 50
    worst = 0.0
    for _ in range(100):
        a, b, c = rng.uniform(-5, 5, 3)
        meta = StreamMetadata(
            stream_id="poly", name="poly", frequency_hz=f_s,
            channels=(ChannelSpec("p", "f64", ""),),
        )
        times = [i / f_s for i in range(n)]
        frames = [Frame("poly", i, t, (a + b * t + c * t * t,))
                  for i, t in enumerate(times)]
        doc = {"name": "sg",
               "nodes": [{"node_id": "d", "kind": "differentiate",
                          "params": {"window": 7, "polyorder": 2}}],
               "connectors": [], "sources": {"d.in": "poly"},
               "sinks": {"end": "d.out"}}
        result = run_workflow(load_workflow(json.dumps(doc).encode()),
                              {"d.in": (meta, frames)})
        for frame in result.sinks["end"].frames:
            analytic = b + 2 * c * frame.t
            worst = max(worst, abs(frame.values[0] - analytic))
    check("savitzky-golay exactness",
          worst <= 1e-9,
          f"worst interior error {worst:.2e} over 100 degree<=2 polynomials")


def test_workflow_roundtrip():
    problems = []
    for name in ("eye-movement", "weather"):
        raw = (REPO / "workflows" / f"{name}.workflow.json").read_bytes()
        spec = load_workflow(raw)
        if load_workflow(export_workflow(spec)) != spec:
            problems.append(f"bundled {name} not stable")
    rng = np.random.default_rng(616)
    for i in range(100):
        spec = load_workflow(json.dumps(random_dag_doc(rng)).encode())
        if load_workflow(export_workflow(spec)) != spec:
            problems.append(f"random dag #{i} not stable")
            break
    check("workflow json round-trip",
          not problems,
          "; ".join(problems) or "2 bundled + 100 random workflows stable")


def test_control_semantics(tmp_path):
    write_dataset_tree(tmp_path)
    dataset = discover_datasets(tmp_path)[0]
    hundred = resolve(dataset, StreamQuery(
        "demo", attributes={"subject": "s1", "task": "t2"}))[0]
    problems = []

    # pause/resume leaves no seq gaps
    handle = open_replay(hundred, rate_multiplier=10.0)
    sub = handle.subscribe()
    handle.start()
    seqs = []
    paused_once = False
    for frame in sub:
        seqs.append(frame.seq)
        if len(seqs) == 30 and not paused_once:
            handle.pause()
            time.sleep(0.1)
            handle.resume()
            paused_once = True
    handle.close()
    if seqs != list(range(100)):
        problems.append(f"pause/resume seqs broke at {len(seqs)} frames")

    # seek(0) restarts at the first sample
    handle = open_replay(hundred, rate_multiplier=10.0)
    sub = handle.subscribe()
    handle.start()
    first = next(iter(sub))
    for frame in itertools.islice(iter(sub), 19):
        pass
    handle.pause()
    while True:  # drain frames already queued before the seek
        try:
            sub.get(timeout=0.05)
        except queue.Empty:
            break
    handle.seek(0.0)
    handle.resume()
    restarted = next(iter(sub))
    handle.close()
    if not (restarted.t == first.t and restarted.values == first.values):
        problems.append(f"seek(0) resumed at t={restarted.t}")
    if not restarted.seq > first.seq:
        problems.append("seq not strictly increasing across seek")

    # live handles refuse the replay-only verbs
    with SyntheticDevice(beacon_interval=0.2).start():
        live = open_live("synthetic-gaze")
        for verb in (lambda: live.pause(), lambda: live.resume(),
                     lambda: live.seek(0.0)):
            try:
                verb()
                problems.append("live verb did not raise")
            except UnsupportedInLive:
                pass
        live.close()

    check("control semantics",
          not problems,
          "; ".join(problems) or
          "no seq gaps across pause/resume; seek(0) restarts; "
          "live verbs refused")
