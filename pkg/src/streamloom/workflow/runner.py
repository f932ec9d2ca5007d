"""Workflow execution: metadata propagation first, then frames.

Every node's output metadata is derived before any frame moves, so a
node can never observe a frame whose description it has not seen. The
provenance chain on each output is the merge of the input chains plus
the node's own record, except for transparent kinds (pass-through
attachment points), which leave provenance untouched.

Two modes:

* deterministic: single-threaded, frames delivered in topological order,
  sources merged on (t, source index). Reference semantics; two runs of
  the same spec and sources are identical.
* pipelined: one worker thread per node with a bounded ordered inbox;
  nodes run concurrently, each processes its own frames in order.
  Per-connector ordering is preserved; cross-connector interleaving is
  not deterministic.
"""

import heapq
import queue
import threading
import time
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, Mapping, Optional

from ..errors import InvariantError, PortMismatch
from ..metadata import AnalyticMetadata, StreamMetadata, TransformRecord
from ..sources.frames import Frame, frame_bytes
from .registry import NodeRegistry, default_registry, instantiate
from .spec import WorkflowSpec, expand_workflow


@dataclass(frozen=True)
class ErrorEvent:
    """In-band notice that a node failed; flows downstream like a frame."""

    node_id: str
    message: str
    t: Optional[float] = None


@dataclass
class NodeCounters:
    """Raw observables for one node, food for the stats heuristics."""

    node_id: str
    kind: str
    frames_in: dict = field(default_factory=dict)
    frames_out: dict = field(default_factory=dict)
    first_in_t: Optional[float] = None
    last_in_t: Optional[float] = None
    first_out_t: Optional[float] = None
    last_out_t: Optional[float] = None
    bytes_in: int = 0    # canonical wire encoding, summed per frame
    bytes_out: int = 0
    busy_seconds: float = 0.0
    calls: int = 0
    errors: int = 0

    def total_in(self) -> int:
        return sum(self.frames_in.values())

    def total_out(self) -> int:
        return sum(self.frames_out.values())

    def saw_input(self, port: str, frame: Frame) -> None:
        self.frames_in[port] = self.frames_in.get(port, 0) + 1
        self.bytes_in += len(frame_bytes(frame))
        if self.first_in_t is None:
            self.first_in_t = frame.t
        self.last_in_t = frame.t

    def saw_output(self, port: str, frame: Frame) -> None:
        self.frames_out[port] = self.frames_out.get(port, 0) + 1
        self.bytes_out += len(frame_bytes(frame))
        if self.first_out_t is None:
            self.first_out_t = frame.t
        self.last_out_t = frame.t


@dataclass
class SinkCapture:
    """Everything delivered to one sink binding."""

    name: str
    metadata: AnalyticMetadata
    frames: list = field(default_factory=list)
    events: list = field(default_factory=list)


@dataclass
class RunResult:
    spec: WorkflowSpec
    sinks: dict
    metadata: dict       # "node.port" -> AnalyticMetadata
    node_stats: dict     # node_id -> NodeCounters
    plan: Optional["WorkflowPlan"] = None


def _as_analytic(meta) -> AnalyticMetadata:
    if isinstance(meta, AnalyticMetadata):
        return meta
    if isinstance(meta, StreamMetadata):
        return AnalyticMetadata(stream=meta)
    raise InvariantError(
        f"source metadata must be StreamMetadata or AnalyticMetadata, got {type(meta).__name__}"
    )


def merge_provenance(in_metas: Iterable[AnalyticMetadata],
                     layer_of: Mapping) -> tuple:
    """Combine provenance chains from several input ports.

    Records made by nodes of this workflow are ordered by (topological
    layer, node_id); records that predate the workflow keep their
    original relative order and come first. A record appearing on
    several ports (a diamond) is kept once.
    """
    seen = set()
    encountered = []
    for meta in in_metas:
        for record in meta.provenance:
            if record.node_id not in seen:
                seen.add(record.node_id)
                encountered.append(record)

    def key(pair):
        position, record = pair
        layer = layer_of.get(record.node_id)
        if layer is None:
            return (-1, f"{position:012d}")
        return (layer, record.node_id)

    ordered = sorted(enumerate(encountered), key=key)
    return tuple(record for _, record in ordered)


class NodeRuntime:
    """One instantiated node: transform instance plus its metadata."""

    def __init__(self, spec_node, kind, instance, in_metadata, out_metadata):
        self.spec = spec_node
        self.kind = kind
        self.instance = instance
        self.in_metadata = in_metadata    # port -> AnalyticMetadata
        self.out_metadata = out_metadata  # port -> AnalyticMetadata
        self.counters = NodeCounters(spec_node.node_id, spec_node.kind)
        self.dead = False


class WorkflowPlan:
    """An expanded spec with every node instantiated and metadata derived."""

    def __init__(self, spec: WorkflowSpec, source_metadata: Mapping,
                 registry: Optional[NodeRegistry] = None,
                 clock: Optional[Callable[[], float]] = None):
        registry = registry or default_registry()
        self.original = spec
        self.spec, input_map, _ = expand_workflow(spec, registry)
        self.order = self.spec.topo_order()
        self.layers = self.spec.layers()
        missing = [t for t in spec.sources if t not in source_metadata]
        if missing:
            raise PortMismatch(f"no source supplied for input ports {sorted(missing)}")
        unknown = [t for t in source_metadata if t not in spec.sources]
        if unknown:
            raise PortMismatch(
                f"sources supplied for unbound ports {sorted(unknown)}; "
                f"this workflow binds {sorted(spec.sources)}"
            )

        # source bindings are written against pre-expansion port names;
        # entry maps each to the flat ports frames must enter at
        self.entry = {}
        flat_source_meta = {}
        for target in spec.sources:
            flats = input_map[target]
            self.entry[target] = tuple(
                (f.partition(".")[0], f.partition(".")[2]) for f in flats
            )
            for f in flats:
                flat_source_meta[f] = source_metadata[target]

        upstream = {}  # "node.port" (input) -> "node.port" (output)
        self.downstream = {}  # "node.port" (output) -> list of (node_id, port)
        for c in self.spec.connectors:
            upstream[c.target] = c.source
            self.downstream.setdefault(c.source, []).append((c.to_node, c.to_port))

        self.nodes: dict = {}
        self.metadata: dict = {}  # output "node.port" -> AnalyticMetadata
        logical = 0.0
        for node_id in self.order:
            node = self.spec.node(node_id)
            kind = registry.get(node.kind)
            in_analytic = {}
            for port in node.inputs:
                target = f"{node_id}.{port}"
                if target in flat_source_meta:
                    in_analytic[port] = _as_analytic(flat_source_meta[target])
                else:
                    in_analytic[port] = self.metadata[upstream[target]]
            in_streams = {port: m.stream for port, m in in_analytic.items()}
            instance, out_streams = instantiate(
                kind, dict(node.params), in_streams, node_id=node_id
            )
            if kind.transparent:
                merged = merge_provenance(in_analytic.values(), self.layers)
            else:
                applied_at = clock() if clock is not None else logical
                record = TransformRecord(
                    node_kind=node.kind,
                    node_id=node_id,
                    params=dict(node.params),
                    applied_at=applied_at,
                    inputs=tuple(m.stream.stream_id for m in in_analytic.values()),
                )
                merged = merge_provenance(in_analytic.values(), self.layers) + (record,)
                logical += 1.0
            out_analytic = {
                port: AnalyticMetadata(stream=meta, provenance=merged)
                for port, meta in out_streams.items()
            }
            runtime = NodeRuntime(node, kind, instance, in_analytic, out_analytic)
            self.nodes[node_id] = runtime
            for port, meta in out_analytic.items():
                self.metadata[f"{node_id}.{port}"] = meta

    def sink_metadata(self) -> dict:
        return {
            name: self.metadata[ref] for name, ref in self.spec.sinks.items()
        }


def _prepare_sources(spec: WorkflowSpec, sources: Mapping):
    """Split {target: (metadata, frames)} into the two maps the plan/run need."""
    metadata, streams = {}, {}
    for target, binding in sources.items():
        try:
            meta, frames = binding
        except (TypeError, ValueError):
            raise InvariantError(
                f"source for {target!r} must be a (metadata, frames) pair"
            ) from None
        metadata[target] = meta
        streams[target] = frames
    return metadata, streams


def run_workflow(spec: WorkflowSpec, sources: Mapping, *,
                 registry: Optional[NodeRegistry] = None,
                 clock: Optional[Callable[[], float]] = None,
                 mode: str = "deterministic") -> RunResult:
    """Execute a workflow over finite frame streams.

    ``sources`` maps each bound input port ("node.port", post-expansion
    names) to a (metadata, iterable-of-frames) pair. Returns captured
    sink frames, final metadata for every output port, and per-node
    counters.
    """
    if mode not in ("deterministic", "pipelined"):
        raise InvariantError(f"unknown mode {mode!r}")
    source_metadata, source_streams = _prepare_sources(spec, sources)
    plan = WorkflowPlan(spec, source_metadata, registry=registry, clock=clock)
    sinks = {
        name: SinkCapture(name=name, metadata=plan.metadata[ref])
        for name, ref in plan.spec.sinks.items()
    }
    sink_taps: dict = {}  # output "node.port" -> list of SinkCapture
    for name, ref in plan.spec.sinks.items():
        sink_taps.setdefault(ref, []).append(sinks[name])

    if mode == "deterministic":
        _run_deterministic(plan, source_streams, sink_taps)
    else:
        _run_pipelined(plan, source_streams, sink_taps)
    return RunResult(
        spec=plan.spec,
        sinks=sinks,
        metadata=dict(plan.metadata),
        node_stats={n: rt.counters for n, rt in plan.nodes.items()},
        plan=plan,
    )


def _deliver(plan, source, item, pending, sink_taps):
    """Queue one frame or event at every consumer of an output port."""
    for capture in sink_taps.get(source, ()):
        if isinstance(item, ErrorEvent):
            capture.events.append(item)
        else:
            capture.frames.append(item)
    for node_id, port in plan.downstream.get(source, ()):
        pending.setdefault(node_id, []).append((port, item))


def _process_at(plan, node_id, port, item, pending, sink_taps):
    runtime = plan.nodes[node_id]
    if isinstance(item, ErrorEvent):
        # forward untouched so every downstream sink hears about it
        for out_port in runtime.spec.outputs:
            _deliver(plan, f"{node_id}.{out_port}", item, pending, sink_taps)
        return
    if runtime.dead:
        return
    runtime.counters.saw_input(port, item)
    started = time.perf_counter()
    try:
        emitted = runtime.instance.process(port, item)
    except Exception as exc:
        runtime.dead = True
        runtime.counters.errors += 1
        event = ErrorEvent(node_id=node_id, message=str(exc), t=item.t)
        for out_port in runtime.spec.outputs:
            _deliver(plan, f"{node_id}.{out_port}", event, pending, sink_taps)
        return
    finally:
        runtime.counters.busy_seconds += time.perf_counter() - started
        runtime.counters.calls += 1
    for out_port, frame in emitted:
        runtime.counters.saw_output(out_port, frame)
        _deliver(plan, f"{node_id}.{out_port}", frame, pending, sink_taps)


def _drain(plan, pending, sink_taps):
    """One pass down the topological order clears every queued item,
    because connectors only point forward in that order."""
    for node_id in plan.order:
        for port, item in pending.pop(node_id, ()):
            _process_at(plan, node_id, port, item, pending, sink_taps)


def _run_deterministic(plan, source_streams, sink_taps):
    def tagged(index, target, frames):
        for frame in frames:
            yield (frame.t, index, target, frame)

    merged = heapq.merge(*[
        tagged(i, target, source_streams[target])
        for i, target in enumerate(sorted(plan.entry))
    ])
    pending: dict = {}
    for _, _, target, frame in merged:
        for node_id, port in plan.entry[target]:
            pending.setdefault(node_id, []).append((port, frame))
        _drain(plan, pending, sink_taps)

    for node_id in plan.order:
        runtime = plan.nodes[node_id]
        if not runtime.dead:
            tail = runtime.instance.finish()
            for out_port, frame in tail:
                runtime.counters.saw_output(out_port, frame)
                _deliver(plan, f"{node_id}.{out_port}", frame, pending, sink_taps)
        _drain(plan, pending, sink_taps)
    _drain(plan, pending, sink_taps)


_END = object()


def _run_pipelined(plan, source_streams, sink_taps, inbox_size: int = 1024):
    """One worker per node; bounded inboxes give natural backpressure."""
    inboxes = {node_id: queue.Queue(maxsize=inbox_size) for node_id in plan.order}
    inbound = {node_id: 0 for node_id in plan.order}
    for c in plan.spec.connectors:
        inbound[c.to_node] += 1
    for flats in plan.entry.values():
        for node_id, _ in flats:
            inbound[node_id] += 1
    sink_lock = threading.Lock()

    def deliver(source, item):
        with sink_lock:
            for capture in sink_taps.get(source, ()):
                if isinstance(item, ErrorEvent):
                    capture.events.append(item)
                else:
                    capture.frames.append(item)
        for node_id, port in plan.downstream.get(source, ()):
            inboxes[node_id].put((port, item))

    def finish_node(runtime, node_id):
        if not runtime.dead:
            try:
                tail = runtime.instance.finish()
            except Exception as exc:
                runtime.counters.errors += 1
                event = ErrorEvent(node_id=node_id, message=str(exc))
                for out_port in runtime.spec.outputs:
                    deliver(f"{node_id}.{out_port}", event)
                tail = []
            for out_port, frame in tail:
                runtime.counters.saw_output(out_port, frame)
                deliver(f"{node_id}.{out_port}", frame)

    def worker(node_id):
        runtime = plan.nodes[node_id]
        remaining = inbound[node_id]
        box = inboxes[node_id]
        while remaining > 0:
            port, item = box.get()
            if item is _END:
                remaining -= 1
                continue
            if isinstance(item, ErrorEvent):
                for out_port in runtime.spec.outputs:
                    deliver(f"{node_id}.{out_port}", item)
                continue
            if runtime.dead:
                continue
            runtime.counters.saw_input(port, item)
            started = time.perf_counter()
            try:
                emitted = runtime.instance.process(port, item)
            except Exception as exc:
                runtime.dead = True
                runtime.counters.errors += 1
                event = ErrorEvent(node_id=node_id, message=str(exc), t=item.t)
                for out_port in runtime.spec.outputs:
                    deliver(f"{node_id}.{out_port}", event)
                continue
            finally:
                runtime.counters.busy_seconds += time.perf_counter() - started
                runtime.counters.calls += 1
            for out_port, frame in emitted:
                runtime.counters.saw_output(out_port, frame)
                deliver(f"{node_id}.{out_port}", frame)
        finish_node(runtime, node_id)
        for out_port in runtime.spec.outputs:
            for consumer, _ in plan.downstream.get(f"{node_id}.{out_port}", ()):
                inboxes[consumer].put((None, _END))

    def pump(target, frames):
        feeds = plan.entry[target]
        for frame in frames:
            for node_id, port in feeds:
                inboxes[node_id].put((port, frame))
        for node_id, _ in feeds:
            inboxes[node_id].put((None, _END))

    threads = [
        threading.Thread(target=worker, args=(node_id,), daemon=True)
        for node_id in plan.order
    ]
    threads += [
        threading.Thread(target=pump, args=(target, frames), daemon=True)
        for target, frames in source_streams.items()
    ]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
