"""Workflow documents: a named DAG of node instances and typed connectors.

A workflow file (``*.workflow.json``) declares nodes, connectors between
named ports, source bindings (input ports fed from outside the graph),
sink bindings (named taps on output ports), and optionally a table of
sub-flows. A sub-flow is a reusable fragment instantiated as a single
node with kind ``subflow:<name>``; loading keeps the reference intact and
:meth:`WorkflowSpec.expand` produces the flattened graph the runner
executes. See ``docs/workflow-schema.md``.
"""

import json
from collections import deque
from dataclasses import dataclass, field, replace
from typing import Mapping, Optional

from ..errors import (
    CycleError,
    InvariantError,
    PortMismatch,
    SchemaError,
    UnknownKind,
)
from ..metadata import canonical_json_bytes
from .registry import NodeRegistry, default_registry

SUBFLOW_PREFIX = "subflow:"


@dataclass(frozen=True)
class Connector:
    """One directed edge: an output port wired into an input port."""

    from_node: str
    from_port: str
    to_node: str
    to_port: str

    @property
    def source(self) -> str:
        return f"{self.from_node}.{self.from_port}"

    @property
    def target(self) -> str:
        return f"{self.to_node}.{self.to_port}"


@dataclass(frozen=True)
class NodeSpec:
    """One node instance: a registered kind (or sub-flow) plus parameters."""

    node_id: str
    kind: str
    params: Mapping = field(default_factory=dict)
    inputs: tuple = ()
    outputs: tuple = ()

    @property
    def is_subflow(self) -> bool:
        return self.kind.startswith(SUBFLOW_PREFIX)

    @property
    def subflow_name(self) -> str:
        return self.kind[len(SUBFLOW_PREFIX):]


@dataclass(frozen=True)
class SubflowSpec:
    """A workflow fragment with named external ports.

    ``inputs`` maps each external input port to the internal ``node.port``
    targets it feeds (fan-out allowed); ``outputs`` maps each external
    output port to the single internal ``node.port`` that produces it.
    """

    name: str
    nodes: tuple = ()
    connectors: tuple = ()
    inputs: Mapping = field(default_factory=dict)
    outputs: Mapping = field(default_factory=dict)


@dataclass(frozen=True)
class WorkflowSpec:
    name: str
    nodes: tuple = ()
    connectors: tuple = ()
    sources: Mapping = field(default_factory=dict)
    sinks: Mapping = field(default_factory=dict)
    subflows: Mapping = field(default_factory=dict)

    def node(self, node_id: str) -> NodeSpec:
        for n in self.nodes:
            if n.node_id == node_id:
                return n
        raise KeyError(node_id)

    def expand(self, registry: Optional[NodeRegistry] = None) -> "WorkflowSpec":
        """Flatten every sub-flow node into its constituent nodes.

        Inner node ids are namespaced ``<instance>/<inner>`` so ids stay
        unique; source/sink bindings that referenced a sub-flow port are
        rewired to the internal port behind it.
        """
        flat, _, _ = expand_workflow(self, registry)
        return flat

    def topo_order(self) -> tuple:
        """Node ids in deterministic topological order.

        Ties are broken by document order, so the result is stable for a
        given spec. Raises CycleError listing one cycle when the graph is
        not a DAG.
        """
        return _topo_order(self.nodes, self.connectors)

    def layers(self) -> dict:
        """node_id -> longest-path depth from the entry layer (0-based)."""
        upstream = {n.node_id: [] for n in self.nodes}
        for c in self.connectors:
            upstream[c.to_node].append(c.from_node)
        depth: dict = {}
        for node_id in self.topo_order():
            ups = upstream[node_id]
            depth[node_id] = 1 + max((depth[u] for u in ups), default=-1)
        return depth


def _split_port(ref: str, where: str) -> tuple:
    node, sep, port = ref.partition(".")
    if not sep or not node or not port:
        raise SchemaError(f"{where}: expected 'node.port', got {ref!r}")
    return node, port


def _require(doc: dict, key: str, typ, path: str):
    if key not in doc:
        raise SchemaError(f"{path}.{key}: missing")
    value = doc[key]
    if not isinstance(value, typ):
        raise SchemaError(f"{path}.{key}: expected {typ.__name__}")
    return value


def _parse_node(doc, path: str) -> NodeSpec:
    if not isinstance(doc, dict):
        raise SchemaError(f"{path}: expected object")
    node_id = _require(doc, "node_id", str, path)
    kind = _require(doc, "kind", str, path)
    params = doc.get("params", {})
    if not isinstance(params, dict):
        raise SchemaError(f"{path}.params: expected object")
    known = {"node_id", "kind", "params", "inputs", "outputs"}
    extra = sorted(set(doc) - known)
    if extra:
        raise SchemaError(f"{path}: unknown keys {extra}")
    inputs = tuple(doc.get("inputs", ()))
    outputs = tuple(doc.get("outputs", ()))
    return NodeSpec(node_id=node_id, kind=kind, params=params,
                    inputs=inputs, outputs=outputs)


def _parse_connector(doc, path: str) -> Connector:
    if not isinstance(doc, dict) or set(doc) != {"from", "to"}:
        raise SchemaError(f"{path}: expected {{'from': 'node.port', 'to': 'node.port'}}")
    from_node, from_port = _split_port(doc["from"], f"{path}.from")
    to_node, to_port = _split_port(doc["to"], f"{path}.to")
    return Connector(from_node, from_port, to_node, to_port)


def _parse_subflow(name: str, doc, path: str) -> SubflowSpec:
    if not isinstance(doc, dict):
        raise SchemaError(f"{path}: expected object")
    nodes = tuple(
        _parse_node(n, f"{path}.nodes[{i}]")
        for i, n in enumerate(_require(doc, "nodes", list, path))
    )
    connectors = tuple(
        _parse_connector(c, f"{path}.connectors[{i}]")
        for i, c in enumerate(doc.get("connectors", []))
    )
    inputs = {}
    for port, targets in _require(doc, "inputs", dict, path).items():
        if isinstance(targets, str):
            targets = [targets]
        for t in targets:
            _split_port(t, f"{path}.inputs.{port}")
        inputs[port] = tuple(targets)
    outputs = {}
    for port, source in _require(doc, "outputs", dict, path).items():
        if not isinstance(source, str):
            raise SchemaError(f"{path}.outputs.{port}: expected 'node.port'")
        _split_port(source, f"{path}.outputs.{port}")
        outputs[port] = source
    known = {"nodes", "connectors", "inputs", "outputs"}
    extra = sorted(set(doc) - known)
    if extra:
        raise SchemaError(f"{path}: unknown keys {extra}")
    return SubflowSpec(name=name, nodes=nodes, connectors=connectors,
                       inputs=inputs, outputs=outputs)


def _resolve_ports(node: NodeSpec, registry: NodeRegistry,
                   subflows: Mapping) -> NodeSpec:
    """Fill in (or check) a node's port lists from its kind."""
    if node.is_subflow:
        sub = subflows.get(node.subflow_name)
        if sub is None:
            raise UnknownKind(
                f"node {node.node_id!r}: no sub-flow named {node.subflow_name!r}"
            )
        if node.params:
            raise SchemaError(
                f"node {node.node_id!r}: sub-flow nodes take no params"
            )
        inputs = tuple(sorted(sub.inputs))
        outputs = tuple(sorted(sub.outputs))
    else:
        if node.kind not in registry:
            raise UnknownKind(
                f"node {node.node_id!r}: unknown kind {node.kind!r} "
                f"(registered: {', '.join(registry.names())})"
            )
        inputs, outputs = registry.get(node.kind).ports(dict(node.params))
        inputs, outputs = tuple(inputs), tuple(outputs)
    for declared, derived, label in (
        (node.inputs, inputs, "inputs"),
        (node.outputs, outputs, "outputs"),
    ):
        if declared and tuple(declared) != derived:
            raise PortMismatch(
                f"node {node.node_id!r}: declared {label} {tuple(declared)} "
                f"do not match its kind's {derived}"
            )
    return replace(node, inputs=inputs, outputs=outputs)


def _topo_order(nodes, connectors) -> tuple:
    order_index = {n.node_id: i for i, n in enumerate(nodes)}
    indegree = {n.node_id: 0 for n in nodes}
    downstream = {n.node_id: [] for n in nodes}
    for c in connectors:
        indegree[c.to_node] += 1
        downstream[c.from_node].append(c.to_node)
    ready = deque(sorted(
        (n for n, d in indegree.items() if d == 0), key=order_index.get
    ))
    out = []
    while ready:
        node_id = ready.popleft()
        out.append(node_id)
        next_ready = []
        for target in downstream[node_id]:
            indegree[target] -= 1
            if indegree[target] == 0:
                next_ready.append(target)
        for target in sorted(next_ready, key=order_index.get):
            ready.append(target)
    if len(out) < len(nodes):
        raise CycleError(_find_cycle(
            {n for n in indegree if n not in set(out)}, downstream
        ))
    return tuple(out)


def _find_cycle(remaining: set, downstream: Mapping) -> list:
    start = sorted(remaining)[0]
    path, seen = [start], {start}
    node = start
    while True:
        node = next(t for t in downstream[node] if t in remaining)
        if node in seen:
            return path[path.index(node):] + [node]
        path.append(node)
        seen.add(node)


def _validate_graph(name: str, nodes, connectors, sources, sinks) -> None:
    ids = [n.node_id for n in nodes]
    dupes = sorted({i for i in ids if ids.count(i) > 1})
    if dupes:
        raise InvariantError(f"workflow {name!r}: duplicate node ids {dupes}")
    by_id = {n.node_id: n for n in nodes}

    def check_port(ref_node: str, ref_port: str, direction: str, where: str):
        node = by_id.get(ref_node)
        if node is None:
            raise PortMismatch(f"{where}: no node {ref_node!r}")
        ports = node.outputs if direction == "out" else node.inputs
        if ref_port not in ports:
            raise PortMismatch(
                f"{where}: node {ref_node!r} has no "
                f"{'output' if direction == 'out' else 'input'} "
                f"port {ref_port!r} (has {ports})"
            )

    fed: dict = {}
    for c in connectors:
        check_port(c.from_node, c.from_port, "out", f"connector {c.source}->{c.target}")
        check_port(c.to_node, c.to_port, "in", f"connector {c.source}->{c.target}")
        if c.target in fed:
            raise PortMismatch(
                f"input port {c.target} is fed twice; fan-in requires a "
                "multi-input node with one port per stream"
            )
        fed[c.target] = "connector"
    for target in sources:
        node, port = _split_port(target, "sources")
        check_port(node, port, "in", f"source binding {target}")
        if target in fed:
            raise PortMismatch(f"input port {target} has both a connector and a source binding")
        fed[target] = "source"
    for node in nodes:
        for port in node.inputs:
            if f"{node.node_id}.{port}" not in fed:
                raise PortMismatch(
                    f"input port {node.node_id}.{port} is not connected; "
                    "wire a connector or bind a source"
                )
    for sink_name, ref in sinks.items():
        node, port = _split_port(ref, f"sinks.{sink_name}")
        check_port(node, port, "out", f"sink {sink_name!r} -> {ref}")
    _topo_order(nodes, connectors)


def load_workflow(document, registry: Optional[NodeRegistry] = None) -> WorkflowSpec:
    """Parse and validate a workflow document (JSON bytes or str).

    Sub-flow references are kept intact; the graph is validated both as
    written and post-expansion.
    """
    registry = registry or default_registry()
    if isinstance(document, bytes):
        document = document.decode("utf-8")
    try:
        doc = json.loads(document)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"workflow document is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise SchemaError("workflow document: expected object")
    name = _require(doc, "name", str, "workflow")
    known = {"name", "nodes", "connectors", "sources", "sinks", "subflows"}
    extra = sorted(set(doc) - known)
    if extra:
        raise SchemaError(f"workflow: unknown keys {extra}")
    subflows = {
        sub_name: _parse_subflow(sub_name, sub_doc, f"subflows.{sub_name}")
        for sub_name, sub_doc in doc.get("subflows", {}).items()
    }
    nodes = tuple(
        _parse_node(n, f"nodes[{i}]")
        for i, n in enumerate(_require(doc, "nodes", list, "workflow"))
    )
    connectors = tuple(
        _parse_connector(c, f"connectors[{i}]")
        for i, c in enumerate(doc.get("connectors", []))
    )
    sources = dict(doc.get("sources", {}))
    sinks = dict(doc.get("sinks", {}))
    for sink_name, ref in sinks.items():
        if not isinstance(ref, str):
            raise SchemaError(f"sinks.{sink_name}: expected 'node.port'")

    nodes = tuple(_resolve_ports(n, registry, subflows) for n in nodes)
    resolved_subflows = {}
    for sub_name, sub in subflows.items():
        sub_nodes = tuple(
            _resolve_ports(n, registry, subflows) for n in sub.nodes
        )
        resolved_subflows[sub_name] = replace(sub, nodes=sub_nodes)
        _validate_subflow(resolved_subflows[sub_name])

    spec = WorkflowSpec(
        name=name, nodes=nodes, connectors=connectors,
        sources=sources, sinks=sinks, subflows=resolved_subflows,
    )
    _validate_graph(name, nodes, connectors, sources, sinks)
    expanded = spec.expand(registry)
    if expanded is not spec:
        _validate_graph(expanded.name, expanded.nodes, expanded.connectors,
                        expanded.sources, expanded.sinks)
    return spec


def _validate_subflow(sub: SubflowSpec) -> None:
    """Inner wiring: every inner input fed by a connector or an external port."""
    by_id = {n.node_id: n for n in sub.nodes}
    ids = [n.node_id for n in sub.nodes]
    dupes = sorted({i for i in ids if ids.count(i) > 1})
    if dupes:
        raise InvariantError(f"sub-flow {sub.name!r}: duplicate node ids {dupes}")
    externally_fed = {t for targets in sub.inputs.values() for t in targets}
    for ref in externally_fed:
        node, port = _split_port(ref, f"subflow {sub.name} inputs")
        if node not in by_id or port not in by_id[node].inputs:
            raise PortMismatch(f"sub-flow {sub.name!r}: no input port {ref}")
    for port, ref in sub.outputs.items():
        node, out_port = _split_port(ref, f"subflow {sub.name} outputs")
        if node not in by_id or out_port not in by_id[node].outputs:
            raise PortMismatch(f"sub-flow {sub.name!r}: no output port {ref}")
    fed = set(externally_fed)
    for c in sub.connectors:
        if c.from_node not in by_id or c.from_port not in by_id[c.from_node].outputs:
            raise PortMismatch(f"sub-flow {sub.name!r}: no output port {c.source}")
        if c.to_node not in by_id or c.to_port not in by_id[c.to_node].inputs:
            raise PortMismatch(f"sub-flow {sub.name!r}: no input port {c.target}")
        if c.target in fed:
            raise PortMismatch(f"sub-flow {sub.name!r}: input port {c.target} is fed twice")
        fed.add(c.target)
    for node in sub.nodes:
        for port in node.inputs:
            if f"{node.node_id}.{port}" not in fed:
                raise PortMismatch(
                    f"sub-flow {sub.name!r}: input port {node.node_id}.{port} "
                    "is not connected"
                )
    _topo_order(sub.nodes, sub.connectors)


def _splice(nodes_in, connectors_in, get_flat_sub):
    """Replace sub-flow nodes with (already flat) fragments, one level.

    Returns the flat node/connector lists plus maps from every original
    ``node.port`` reference to its location(s) in the flat graph.
    """
    nodes: list = []
    connectors: list = []
    input_map: dict = {}   # original target -> tuple of flat targets
    output_map: dict = {}  # original source -> flat source
    for node in nodes_in:
        if not node.is_subflow:
            nodes.append(node)
            for port in node.inputs:
                input_map[f"{node.node_id}.{port}"] = (f"{node.node_id}.{port}",)
            for port in node.outputs:
                output_map[f"{node.node_id}.{port}"] = f"{node.node_id}.{port}"
            continue
        flat = get_flat_sub(node.subflow_name)
        prefix = node.node_id
        for inner in flat.nodes:
            nodes.append(replace(inner, node_id=f"{prefix}/{inner.node_id}"))
        for c in flat.connectors:
            connectors.append(Connector(
                f"{prefix}/{c.from_node}", c.from_port,
                f"{prefix}/{c.to_node}", c.to_port,
            ))
        for port, targets in flat.inputs.items():
            input_map[f"{node.node_id}.{port}"] = tuple(
                f"{prefix}/{t}" for t in targets
            )
        for port, source in flat.outputs.items():
            output_map[f"{node.node_id}.{port}"] = f"{prefix}/{source}"
    for c in connectors_in:
        source = output_map[c.source]
        from_node, from_port = _split_port(source, "expand")
        for target in input_map[c.target]:
            to_node, to_port = _split_port(target, "expand")
            connectors.append(Connector(from_node, from_port, to_node, to_port))
    return nodes, connectors, input_map, output_map


def expand_workflow(spec: WorkflowSpec,
                    registry: Optional[NodeRegistry] = None) -> tuple:
    """(flat spec, input-port map, output-port map).

    The maps translate every pre-expansion ``node.port`` reference to
    where it lives in the flat graph: inputs map to a tuple of flat
    targets (a sub-flow input may fan out), outputs to one flat source.
    """
    registry = registry or default_registry()
    if not any(n.is_subflow for n in spec.nodes):
        input_map = {
            f"{n.node_id}.{p}": (f"{n.node_id}.{p}",)
            for n in spec.nodes for p in n.inputs
        }
        output_map = {
            f"{n.node_id}.{p}": f"{n.node_id}.{p}"
            for n in spec.nodes for p in n.outputs
        }
        flat = spec if not spec.subflows else replace(spec, subflows={})
        return flat, input_map, output_map

    flat_subs: dict = {}

    def flat_sub(name: str, chain: tuple) -> SubflowSpec:
        if name in flat_subs:
            return flat_subs[name]
        if name in chain:
            raise CycleError(list(chain[chain.index(name):]) + [name])
        sub = spec.subflows[name]
        nodes, connectors, input_map, output_map = _splice(
            sub.nodes, sub.connectors,
            lambda inner: flat_sub(inner, chain + (name,)),
        )
        inputs = {
            port: tuple(f for t in targets for f in input_map[t])
            for port, targets in sub.inputs.items()
        }
        outputs = {port: output_map[ref] for port, ref in sub.outputs.items()}
        flat_subs[name] = SubflowSpec(
            name=name, nodes=tuple(nodes), connectors=tuple(connectors),
            inputs=inputs, outputs=outputs,
        )
        return flat_subs[name]

    nodes, connectors, input_map, output_map = _splice(
        spec.nodes, spec.connectors, lambda name: flat_sub(name, ())
    )
    sources = {
        flat: selector
        for target, selector in spec.sources.items()
        for flat in input_map[target]
    }
    sinks = {name: output_map[ref] for name, ref in spec.sinks.items()}
    flat = WorkflowSpec(
        name=spec.name, nodes=tuple(nodes), connectors=tuple(connectors),
        sources=sources, sinks=sinks, subflows={},
    )
    return flat, input_map, output_map


def _node_doc(node: NodeSpec) -> dict:
    return {
        "node_id": node.node_id,
        "kind": node.kind,
        "params": dict(node.params),
        "inputs": list(node.inputs),
        "outputs": list(node.outputs),
    }


def workflow_doc(spec: WorkflowSpec) -> dict:
    doc = {
        "name": spec.name,
        "nodes": [_node_doc(n) for n in spec.nodes],
        "connectors": [
            {"from": c.source, "to": c.target} for c in spec.connectors
        ],
        "sources": dict(spec.sources),
        "sinks": dict(spec.sinks),
    }
    if spec.subflows:
        doc["subflows"] = {
            name: {
                "nodes": [_node_doc(n) for n in sub.nodes],
                "connectors": [
                    {"from": c.source, "to": c.target} for c in sub.connectors
                ],
                "inputs": {p: list(t) for p, t in sub.inputs.items()},
                "outputs": dict(sub.outputs),
            }
            for name, sub in spec.subflows.items()
        }
    return doc


def export_workflow(spec: WorkflowSpec) -> bytes:
    """Canonical JSON bytes; load(export(spec)) == spec."""
    return canonical_json_bytes(workflow_doc(spec))
