"""Node-kind registry: the extension point for the transform library.

A kind bundles three things: a factory building a processing instance, a
metadata function declaring output stream shapes from input shapes (pure,
frame-free), and port declarations. Ports are static for most kinds; kinds
whose ports depend on parameters (a value router) declare a ports function
instead.

Two flags matter to the engine: `transparent` kinds are plumbing and do not
append a provenance record; `volume_data_dependent` kinds cannot state
their outbound volume from metadata, so their growth factor is undefined.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping, Optional

from ..errors import DuplicateKind, UnknownKind
from ..metadata import StreamMetadata

__all__ = [
    "NodeKind",
    "NodeRegistry",
    "default_registry",
    "register_node_kind",
    "instantiate",
]

MetadataFn = Callable[[Mapping[str, StreamMetadata], dict], dict]
Factory = Callable[[dict, Mapping[str, StreamMetadata], Mapping[str, StreamMetadata]], object]
PortsFn = Callable[[dict], tuple]


@dataclass(frozen=True)
class NodeKind:
    name: str
    factory: Factory
    metadata_fn: MetadataFn
    inputs: tuple = ("in",)
    outputs: tuple = ("out",)
    ports_fn: Optional[PortsFn] = None
    transparent: bool = False
    volume_data_dependent: bool = False

    def ports(self, params: dict) -> tuple:
        """(input port names, output port names) for a given parameter set."""
        if self.ports_fn is not None:
            return self.ports_fn(params)
        return self.inputs, self.outputs


class NodeRegistry:
    """Named collection of node kinds; clonable for test-local additions."""

    def __init__(self, kinds: Optional[Mapping[str, NodeKind]] = None):
        self._kinds: dict[str, NodeKind] = dict(kinds or {})

    def register(
        self,
        name: str,
        factory: Factory,
        metadata_fn: MetadataFn,
        *,
        inputs: tuple = ("in",),
        outputs: tuple = ("out",),
        ports_fn: Optional[PortsFn] = None,
        transparent: bool = False,
        volume_data_dependent: bool = False,
    ) -> NodeKind:
        if name in self._kinds:
            raise DuplicateKind(f"node kind {name!r} is already registered")
        kind = NodeKind(
            name=name,
            factory=factory,
            metadata_fn=metadata_fn,
            inputs=tuple(inputs),
            outputs=tuple(outputs),
            ports_fn=ports_fn,
            transparent=transparent,
            volume_data_dependent=volume_data_dependent,
        )
        self._kinds[name] = kind
        return kind

    def get(self, name: str) -> NodeKind:
        try:
            return self._kinds[name]
        except KeyError:
            raise UnknownKind(
                f"unknown node kind {name!r}; registered: {sorted(self._kinds)}"
            ) from None

    def __contains__(self, name: str) -> bool:
        return name in self._kinds

    def names(self) -> tuple:
        return tuple(sorted(self._kinds))

    def clone(self) -> "NodeRegistry":
        return NodeRegistry(self._kinds)


_DEFAULT = NodeRegistry()


def default_registry() -> NodeRegistry:
    """The process-wide registry holding the built-in transform kinds."""
    return _DEFAULT


def register_node_kind(name, factory, metadata_fn, *, registry=None, **kwargs) -> NodeKind:
    """Register a kind on the default (or given) registry."""
    return (registry or _DEFAULT).register(name, factory, metadata_fn, **kwargs)


def instantiate(
    kind: NodeKind,
    params: dict,
    in_metadata: Mapping[str, StreamMetadata],
    *,
    node_id: Optional[str] = None,
):
    """Build (instance, out_metadata) for one node.

    When `node_id` is given, output stream ids are rewritten to
    `node_id/port` so every node in a workflow owns a distinct stream
    namespace regardless of what the metadata function returned.
    """
    out_meta = dict(kind.metadata_fn(in_metadata, params))
    if node_id is not None and not kind.transparent:
        # transparent kinds are attachment points: the stream keeps its
        # identity; everything else owns a distinct namespace
        out_meta = {
            port: meta.replace(stream_id=f"{node_id}/{port}")
            for port, meta in out_meta.items()
        }
    instance = kind.factory(params, dict(in_metadata), out_meta)
    return instance, out_meta
