"""DAG workflows: node registry, JSON specs, and execution engines."""

from .registry import (
    NodeKind,
    NodeRegistry,
    default_registry,
    instantiate,
    register_node_kind,
)
from .runner import (
    ErrorEvent,
    NodeCounters,
    RunResult,
    SinkCapture,
    WorkflowPlan,
    merge_provenance,
    run_workflow,
)
from .spec import (
    Connector,
    NodeSpec,
    SubflowSpec,
    WorkflowSpec,
    expand_workflow,
    export_workflow,
    load_workflow,
    workflow_doc,
)

__all__ = [
    "Connector",
    "ErrorEvent",
    "NodeCounters",
    "NodeKind",
    "NodeRegistry",
    "NodeSpec",
    "RunResult",
    "SinkCapture",
    "SubflowSpec",
    "WorkflowPlan",
    "WorkflowSpec",
    "default_registry",
    "expand_workflow",
    "export_workflow",
    "instantiate",
    "load_workflow",
    "merge_provenance",
    "register_node_kind",
    "run_workflow",
    "workflow_doc",
]
