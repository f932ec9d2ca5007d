"""streamloom: metadata-propagating stream multiplexing and dataflow analysis.

The package turns live devices, stored datasets, and simulators into
uniform metadata-carrying frame streams, runs DAG workflows over them
with automatic provenance, and instruments every node with fluidity and
growth-factor readouts.
"""

__version__ = "0.1.0"

from .errors import (
    BadMessage,
    BindError,
    ConnectionLost,
    CycleError,
    DuplicateKind,
    FormatError,
    IllegalTransition,
    InvariantError,
    LoomError,
    NotFound,
    ParamError,
    PortMismatch,
    ResolverError,
    SchemaError,
    SpecError,
    UnknownKey,
    UnknownKind,
    UnknownStream,
    UnsupportedInLive,
)
from .metadata import (
    AnalyticMetadata,
    ChannelSpec,
    DatasetMetadata,
    Locator,
    ResolvedStream,
    ResolverRef,
    StreamMetadata,
    StreamQuery,
    TransformRecord,
    discover_datasets,
    parse_metadata,
    resolve,
    serialize_metadata,
)
from .heuristics import (
    FluidityState,
    KalmanEstimator,
    WindowEstimator,
    classify_growth,
    estimate_frequency,
    fluidity,
    growth_factor,
    volume_profile,
)
from .sources import (
    EndOfStream,
    Frame,
    SimulationSpec,
    StreamError,
    aggregate,
    control,
    open_replay,
    open_simulation,
)
from . import transforms  # registers built-in node kinds
from .live import (
    LiveOutlet,
    LiveSource,
    SyntheticDevice,
    discover_live,
    open_live,
)
from .workflow import (
    Connector,
    ErrorEvent,
    NodeRegistry,
    NodeSpec,
    RunResult,
    SinkCapture,
    SubflowSpec,
    WorkflowPlan,
    WorkflowSpec,
    default_registry,
    export_workflow,
    instantiate,
    load_workflow,
    register_node_kind,
    run_workflow,
)
from .protocol import ServerCore, build_app
