"""Frame production: replayed, simulated, and merged streams."""

from .aggregate import AggregatedStream, Merger, aggregate, merge_iterables, merged_metadata
from .frames import EndOfStream, Frame, StreamError, frame_bytes, frame_doc, parse_frame
from .handle import CONTROL_ACTIONS, SourceHandle, Subscription, control
from .replay import ReplaySource, load_csv_rows, open_replay
from .simulate import (
    Constant,
    Fixation,
    Gaussian,
    Saccade,
    SimulationSource,
    SimulationSpec,
    Sine,
    Uniform,
    open_simulation,
    script_duration,
    script_position,
)

__all__ = [
    "Frame",
    "EndOfStream",
    "StreamError",
    "frame_doc",
    "frame_bytes",
    "parse_frame",
    "SourceHandle",
    "Subscription",
    "control",
    "CONTROL_ACTIONS",
    "ReplaySource",
    "open_replay",
    "load_csv_rows",
    "SimulationSpec",
    "SimulationSource",
    "open_simulation",
    "Constant",
    "Uniform",
    "Gaussian",
    "Sine",
    "Fixation",
    "Saccade",
    "script_position",
    "script_duration",
    "Merger",
    "merge_iterables",
    "merged_metadata",
    "aggregate",
    "AggregatedStream",
]
