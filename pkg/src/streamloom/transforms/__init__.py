"""Built-in node kinds, registered on import."""

from ..workflow.registry import default_registry
from .base import Emitter, Transform, run_transform
from .basic import (
    IdentityTransform,
    JoinTransform,
    MeanParams,
    MeanTransform,
    NoiseTransform,
    RouterTransform,
    ThrottleTransform,
    identity_metadata,
    join_metadata,
    join_ports,
    make_identity,
    make_passthrough,
    make_join,
    make_mean,
    make_noise,
    make_router,
    make_throttle,
    mean_metadata,
    noise_metadata,
    router_metadata,
    router_ports,
    throttle_metadata,
)
from .derivative import (
    DifferentiateTransform,
    SavGolParams,
    differentiate_metadata,
    make_differentiate,
)
from .gaze import (
    FIXATION,
    SACCADE,
    IvtParams,
    IvtTransform,
    SynthesizerTransform,
    ivt_metadata,
    make_ivt,
    make_synthesizer,
    synthesizer_metadata,
)
from .smoothing import ButterworthParams, SmoothTransform, make_smooth, smooth_metadata

__all__ = [
    "Transform",
    "Emitter",
    "run_transform",
    "ButterworthParams",
    "SmoothTransform",
    "SavGolParams",
    "DifferentiateTransform",
    "IvtParams",
    "IvtTransform",
    "SynthesizerTransform",
    "FIXATION",
    "SACCADE",
    "MeanParams",
    "MeanTransform",
    "NoiseTransform",
    "RouterTransform",
    "JoinTransform",
    "IdentityTransform",
    "ThrottleTransform",
]


def _register_builtins() -> None:
    registry = default_registry()
    if "inlet" in registry:
        return
    registry.register(
        "inlet", make_passthrough, identity_metadata, transparent=True
    )
    registry.register("smooth", make_smooth, smooth_metadata)
    registry.register("differentiate", make_differentiate, differentiate_metadata)
    registry.register(
        "ivt_threshold", make_ivt, ivt_metadata, volume_data_dependent=True
    )
    registry.register("mean", make_mean, mean_metadata)
    registry.register("noise", make_noise, noise_metadata)
    registry.register("synthesizer", make_synthesizer, synthesizer_metadata)
    registry.register(
        "router",
        make_router,
        router_metadata,
        ports_fn=router_ports,
        volume_data_dependent=True,
    )
    registry.register("join", make_join, join_metadata, ports_fn=join_ports)
    registry.register("throttle", make_throttle, throttle_metadata)


_register_builtins()
