"""Declared-volume accounting for transformations.

Every stream's nominal data volume V(s) follows from its metadata alone:
frequency times the summed channel word sizes. The growth factor of a
transformation is the ratio of total outbound to total inbound volume, so it
is known before a single frame flows. A node whose output rate depends on
the data itself (event detectors, value routers) has no defined growth
factor; such ports are marked data-dependent and the ratio reports None.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

from ..errors import ParamError
from ..metadata import StreamMetadata

__all__ = [
    "VolumeProfile",
    "volume_profile",
    "growth_factor",
    "classify_growth",
]

COMPRESSION = "compression"
EXPANSION = "expansion"
NEUTRAL = "neutral"


def classify_growth(gf: float) -> str:
    """Classify a growth factor: shrinking, growing, or volume-preserving."""
    if gf < 0:
        raise ParamError(f"growth factor cannot be negative, got {gf}")
    if gf < 1:
        return COMPRESSION
    if gf > 1:
        return EXPANSION
    return NEUTRAL


@dataclass(frozen=True)
class VolumeProfile:
    """Per-port declared volumes and their outbound/inbound ratio.

    `gf` is None when any outbound port is data-dependent, in which case no
    volume statement can be made ahead of time.
    """

    inbound: tuple  # V(s) per input port, bits/s
    outbound: tuple  # V(s) per output port, bits/s
    gf: Optional[float]

    @property
    def classification(self) -> Optional[str]:
        return None if self.gf is None else classify_growth(self.gf)


def volume_profile(
    in_ports: Sequence[StreamMetadata],
    out_ports: Sequence[StreamMetadata],
    *,
    data_dependent: bool = False,
) -> VolumeProfile:
    """Compute per-port volumes and the growth factor of a transformation.

    Parameters
    ----------
    in_ports, out_ports : sequence of StreamMetadata
        Declared metadata of every input and output port.
    data_dependent : bool
        True when the node's outbound volume cannot be stated from metadata
        (per-kind declaration); forces `gf` to None.
    """
    inbound = tuple(m.volume_bits_per_s for m in in_ports)
    outbound = tuple(m.volume_bits_per_s for m in out_ports)
    total_in = sum(inbound)
    if total_in <= 0:
        raise ParamError("total inbound volume is zero; growth factor undefined")
    gf = None if data_dependent else sum(outbound) / total_in
    return VolumeProfile(inbound=inbound, outbound=outbound, gf=gf)


def growth_factor(
    in_ports: Sequence[StreamMetadata],
    out_ports: Sequence[StreamMetadata],
    *,
    data_dependent: bool = False,
) -> Optional[float]:
    """Outbound/inbound declared-volume ratio, or None when data-dependent.

    Values below 1 indicate the transformation compresses the stream, above 1
    that it expands it, exactly 1 that volume is preserved.
    """
    return volume_profile(in_ports, out_ports, data_dependent=data_dependent).gf
