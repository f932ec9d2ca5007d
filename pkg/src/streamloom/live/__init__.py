"""Live streams: multicast discovery, TCP outlets, and inlet handles."""

from .beacon import (
    BEACON_INTERVAL,
    BEACON_STALE,
    MULTICAST_GROUP,
    MULTICAST_PORT,
    BeaconMonitor,
    BeaconSender,
    LiveAdvertisement,
    beacon_payload,
    discover_advertisements,
    discover_live,
    fresh_advertisements,
    parse_beacon,
)
from .inlet import LiveSource, open_live
from .outlet import (
    LiveOutlet,
    SyntheticDevice,
    send_frame,
    synthetic_gaze_metadata,
    wandering_gaze,
)

__all__ = [
    "BEACON_INTERVAL",
    "BEACON_STALE",
    "MULTICAST_GROUP",
    "MULTICAST_PORT",
    "BeaconMonitor",
    "BeaconSender",
    "LiveAdvertisement",
    "LiveOutlet",
    "LiveSource",
    "SyntheticDevice",
    "beacon_payload",
    "discover_advertisements",
    "discover_live",
    "fresh_advertisements",
    "open_live",
    "parse_beacon",
    "send_frame",
    "synthetic_gaze_metadata",
    "wandering_gaze",
]
