"""Network protocol: JSON text messages over a WebSocket, plus health endpoints."""

from .messages import (
    ACTIONS,
    CLIENT_TYPES,
    ERROR_CODES,
    MODES,
    SERVER_TYPES,
    Control,
    DatasetList,
    EndMessage,
    ErrorMessage,
    FrameMessage,
    ListDatasets,
    ListLive,
    ListStreams,
    LiveList,
    StateMessage,
    StreamList,
    Subscribe,
    SubscribeOptions,
    Subscribed,
    Unsubscribe,
    decode_client,
    decode_server,
    encode,
    parse_simulation,
    simulation_doc,
)
from .server import Connection, ServerCore, build_app
from .state import AWAITING, EVENTS, STREAMING, ConnectionModel, transition

__all__ = [
    "ACTIONS",
    "AWAITING",
    "CLIENT_TYPES",
    "Connection",
    "ConnectionModel",
    "Control",
    "DatasetList",
    "ERROR_CODES",
    "EVENTS",
    "EndMessage",
    "ErrorMessage",
    "FrameMessage",
    "ListDatasets",
    "ListLive",
    "ListStreams",
    "LiveList",
    "MODES",
    "SERVER_TYPES",
    "STREAMING",
    "ServerCore",
    "StateMessage",
    "StreamList",
    "Subscribe",
    "SubscribeOptions",
    "Subscribed",
    "Unsubscribe",
    "build_app",
    "decode_client",
    "decode_server",
    "encode",
    "parse_simulation",
    "simulation_doc",
    "transition",
]
