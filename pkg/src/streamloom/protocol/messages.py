"""Wire messages: a tagged union over UTF-8 JSON text frames.

Every client message carries a client-chosen `req` correlation id (string
or integer) that the server echoes in its direct reply. Decoding is
asymmetric by design: client messages are parsed strictly (unknown fields
rejected) so mistakes surface immediately; server messages are parsed
leniently (unknown fields ignored) so older clients keep working when the
server grows new fields.

Errors travel as `error` messages with a short machine code:

    bad_message           malformed or unknown message
    bad_query             dataset/attribute query cannot be satisfied
    bad_simulation        simulation spec inconsistent with the stream
    unknown_stream        no live or stored stream matches a ref
    unknown_subscription  subscription id not active on this connection
    illegal_transition    control verb not legal in the current state
    unsupported_in_live   pause/seek on a live subscription
    stream_error          an active stream failed mid-flight
    internal              anything else; detail says what
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Optional

from ..errors import BadMessage, SchemaError, SpecError
from ..metadata import StreamQuery
from ..metadata.jsonio import (
    analytic_doc,
    canonical_json_bytes,
    dataset_doc,
    parse_analytic,
    parse_dataset,
    parse_resolved_stream,
    parse_stream,
    resolved_stream_doc,
    stream_doc,
)
from ..sources.frames import Frame, frame_doc, parse_frame
from ..sources.simulate import (
    Constant,
    Fixation,
    Gaussian,
    Saccade,
    SimulationSpec,
    Sine,
    Uniform,
)

__all__ = [
    "ListLive",
    "ListDatasets",
    "ListStreams",
    "Subscribe",
    "SubscribeOptions",
    "Control",
    "Unsubscribe",
    "LiveList",
    "DatasetList",
    "StreamList",
    "Subscribed",
    "FrameMessage",
    "StateMessage",
    "EndMessage",
    "ErrorMessage",
    "CLIENT_TYPES",
    "SERVER_TYPES",
    "ERROR_CODES",
    "encode",
    "decode_client",
    "decode_server",
    "simulation_doc",
    "parse_simulation",
]

MODES = ("live", "replay", "simulate")
ACTIONS = ("start", "stop", "pause", "resume", "seek")
ERROR_CODES = (
    "bad_message",
    "bad_query",
    "bad_simulation",
    "unknown_stream",
    "unknown_subscription",
    "illegal_transition",
    "unsupported_in_live",
    "stream_error",
    "internal",
)

MAX_DISCOVERY_TIMEOUT = 30.0


# ---------------------------------------------------------------------------
# client -> server


@dataclass(frozen=True)
class ListLive:
    req: Any
    timeout: float = 1.0


@dataclass(frozen=True)
class ListDatasets:
    req: Any


@dataclass(frozen=True)
class ListStreams:
    req: Any
    query: StreamQuery


@dataclass(frozen=True)
class SubscribeOptions:
    rate_multiplier: float = 1.0
    autostart: bool = True
    simulation: Optional[SimulationSpec] = None


@dataclass(frozen=True)
class Subscribe:
    req: Any
    mode: str
    streams: tuple
    options: SubscribeOptions = field(default_factory=SubscribeOptions)


@dataclass(frozen=True)
class Control:
    req: Any
    subscription_id: str
    action: str
    t: Optional[float] = None


@dataclass(frozen=True)
class Unsubscribe:
    req: Any
    subscription_id: str


# ---------------------------------------------------------------------------
# server -> client


@dataclass(frozen=True)
class LiveList:
    req: Any
    streams: tuple  # StreamMetadata


@dataclass(frozen=True)
class DatasetList:
    req: Any
    datasets: tuple  # DatasetMetadata


@dataclass(frozen=True)
class StreamList:
    req: Any
    streams: tuple  # ResolvedStream


@dataclass(frozen=True)
class Subscribed:
    req: Any
    subscription_id: str
    streams: tuple  # AnalyticMetadata


@dataclass(frozen=True)
class FrameMessage:
    subscription_id: str
    frame: Frame


@dataclass(frozen=True)
class StateMessage:
    subscription_id: str
    state: str
    req: Any = None


@dataclass(frozen=True)
class EndMessage:
    subscription_id: str
    reason: str
    req: Any = None


@dataclass(frozen=True)
class ErrorMessage:
    code: str
    detail: str
    req: Any = None


CLIENT_TYPES = {
    ListLive: "list_live",
    ListDatasets: "list_datasets",
    ListStreams: "list_streams",
    Subscribe: "subscribe",
    Control: "control",
    Unsubscribe: "unsubscribe",
}
SERVER_TYPES = {
    LiveList: "live_list",
    DatasetList: "dataset_list",
    StreamList: "stream_list",
    Subscribed: "subscribed",
    FrameMessage: "frame",
    StateMessage: "state",
    EndMessage: "end",
    ErrorMessage: "error",
}


# ---------------------------------------------------------------------------
# field helpers; all failures are BadMessage with the offending path


def _object(doc: Any, path: str) -> dict:
    if not isinstance(doc, dict):
        raise BadMessage(f"{path}: expected an object, got {type(doc).__name__}")
    return doc


def _field(doc: dict, key: str, path: str, typ, *, required=True, default=None):
    full = f"{path}.{key}" if path else key
    if key not in doc:
        if required:
            raise BadMessage(f"{full}: missing required field")
        return default
    value = doc[key]
    if typ is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise BadMessage(f"{full}: expected a number")
        return float(value)
    if typ is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise BadMessage(f"{full}: expected an integer")
        return value
    if typ is bool:
        if not isinstance(value, bool):
            raise BadMessage(f"{full}: expected a boolean")
        return value
    if not isinstance(value, typ):
        raise BadMessage(f"{full}: expected {typ.__name__}")
    return value


def _req(doc: dict) -> Any:
    value = _field(doc, "req", "", object)
    if isinstance(value, bool) or not isinstance(value, (str, int)):
        raise BadMessage("req: correlation id must be a string or integer")
    return value


def _no_extras(doc: dict, known: set, path: str) -> None:
    extras = set(doc) - known
    if extras:
        raise BadMessage(f"{path or 'message'}: unknown fields {sorted(extras)}")


def _str_tuple(doc: dict, key: str, path: str) -> tuple:
    raw = _field(doc, key, path, list)
    out = []
    for i, v in enumerate(raw):
        if not isinstance(v, str):
            raise BadMessage(f"{path}.{key}[{i}]: expected a string")
        out.append(v)
    return tuple(out)


# ---------------------------------------------------------------------------
# simulation specs on the wire

_GENERATOR_FIELDS = {
    "constant": ("value",),
    "uniform": ("lo", "hi"),
    "gaussian": ("mean", "sd"),
    "sine": ("amp", "freq_hz", "phase"),
}
_GENERATOR_TYPES = {
    Constant: "constant",
    Uniform: "uniform",
    Gaussian: "gaussian",
    Sine: "sine",
}


def _parse_generator(doc: Any, path: str):
    doc = _object(doc, path)
    kind = _field(doc, "kind", path, str)
    if kind not in _GENERATOR_FIELDS:
        raise BadMessage(
            f"{path}.kind: unknown generator {kind!r}; "
            f"one of {sorted(_GENERATOR_FIELDS)}"
        )
    _no_extras(doc, {"kind", *_GENERATOR_FIELDS[kind]}, path)
    if kind == "constant":
        return Constant(value=_field(doc, "value", path, float))
    if kind == "uniform":
        return Uniform(lo=_field(doc, "lo", path, float),
                       hi=_field(doc, "hi", path, float))
    if kind == "gaussian":
        return Gaussian(mean=_field(doc, "mean", path, float),
                        sd=_field(doc, "sd", path, float))
    return Sine(amp=_field(doc, "amp", path, float),
                freq_hz=_field(doc, "freq_hz", path, float),
                phase=_field(doc, "phase", path, float,
                             required=False, default=0.0))


def _generator_doc(gen) -> dict:
    kind = _GENERATOR_TYPES[type(gen)]
    doc = {"kind": kind}
    for name in _GENERATOR_FIELDS[kind]:
        doc[name] = getattr(gen, name)
    return doc


def _parse_event(doc: Any, path: str):
    doc = _object(doc, path)
    event = _field(doc, "event", path, str)
    if event == "fixation":
        _no_extras(doc, {"event", "x", "y", "duration"}, path)
        return Fixation(x=_field(doc, "x", path, float),
                        y=_field(doc, "y", path, float),
                        duration=_field(doc, "duration", path, float))
    if event == "saccade":
        _no_extras(doc, {"event", "to_x", "to_y", "duration"}, path)
        return Saccade(to_x=_field(doc, "to_x", path, float),
                       to_y=_field(doc, "to_y", path, float),
                       duration=_field(doc, "duration", path, float))
    raise BadMessage(f"{path}.event: expected fixation or saccade, got {event!r}")


def _event_doc(event) -> dict:
    if isinstance(event, Fixation):
        return {"event": "fixation", "x": event.x, "y": event.y,
                "duration": event.duration}
    return {"event": "saccade", "to_x": event.to_x, "to_y": event.to_y,
            "duration": event.duration}


def parse_simulation(doc: Any, path: str = "simulation") -> SimulationSpec:
    """Strict parse of a simulation spec document."""
    doc = _object(doc, path)
    kind = _field(doc, "kind", path, str)
    seed = _field(doc, "seed", path, int, required=False, default=0)
    try:
        if kind == "unguided":
            _no_extras(doc, {"kind", "generators", "seed"}, path)
            raw = _field(doc, "generators", path, dict)
            generators = {
                name: _parse_generator(g, f"{path}.generators.{name}")
                for name, g in raw.items()
            }
            return SimulationSpec(kind="unguided", generators=generators,
                                  seed=seed)
        if kind == "guided":
            _no_extras(doc, {"kind", "script", "jitter", "seed"}, path)
            raw = _field(doc, "script", path, list)
            script = tuple(
                _parse_event(e, f"{path}.script[{i}]") for i, e in enumerate(raw)
            )
            jitter = _field(doc, "jitter", path, float,
                            required=False, default=0.0)
            return SimulationSpec(kind="guided", script=script, jitter=jitter,
                                  seed=seed)
    except SpecError as exc:
        raise BadMessage(f"{path}: {exc}") from exc
    raise BadMessage(f"{path}.kind: expected unguided or guided, got {kind!r}")


def simulation_doc(spec: SimulationSpec) -> dict:
    doc: dict = {"kind": spec.kind, "seed": spec.seed}
    if spec.kind == "unguided":
        doc["generators"] = {
            name: _generator_doc(g) for name, g in spec.generators.items()
        }
    else:
        doc["script"] = [_event_doc(e) for e in spec.script]
        doc["jitter"] = spec.jitter
    return doc


# ---------------------------------------------------------------------------
# encode


def _query_doc(q: StreamQuery) -> dict:
    doc: dict = {"dataset": q.dataset_id}
    doc["attributes"] = dict(q.attributes)
    if q.stream_names is not None:
        doc["streams"] = list(q.stream_names)
    return doc


def _options_doc(o: SubscribeOptions) -> dict:
    doc: dict = {"rate_multiplier": o.rate_multiplier, "autostart": o.autostart}
    if o.simulation is not None:
        doc["simulation"] = simulation_doc(o.simulation)
    return doc


def _doc_of(msg) -> dict:
    if isinstance(msg, ListLive):
        return {"type": "list_live", "req": msg.req, "timeout": msg.timeout}
    if isinstance(msg, ListDatasets):
        return {"type": "list_datasets", "req": msg.req}
    if isinstance(msg, ListStreams):
        return {"type": "list_streams", "req": msg.req,
                "query": _query_doc(msg.query)}
    if isinstance(msg, Subscribe):
        return {"type": "subscribe", "req": msg.req, "mode": msg.mode,
                "streams": list(msg.streams),
                "options": _options_doc(msg.options)}
    if isinstance(msg, Control):
        doc = {"type": "control", "req": msg.req,
               "subscription_id": msg.subscription_id, "action": msg.action}
        if msg.t is not None:
            doc["t"] = msg.t
        return doc
    if isinstance(msg, Unsubscribe):
        return {"type": "unsubscribe", "req": msg.req,
                "subscription_id": msg.subscription_id}
    if isinstance(msg, LiveList):
        return {"type": "live_list", "req": msg.req,
                "streams": [stream_doc(s) for s in msg.streams]}
    if isinstance(msg, DatasetList):
        return {"type": "dataset_list", "req": msg.req,
                "datasets": [dataset_doc(d) for d in msg.datasets]}
    if isinstance(msg, StreamList):
        return {"type": "stream_list", "req": msg.req,
                "streams": [resolved_stream_doc(s) for s in msg.streams]}
    if isinstance(msg, Subscribed):
        return {"type": "subscribed", "req": msg.req,
                "subscription_id": msg.subscription_id,
                "streams": [analytic_doc(a) for a in msg.streams]}
    if isinstance(msg, FrameMessage):
        return {"type": "frame", "subscription_id": msg.subscription_id,
                "frame": frame_doc(msg.frame)}
    if isinstance(msg, StateMessage):
        doc = {"type": "state", "subscription_id": msg.subscription_id,
               "state": msg.state}
        if msg.req is not None:
            doc["req"] = msg.req
        return doc
    if isinstance(msg, EndMessage):
        doc = {"type": "end", "subscription_id": msg.subscription_id,
               "reason": msg.reason}
        if msg.req is not None:
            doc["req"] = msg.req
        return doc
    if isinstance(msg, ErrorMessage):
        doc = {"type": "error", "code": msg.code, "detail": msg.detail}
        if msg.req is not None:
            doc["req"] = msg.req
        return doc
    raise TypeError(f"not a protocol message: {type(msg).__name__}")


def encode(msg) -> str:
    """Serialize a message to its canonical JSON text frame."""
    return canonical_json_bytes(_doc_of(msg)).decode("ascii")


# ---------------------------------------------------------------------------
# decode


def _load(text) -> dict:
    if isinstance(text, bytes):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise BadMessage(f"frame is not UTF-8: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise BadMessage(f"frame is not valid JSON: {exc}") from exc
    return _object(doc, "message")


def _parse_query(doc: Any, path: str) -> StreamQuery:
    doc = _object(doc, path)
    _no_extras(doc, {"dataset", "attributes", "streams"}, path)
    dataset = _field(doc, "dataset", path, str)
    raw_attrs = _field(doc, "attributes", path, dict, required=False, default={})
    attributes = {}
    for k, v in raw_attrs.items():
        if not isinstance(v, str):
            raise BadMessage(f"{path}.attributes.{k}: expected a string")
        attributes[k] = v
    streams = None
    if "streams" in doc:
        streams = _str_tuple(doc, "streams", path)
    return StreamQuery(dataset_id=dataset, attributes=attributes,
                       stream_names=streams)


def _parse_options(doc: Any, path: str) -> SubscribeOptions:
    doc = _object(doc, path)
    _no_extras(doc, {"rate_multiplier", "autostart", "simulation"}, path)
    rate = _field(doc, "rate_multiplier", path, float,
                  required=False, default=1.0)
    if rate <= 0:
        raise BadMessage(f"{path}.rate_multiplier: must be positive")
    autostart = _field(doc, "autostart", path, bool,
                       required=False, default=True)
    simulation = None
    if "simulation" in doc:
        simulation = parse_simulation(doc["simulation"], f"{path}.simulation")
    return SubscribeOptions(rate_multiplier=rate, autostart=autostart,
                            simulation=simulation)


def decode_client(text) -> object:
    """Parse a client message strictly: unknown fields are errors."""
    doc = _load(text)
    mtype = _field(doc, "type", "", str)

    if mtype == "list_live":
        _no_extras(doc, {"type", "req", "timeout"}, "")
        timeout = _field(doc, "timeout", "", float, required=False, default=1.0)
        if not (0 < timeout <= MAX_DISCOVERY_TIMEOUT):
            raise BadMessage(
                f"timeout: must be in (0, {MAX_DISCOVERY_TIMEOUT:g}] seconds"
            )
        return ListLive(req=_req(doc), timeout=timeout)

    if mtype == "list_datasets":
        _no_extras(doc, {"type", "req"}, "")
        return ListDatasets(req=_req(doc))

    if mtype == "list_streams":
        _no_extras(doc, {"type", "req", "query"}, "")
        return ListStreams(req=_req(doc),
                           query=_parse_query(_field(doc, "query", "", dict), "query"))

    if mtype == "subscribe":
        _no_extras(doc, {"type", "req", "mode", "streams", "options"}, "")
        mode = _field(doc, "mode", "", str)
        if mode not in MODES:
            raise BadMessage(f"mode: expected one of {list(MODES)}, got {mode!r}")
        streams = _str_tuple(doc, "streams", "")
        if not streams:
            raise BadMessage("streams: must name at least one stream")
        options = SubscribeOptions()
        if "options" in doc:
            options = _parse_options(doc["options"], "options")
        return Subscribe(req=_req(doc), mode=mode, streams=streams,
                         options=options)

    if mtype == "control":
        _no_extras(doc, {"type", "req", "subscription_id", "action", "t"}, "")
        action = _field(doc, "action", "", str)
        if action not in ACTIONS:
            raise BadMessage(
                f"action: expected one of {list(ACTIONS)}, got {action!r}"
            )
        t = _field(doc, "t", "", float, required=False)
        if action == "seek" and t is None:
            raise BadMessage("t: seek requires a target time")
        if action != "seek" and t is not None:
            raise BadMessage(f"t: not a parameter of {action!r}")
        return Control(req=_req(doc),
                       subscription_id=_field(doc, "subscription_id", "", str),
                       action=action, t=t)

    if mtype == "unsubscribe":
        _no_extras(doc, {"type", "req", "subscription_id"}, "")
        return Unsubscribe(req=_req(doc),
                           subscription_id=_field(doc, "subscription_id", "", str))

    raise BadMessage(f"type: unknown client message {mtype!r}")


def _wrap_schema(parser, doc, path):
    try:
        return parser(doc, path)
    except SchemaError as exc:
        raise BadMessage(str(exc)) from exc


def decode_server(text) -> object:
    """Parse a server message leniently: unknown fields are ignored."""
    doc = _load(text)
    mtype = _field(doc, "type", "", str)

    if mtype == "live_list":
        raw = _field(doc, "streams", "", list)
        return LiveList(req=_req(doc), streams=tuple(
            _wrap_schema(parse_stream, s, f"streams[{i}]")
            for i, s in enumerate(raw)
        ))
    if mtype == "dataset_list":
        raw = _field(doc, "datasets", "", list)
        return DatasetList(req=_req(doc), datasets=tuple(
            _wrap_schema(parse_dataset, d, f"datasets[{i}]")
            for i, d in enumerate(raw)
        ))
    if mtype == "stream_list":
        raw = _field(doc, "streams", "", list)
        return StreamList(req=_req(doc), streams=tuple(
            _wrap_schema(parse_resolved_stream, s, f"streams[{i}]")
            for i, s in enumerate(raw)
        ))
    if mtype == "subscribed":
        raw = _field(doc, "streams", "", list)
        return Subscribed(
            req=_req(doc),
            subscription_id=_field(doc, "subscription_id", "", str),
            streams=tuple(
                _wrap_schema(parse_analytic, a, f"streams[{i}]")
                for i, a in enumerate(raw)
            ),
        )
    if mtype == "frame":
        try:
            frame = parse_frame(_field(doc, "frame", "", dict))
        except SchemaError as exc:
            raise BadMessage(str(exc)) from exc
        return FrameMessage(
            subscription_id=_field(doc, "subscription_id", "", str),
            frame=frame,
        )
    if mtype == "state":
        return StateMessage(
            subscription_id=_field(doc, "subscription_id", "", str),
            state=_field(doc, "state", "", str),
            req=doc.get("req"),
        )
    if mtype == "end":
        return EndMessage(
            subscription_id=_field(doc, "subscription_id", "", str),
            reason=_field(doc, "reason", "", str),
            req=doc.get("req"),
        )
    if mtype == "error":
        return ErrorMessage(
            code=_field(doc, "code", "", str),
            detail=_field(doc, "detail", "", str),
            req=doc.get("req"),
        )
    raise BadMessage(f"type: unknown server message {mtype!r}")
