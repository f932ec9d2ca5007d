"""Parsing and canonical serialization of metadata documents.

Canonical form is UTF-8 JSON with sorted keys and no insignificant
whitespace, so byte equality coincides with value equality. Frequencies
and timestamps are normalized to floats during parsing; unknown fields
are carried through untouched.
"""

from __future__ import annotations

import json
from typing import Any, Mapping

from ..errors import SchemaError
from .types import (
    AnalyticMetadata,
    ChannelSpec,
    DatasetMetadata,
    Identification,
    Locator,
    Ownership,
    ResolvedStream,
    ResolverRef,
    StreamMetadata,
    StreamQuery,
    TransformRecord,
)

#: File suffix per document kind.
SUFFIXES = {
    "source": ".source.json",
    "dataset": ".dataset.json",
    "analytic": ".analytic.json",
}


def canonical_json_bytes(doc: Any) -> bytes:
    """Serialize a JSON-able object to canonical bytes."""
    return json.dumps(
        doc, sort_keys=True, separators=(",", ":"), ensure_ascii=True
    ).encode("ascii")


# ---------------------------------------------------------------------------
# typed field extraction with path-tracking errors


def _expect_object(doc: Any, path: str) -> dict:
    if not isinstance(doc, dict):
        raise SchemaError(f"{path}: expected an object, got {type(doc).__name__}")
    return doc


def _get(doc: dict, key: str, path: str, typ, *, default=None, required=True):
    full = f"{path}.{key}" if path else key
    if key not in doc:
        if required:
            raise SchemaError(f"{full}: missing required field")
        return default
    value = doc[key]
    if typ is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise SchemaError(f"{full}: expected a number, got {type(value).__name__}")
        return float(value)
    if typ is str:
        if not isinstance(value, str):
            raise SchemaError(f"{full}: expected a string, got {type(value).__name__}")
        return value
    if typ is list:
        if not isinstance(value, list):
            raise SchemaError(f"{full}: expected an array, got {type(value).__name__}")
        return value
    if typ is dict:
        if not isinstance(value, dict):
            raise SchemaError(f"{full}: expected an object, got {type(value).__name__}")
        return value
    raise AssertionError(typ)


def _str_list(doc: dict, key: str, path: str, *, required=True, default=()) -> tuple[str, ...]:
    raw = _get(doc, key, path, list, required=required)
    if raw is None:
        return tuple(default)
    out = []
    for i, v in enumerate(raw):
        if not isinstance(v, str):
            raise SchemaError(f"{path}.{key}[{i}]: expected a string")
        out.append(v)
    return tuple(out)


def _extras(doc: dict, known: set[str]) -> dict:
    return {k: doc[k] for k in doc if k not in known}


# ---------------------------------------------------------------------------
# per-kind parsers


def parse_channel(doc: Any, path: str) -> ChannelSpec:
    doc = _expect_object(doc, path)
    spec = ChannelSpec(
        name=_get(doc, "name", path, str),
        dtype=_get(doc, "dtype", path, str),
        unit=_get(doc, "unit", path, str, required=False, default="") or "",
    )
    if "word_size_bits" in doc and doc["word_size_bits"] != spec.word_size_bits:
        raise SchemaError(
            f"{path}.word_size_bits: {doc['word_size_bits']} does not match "
            f"dtype {spec.dtype!r} ({spec.word_size_bits})"
        )
    return spec


def parse_stream(doc: Any, path: str = "") -> StreamMetadata:
    doc = _expect_object(doc, path or "stream")
    p = path or "stream"
    channels = tuple(
        parse_channel(c, f"{p}.channels[{i}]")
        for i, c in enumerate(_get(doc, "channels", path, list))
    )
    known = {
        "stream_id", "name", "frequency_hz", "channels", "device",
        "index_channels", "word_size_bits",
    }
    return StreamMetadata(
        stream_id=_get(doc, "stream_id", path, str),
        name=_get(doc, "name", path, str, required=False, default="") or "",
        frequency_hz=_get(doc, "frequency_hz", path, float),
        channels=channels,
        device=_get(doc, "device", path, dict, required=False, default={}) or {},
        index_channels=_str_list(doc, "index_channels", p, required=False),
        extra=_extras(doc, known),
    )


def parse_transform_record(doc: Any, path: str) -> TransformRecord:
    doc = _expect_object(doc, path)
    return TransformRecord(
        node_kind=_get(doc, "node_kind", path, str),
        node_id=_get(doc, "node_id", path, str),
        params=_get(doc, "params", path, dict, required=False, default={}) or {},
        applied_at=_get(doc, "applied_at", path, float, required=False, default=0.0),
        inputs=_str_list(doc, "inputs", path, required=False),
    )


def parse_analytic(doc: Any, path: str = "") -> AnalyticMetadata:
    doc = _expect_object(doc, path or "analytic")
    p = path or "analytic"
    stream = parse_stream(_get(doc, "stream", path, dict), f"{p}.stream")
    records = tuple(
        parse_transform_record(r, f"{p}.provenance[{i}]")
        for i, r in enumerate(
            _get(doc, "provenance", path, list, required=False) or []
        )
    )
    return AnalyticMetadata(stream=stream, provenance=records)


def parse_resolver(doc: Any, path: str) -> ResolverRef:
    doc = _expect_object(doc, path)
    kind = _get(doc, "kind", path, str)
    if kind == "declarative":
        return ResolverRef(
            kind=kind,
            file_pattern=_get(doc, "file_pattern", path, str),
            format=_get(doc, "format", path, str, required=False, default="csv") or "csv",
            column_map=_get(doc, "column_map", path, dict, required=False, default={}) or {},
        )
    if kind == "external":
        return ResolverRef(kind=kind, command=_str_list(doc, "command", path))
    raise SchemaError(f"{path}.kind: unknown resolver kind {kind!r}")


def parse_dataset(doc: Any, path: str = "") -> DatasetMetadata:
    doc = _expect_object(doc, path or "dataset")
    p = path or "dataset"
    ownership_doc = _get(doc, "ownership", path, dict, required=False, default={}) or {}
    ownership = Ownership(
        authors=_str_list(ownership_doc, "authors", f"{p}.ownership", required=False),
        contact=_get(ownership_doc, "contact", f"{p}.ownership", str, required=False, default="") or "",
        license=_get(ownership_doc, "license", f"{p}.ownership", str, required=False, default="") or "",
    )
    ident_doc = _get(doc, "identification", path, dict)
    identification = Identification(
        title=_get(ident_doc, "title", f"{p}.identification", str),
        version=_get(ident_doc, "version", f"{p}.identification", str),
        keywords=_str_list(ident_doc, "keywords", f"{p}.identification", required=False),
        description=_get(ident_doc, "description", f"{p}.identification", str, required=False, default="") or "",
    )
    prov_raw = doc.get("provenance", "")
    if isinstance(prov_raw, list):
        provenance: Any = tuple(
            parse_transform_record(r, f"{p}.provenance[{i}]")
            for i, r in enumerate(prov_raw)
        )
    elif isinstance(prov_raw, str):
        provenance = prov_raw
    else:
        raise SchemaError(f"{p}.provenance: expected a string or an array")
    groups_doc = _get(doc, "groups", path, dict, required=False, default={}) or {}
    groups = {}
    for gname, attrs in groups_doc.items():
        if not isinstance(attrs, list) or not all(isinstance(a, str) for a in attrs):
            raise SchemaError(f"{p}.groups.{gname}: expected an array of strings")
        groups[gname] = tuple(attrs)
    streams = tuple(
        parse_stream(s, f"{p}.streams[{i}]")
        for i, s in enumerate(_get(doc, "streams", path, list, required=False) or [])
    )
    resolver_doc = _get(doc, "resolver", path, dict, required=False)
    resolver = parse_resolver(resolver_doc, f"{p}.resolver") if resolver_doc else None
    known = {
        "dataset_id", "ownership", "identification", "provenance",
        "groups", "streams", "resolver",
    }
    return DatasetMetadata(
        dataset_id=_get(doc, "dataset_id", path, str),
        ownership=ownership,
        identification=identification,
        provenance=provenance,
        groups=groups,
        streams=streams,
        resolver=resolver,
        extra=_extras(doc, known),
    )


def parse_metadata(document: bytes | str, kind: str):
    """Parse and validate a metadata document of the requested kind.

    Raises :class:`SchemaError` for malformed structure (naming the field
    path) and :class:`InvariantError` for invariant violations.
    """
    if isinstance(document, (bytes, bytearray)):
        document = document.decode("utf-8")
    try:
        doc = json.loads(document)
    except json.JSONDecodeError as e:
        raise SchemaError(f"document is not valid JSON: {e}") from e
    if kind == "source":
        return parse_stream(doc)
    if kind == "dataset":
        return parse_dataset(doc)
    if kind == "analytic":
        return parse_analytic(doc)
    raise ValueError(f"unknown metadata kind {kind!r}")


# ---------------------------------------------------------------------------
# document builders (inverse of the parsers)


def channel_doc(c: ChannelSpec) -> dict:
    return {
        "name": c.name,
        "dtype": c.dtype,
        "unit": c.unit,
        "word_size_bits": c.word_size_bits,
    }


def stream_doc(s: StreamMetadata) -> dict:
    doc = dict(s.extra)
    doc.update(
        {
            "stream_id": s.stream_id,
            "name": s.name,
            "frequency_hz": float(s.frequency_hz),
            "channels": [channel_doc(c) for c in s.channels],
            "device": dict(s.device),
            "index_channels": list(s.index_channels),
        }
    )
    return doc


def transform_record_doc(r: TransformRecord) -> dict:
    return {
        "node_kind": r.node_kind,
        "node_id": r.node_id,
        "params": dict(r.params),
        "applied_at": float(r.applied_at),
        "inputs": list(r.inputs),
    }


def analytic_doc(a: AnalyticMetadata) -> dict:
    return {
        "stream": stream_doc(a.stream),
        "provenance": [transform_record_doc(r) for r in a.provenance],
    }


def resolver_doc(r: ResolverRef) -> dict:
    if r.kind == "declarative":
        return {
            "kind": r.kind,
            "file_pattern": r.file_pattern,
            "format": r.format,
            "column_map": dict(r.column_map),
        }
    return {"kind": r.kind, "command": list(r.command)}


def dataset_doc(d: DatasetMetadata) -> dict:
    doc = dict(d.extra)
    if isinstance(d.provenance, tuple):
        prov: Any = [transform_record_doc(r) for r in d.provenance]
    else:
        prov = d.provenance
    doc.update(
        {
            "dataset_id": d.dataset_id,
            "ownership": {
                "authors": list(d.ownership.authors),
                "contact": d.ownership.contact,
                "license": d.ownership.license,
            },
            "identification": {
                "title": d.identification.title,
                "version": d.identification.version,
                "keywords": list(d.identification.keywords),
                "description": d.identification.description,
            },
            "provenance": prov,
            "groups": {k: list(v) for k, v in d.groups.items()},
            "streams": [stream_doc(s) for s in d.streams],
        }
    )
    if d.resolver is not None:
        doc["resolver"] = resolver_doc(d.resolver)
    return doc


def serialize_metadata(value) -> bytes:
    """Serialize a metadata value to canonical JSON bytes."""
    if isinstance(value, StreamMetadata):
        doc = stream_doc(value)
    elif isinstance(value, DatasetMetadata):
        doc = dataset_doc(value)
    elif isinstance(value, AnalyticMetadata):
        doc = analytic_doc(value)
    else:
        raise TypeError(f"cannot serialize {type(value).__name__}")
    return canonical_json_bytes(doc)


# ---------------------------------------------------------------------------
# query / resolved-stream wire forms (shared by protocol and resolvers)


def query_doc(q: StreamQuery) -> dict:
    doc: dict[str, Any] = {
        "dataset_id": q.dataset_id,
        "attributes": dict(q.attributes),
    }
    if q.stream_names is not None:
        doc["stream_names"] = list(q.stream_names)
    return doc


def parse_query(doc: Any, path: str = "query") -> StreamQuery:
    doc = _expect_object(doc, path)
    names = _get(doc, "stream_names", path, list, required=False)
    return StreamQuery(
        dataset_id=_get(doc, "dataset_id", path, str),
        attributes=_get(doc, "attributes", path, dict, required=False, default={}) or {},
        stream_names=tuple(names) if names is not None else None,
    )


def resolved_stream_doc(r: ResolvedStream) -> dict:
    return {
        "metadata": stream_doc(r.metadata),
        "locator": {
            "path": r.locator.path,
            "format": r.locator.format,
            "column_map": dict(r.locator.column_map),
        },
        "attributes": dict(r.attributes),
    }


def parse_resolved_stream(doc: Any, path: str = "resolved") -> ResolvedStream:
    doc = _expect_object(doc, path)
    loc = _expect_object(_get(doc, "locator", path, dict), f"{path}.locator")
    return ResolvedStream(
        metadata=parse_stream(_get(doc, "metadata", path, dict), f"{path}.metadata"),
        locator=Locator(
            path=_get(loc, "path", f"{path}.locator", str),
            format=_get(loc, "format", f"{path}.locator", str, required=False, default="csv") or "csv",
            column_map=_get(loc, "column_map", f"{path}.locator", dict, required=False, default={}) or {},
        ),
        attributes=_get(doc, "attributes", path, dict, required=False, default={}) or {},
    )
