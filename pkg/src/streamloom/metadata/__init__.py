"""Metadata schemas, canonical serialization, discovery, and resolution."""

from .discovery import discover_datasets
from .jsonio import (
    SUFFIXES,
    canonical_json_bytes,
    parse_metadata,
    parse_stream,
    serialize_metadata,
    stream_doc,
)
from .resolver import resolve
from .types import (
    DTYPE_BITS,
    INTEGER_DTYPES,
    NUMERIC_DTYPES,
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
    substitute_stream_id,
)

__all__ = [
    "AnalyticMetadata",
    "ChannelSpec",
    "DatasetMetadata",
    "DTYPE_BITS",
    "INTEGER_DTYPES",
    "NUMERIC_DTYPES",
    "Identification",
    "Locator",
    "Ownership",
    "ResolvedStream",
    "ResolverRef",
    "StreamMetadata",
    "StreamQuery",
    "SUFFIXES",
    "TransformRecord",
    "canonical_json_bytes",
    "discover_datasets",
    "parse_metadata",
    "parse_stream",
    "resolve",
    "serialize_metadata",
    "stream_doc",
    "substitute_stream_id",
]
