"""Domain types for the three metadata schemas.

Three document kinds describe the data a stream pipeline touches:

* source metadata (:class:`StreamMetadata`) describes one data stream:
  its nominal frequency, typed channels, and device attributes;
* dataset metadata (:class:`DatasetMetadata`) describes a stored dataset:
  ownership, identification, group attributes that partition it, stream
  templates, and a resolver that maps queries to files;
* analytic metadata (:class:`AnalyticMetadata`) describes a derived stream:
  the stream itself plus the ordered provenance of transformations that
  produced it.

All values are immutable after construction and safe to share across
threads. Unknown fields found in documents are kept in ``extra`` and
re-emitted on serialization, so foreign annotations survive a round trip.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Mapping, Sequence

from ..errors import InvariantError

#: Bits occupied by one sample of each channel dtype. ``label`` holds
#: categorical tags (e.g. fixation/saccade) and counts as one byte.
DTYPE_BITS: dict[str, int] = {
    "i8": 8,
    "i16": 16,
    "i32": 32,
    "i64": 64,
    "f32": 32,
    "f64": 64,
    "bool": 8,
    "label": 8,
}

#: Dtypes whose samples are numbers (everything except bool and label).
NUMERIC_DTYPES = frozenset({"i8", "i16", "i32", "i64", "f32", "f64"})

INTEGER_DTYPES = frozenset({"i8", "i16", "i32", "i64"})


@dataclass(frozen=True)
class ChannelSpec:
    """One typed channel of a stream."""

    name: str
    dtype: str
    unit: str = ""

    def __post_init__(self):
        if not self.name:
            raise InvariantError("channel name must be non-empty")
        if self.dtype not in DTYPE_BITS:
            raise InvariantError(
                f"channel {self.name!r}: unknown dtype {self.dtype!r}"
            )

    @property
    def word_size_bits(self) -> int:
        """Bits occupied by one sample of this channel."""
        return DTYPE_BITS[self.dtype]

    def coerce(self, value: Any) -> Any:
        """Coerce a raw value to this channel's python representation."""
        if self.dtype in INTEGER_DTYPES:
            return int(value)
        if self.dtype in ("f32", "f64"):
            return float(value)
        if self.dtype == "bool":
            return bool(value)
        return str(value)


@dataclass(frozen=True)
class StreamMetadata:
    """Description of one data stream.

    ``index_channels`` names the channels forming the time/index axis;
    empty means the implicit per-frame timestamp is the index.
    """

    stream_id: str
    name: str
    frequency_hz: float
    channels: tuple[ChannelSpec, ...]
    device: Mapping[str, Any] = field(default_factory=dict)
    index_channels: tuple[str, ...] = ()
    extra: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if not self.stream_id:
            raise InvariantError("stream_id must be non-empty")
        if not (self.frequency_hz > 0):
            raise InvariantError(
                f"frequency_hz must be > 0, got {self.frequency_hz}"
            )
        if not self.channels:
            raise InvariantError(f"stream {self.stream_id!r}: channels must be non-empty")
        names = [c.name for c in self.channels]
        if len(set(names)) != len(names):
            raise InvariantError(
                f"stream {self.stream_id!r}: duplicate channel names"
            )
        unknown = set(self.index_channels) - set(names)
        if unknown:
            raise InvariantError(
                f"stream {self.stream_id!r}: index_channels not in channels: {sorted(unknown)}"
            )

    @property
    def channel_names(self) -> tuple[str, ...]:
        return tuple(c.name for c in self.channels)

    @property
    def volume_bits_per_s(self) -> float:
        """Nominal data volume: frequency times summed channel word sizes."""
        return self.frequency_hz * sum(c.word_size_bits for c in self.channels)

    def channel(self, name: str) -> ChannelSpec:
        for c in self.channels:
            if c.name == name:
                return c
        raise KeyError(name)

    def replace(self, **changes) -> "StreamMetadata":
        from dataclasses import replace

        return replace(self, **changes)


@dataclass(frozen=True)
class TransformRecord:
    """Provenance record of one transformation applied to a stream."""

    node_kind: str
    node_id: str
    params: Mapping[str, Any] = field(default_factory=dict)
    applied_at: float = 0.0
    inputs: tuple[str, ...] = ()

    def __post_init__(self):
        if not self.node_kind:
            raise InvariantError("node_kind must be non-empty")
        if not self.node_id:
            raise InvariantError("node_id must be non-empty")


@dataclass(frozen=True)
class AnalyticMetadata:
    """A stream description plus the ordered chain that produced it.

    ``provenance`` is root-first: the record of the first transformation
    applied comes first. Appending never mutates existing records; it
    returns a new value.
    """

    stream: StreamMetadata
    provenance: tuple[TransformRecord, ...] = ()

    def append(self, record: TransformRecord) -> "AnalyticMetadata":
        return AnalyticMetadata(self.stream, self.provenance + (record,))

    def with_stream(self, stream: StreamMetadata) -> "AnalyticMetadata":
        return AnalyticMetadata(stream, self.provenance)


@dataclass(frozen=True)
class Ownership:
    authors: tuple[str, ...] = ()
    contact: str = ""
    license: str = ""


@dataclass(frozen=True)
class Identification:
    title: str
    version: str
    keywords: tuple[str, ...] = ()
    description: str = ""

    def __post_init__(self):
        if not self.title:
            raise InvariantError("identification.title must be non-empty")
        if not self.version:
            raise InvariantError("identification.version must be non-empty")


@dataclass(frozen=True)
class ResolverRef:
    """How to turn queries against a dataset into concrete data locations.

    Declarative resolvers name a file pattern with ``{attribute}``
    placeholders; the attribute values are discovered by enumerating the
    file system. External resolvers name a command that speaks the
    line-delimited JSON contract (see :mod:`streamloom.metadata.resolver`).
    """

    kind: str  # "declarative" | "external"
    file_pattern: str = ""
    format: str = "csv"
    column_map: Mapping[str, str] = field(default_factory=dict)
    command: tuple[str, ...] = ()

    def __post_init__(self):
        if self.kind == "declarative":
            if not self.file_pattern:
                raise InvariantError("declarative resolver needs a file_pattern")
            if self.format != "csv":
                raise InvariantError(f"unsupported resolver format {self.format!r}")
        elif self.kind == "external":
            if not self.command:
                raise InvariantError("external resolver needs a non-empty command")
        else:
            raise InvariantError(f"unknown resolver kind {self.kind!r}")

    @property
    def placeholders(self) -> tuple[str, ...]:
        import string

        if self.kind != "declarative":
            return ()
        names = []
        for _, name, _, _ in string.Formatter().parse(self.file_pattern):
            if name:
                names.append(name)
        return tuple(names)


@dataclass(frozen=True)
class DatasetMetadata:
    """Description of one stored dataset.

    ``groups`` maps a group name to the attribute names whose value
    combinations partition the dataset (flat, non-nested). ``base_dir``
    is the directory the metadata file was loaded from; it anchors
    relative data paths and is never serialized.
    """

    dataset_id: str
    ownership: Ownership
    identification: Identification
    provenance: Any = ""  # free text or tuple[TransformRecord, ...]
    groups: Mapping[str, tuple[str, ...]] = field(default_factory=dict)
    streams: tuple[StreamMetadata, ...] = ()
    resolver: ResolverRef | None = None
    extra: Mapping[str, Any] = field(default_factory=dict)
    base_dir: str | None = None

    def __post_init__(self):
        if not self.dataset_id:
            raise InvariantError("dataset_id must be non-empty")
        if self.resolver is not None and self.resolver.kind == "declarative":
            bad = set(self.resolver.placeholders) - set(self.group_attributes)
            if bad:
                raise InvariantError(
                    "resolver.file_pattern placeholders not declared in groups: "
                    + ", ".join(sorted(bad))
                )

    @property
    def group_attributes(self) -> tuple[str, ...]:
        seen: list[str] = []
        for attrs in self.groups.values():
            for a in attrs:
                if a not in seen:
                    seen.append(a)
        return tuple(seen)

    def with_base_dir(self, base_dir: str) -> "DatasetMetadata":
        from dataclasses import replace

        return replace(self, base_dir=base_dir)


@dataclass(frozen=True)
class StreamQuery:
    """A stream-wise and/or group-wise query against one dataset."""

    dataset_id: str
    attributes: Mapping[str, str] = field(default_factory=dict)
    stream_names: tuple[str, ...] | None = None

    def validate_against(self, dataset: DatasetMetadata) -> None:
        declared = set(dataset.group_attributes)
        unknown = set(self.attributes) - declared
        if unknown:
            raise InvariantError(
                f"query attributes not declared in dataset groups: {sorted(unknown)}"
            )


@dataclass(frozen=True)
class Locator:
    """Where the data behind one resolved stream lives."""

    path: str
    format: str = "csv"
    column_map: Mapping[str, str] = field(default_factory=dict)

    def column_for(self, channel: str) -> str:
        return self.column_map.get(channel, channel)


@dataclass(frozen=True)
class ResolvedStream:
    """One concrete stream a query resolved to."""

    metadata: StreamMetadata
    locator: Locator
    attributes: Mapping[str, str] = field(default_factory=dict)


def substitute_stream_id(template_id: str, attributes: Mapping[str, str]) -> str:
    """Build a unique stream id from a template and an attribute combination.

    ``{attribute}`` placeholders are substituted; attributes the template
    does not consume are appended as sorted ``key=value`` suffixes so two
    combinations never collide.
    """
    import string

    consumed = set()
    out = []
    for literal, name, _, _ in string.Formatter().parse(template_id):
        out.append(literal)
        if name is not None:
            if name not in attributes:
                raise InvariantError(
                    f"stream_id template {template_id!r} references "
                    f"unknown attribute {name!r}"
                )
            out.append(str(attributes[name]))
            consumed.add(name)
    leftover = sorted(set(attributes) - consumed)
    if leftover:
        out.append(":" + ",".join(f"{k}={attributes[k]}" for k in leftover))
    return "".join(out)


def _freeze_str_tuple(values: Sequence[str]) -> tuple[str, ...]:
    return tuple(str(v) for v in values)
