"""Mapping queries against a dataset onto concrete data streams.

Two resolver kinds exist. The declarative resolver enumerates the file
system against a ``{attribute}`` path pattern, so CSV datasets need no
code at all. The external resolver runs a command and speaks a
line-delimited JSON contract:

* the engine writes exactly one line to the process's standard input:
  ``{"query": {"dataset_id": ..., "attributes": {...}, "stream_names": [...]}}``
* the process writes one JSON value per line, each a resolved-stream
  descriptor ``{"metadata": ..., "locator": ..., "attributes": ...}``,
  then exits 0.

A nonzero exit or a malformed line raises :class:`ResolverError`. An
empty result is not an error.
"""

from __future__ import annotations

import json
import re
import subprocess
from pathlib import Path

from ..errors import InvariantError, LoomError, ResolverError
from .jsonio import canonical_json_bytes, parse_resolved_stream, query_doc
from .types import (
    DatasetMetadata,
    Locator,
    ResolvedStream,
    StreamQuery,
    substitute_stream_id,
)

_EXTERNAL_TIMEOUT_S = 30.0


def resolve(
    dataset: DatasetMetadata,
    query: StreamQuery,
    *,
    base_dir: str | None = None,
) -> list[ResolvedStream]:
    """Resolve a query to the concrete streams it matches.

    Returns one :class:`ResolvedStream` per (attribute combination x
    stream template) matching the query. Partial queries expand over all
    values of unspecified attributes found on disk. Attribute values are
    substituted into the template stream ids so ids stay unique.
    """
    query.validate_against(dataset)
    base = base_dir or dataset.base_dir or "."
    if dataset.resolver is None:
        return []
    if dataset.resolver.kind == "external":
        return _resolve_external(dataset, query, base)
    return _resolve_declarative(dataset, query, base)


def _select_templates(dataset: DatasetMetadata, query: StreamQuery):
    templates = dataset.streams
    if query.stream_names is not None:
        wanted = set(query.stream_names)
        templates = tuple(t for t in templates if t.name in wanted)
    return templates


def _resolve_declarative(dataset, query, base) -> list[ResolvedStream]:
    ref = dataset.resolver
    placeholders = ref.placeholders
    pattern = ref.file_pattern

    glob_pattern = pattern
    for name in placeholders:
        value = query.attributes.get(name, "*")
        glob_pattern = glob_pattern.replace("{%s}" % name, str(value))

    regex = _pattern_regex(pattern)
    root = Path(base)
    combos: list[tuple[dict, Path]] = []
    for path in sorted(root.glob(glob_pattern)):
        rel = path.relative_to(root).as_posix()
        m = regex.fullmatch(rel)
        if not m:
            continue
        attrs = dict(m.groupdict())
        if any(str(query.attributes[k]) != attrs.get(k) for k in query.attributes):
            continue
        combos.append((attrs, path))

    resolved = []
    for attrs, path in combos:
        for template in _select_templates(dataset, query):
            channel_names = set(template.channel_names)
            column_map = {
                ch: col for ch, col in ref.column_map.items() if ch in channel_names
            }
            resolved.append(
                ResolvedStream(
                    metadata=template.replace(
                        stream_id=substitute_stream_id(template.stream_id, attrs)
                    ),
                    locator=Locator(
                        path=str(path), format=ref.format, column_map=column_map
                    ),
                    attributes=attrs,
                )
            )
    return resolved


def _pattern_regex(pattern: str) -> re.Pattern:
    """Turn a ``{attribute}`` file pattern into a value-extracting regex."""
    import string

    parts = []
    for literal, name, _, _ in string.Formatter().parse(pattern):
        parts.append(re.escape(literal))
        if name is not None:
            parts.append(f"(?P<{name}>[^/]+)")
    return re.compile("".join(parts))


def _resolve_external(dataset, query, base) -> list[ResolvedStream]:
    request = canonical_json_bytes({"query": query_doc(query)}) + b"\n"
    try:
        proc = subprocess.run(
            list(dataset.resolver.command),
            input=request,
            capture_output=True,
            cwd=base,
            timeout=_EXTERNAL_TIMEOUT_S,
        )
    except OSError as e:
        raise ResolverError(f"failed to run resolver command: {e}") from e
    except subprocess.TimeoutExpired as e:
        raise ResolverError(f"resolver timed out after {_EXTERNAL_TIMEOUT_S}s") from e
    if proc.returncode != 0:
        detail = proc.stderr.decode("utf-8", "replace").strip()
        raise ResolverError(
            f"resolver exited with status {proc.returncode}: {detail}"
        )
    resolved = []
    for lineno, line in enumerate(proc.stdout.splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        try:
            doc = json.loads(line)
            stream = parse_resolved_stream(doc, f"reply line {lineno}")
        except (json.JSONDecodeError, LoomError) as e:
            raise ResolverError(f"malformed resolver reply on line {lineno}: {e}") from e
        path = Path(stream.locator.path)
        if not path.is_absolute():
            stream = ResolvedStream(
                metadata=stream.metadata,
                locator=Locator(
                    path=str(Path(base) / path),
                    format=stream.locator.format,
                    column_map=stream.locator.column_map,
                ),
                attributes=stream.attributes,
            )
        resolved.append(stream)
    return resolved
