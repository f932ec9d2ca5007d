"""Recursive discovery of dataset metadata files."""

from __future__ import annotations

import logging
from pathlib import Path

from ..errors import LoomError
from .jsonio import parse_metadata
from .types import DatasetMetadata

log = logging.getLogger(__name__)


def discover_datasets(root: str | Path, *, errors: list | None = None) -> list[DatasetMetadata]:
    """Find, parse and validate every ``*.dataset.json`` under ``root``.

    Results come back in deterministic lexicographic path order, each with
    ``base_dir`` set to its file's directory. A malformed file never aborts
    the scan: if ``errors`` is a list, ``(path, exception)`` pairs are
    appended to it; otherwise failures are logged as warnings.

    Raises ``OSError`` if ``root`` itself is missing or unreadable.
    """
    root = Path(root)
    if not root.is_dir():
        raise FileNotFoundError(f"dataset root is not a directory: {root}")
    datasets = []
    for path in sorted(root.rglob("*.dataset.json")):
        try:
            dataset = parse_metadata(path.read_bytes(), "dataset")
            datasets.append(dataset.with_base_dir(str(path.parent)))
        except (LoomError, OSError) as e:
            if errors is not None:
                errors.append((str(path), e))
            else:
                log.warning("skipping %s: %s", path, e)
    return datasets
