"""Walk the bundled datasets: discover, query, resolve.

A dataset document declares streams with placeholder ids like
gaze/{subject}/{task}; the resolver turns a query into concrete streams
by matching its file pattern against what actually exists on disk.
"""

from pathlib import Path

from streamloom import StreamQuery, discover_datasets, resolve

ROOT = Path(__file__).parent.parent / "datasets"

datasets = discover_datasets(ROOT)
print(f"found {len(datasets)} datasets under {ROOT}:")
for ds in datasets:
    streams = resolve(ds, StreamQuery(ds.dataset_id))
    print(f"  {ds.dataset_id}: {ds.identification.title!r}, "
          f"{len(streams)} resolvable streams")
    for rs in streams:
        meta = rs.metadata
        names = ",".join(meta.channel_names)
        print(f"    {meta.stream_id}  {meta.frequency_hz:g} Hz  [{names}]  "
              f"<- {Path(rs.locator.path).relative_to(ROOT)}")

# attribute queries narrow by the declared group attributes
gaze = next(ds for ds in datasets if ds.dataset_id == "synthetic-gaze")
narrowed = resolve(gaze, StreamQuery("synthetic-gaze",
                                     attributes={"subject": "s01"}))
print("\nsubject=s01 narrows to:", [rs.metadata.stream_id for rs in narrowed])
