"""Route a long-format weather stream by type and average it weekly.

The weather fixture interleaves four daily metrics in one stream
(channels: type, value). The router fans each frame out to the port
named by its type; a mean node per port then condenses days into
7-day averages.
"""

from pathlib import Path

from streamloom import StreamQuery, discover_datasets, resolve
from streamloom.sources import open_replay
from streamloom.workflow import load_workflow, run_workflow

REPO = Path(__file__).parent.parent

spec = load_workflow((REPO / "workflows" / "weather.workflow.json").read_bytes())
weather = next(ds for ds in discover_datasets(REPO / "datasets")
               if ds.dataset_id == "synthetic-weather")
resolved = resolve(weather, StreamQuery("synthetic-weather",
                                        attributes={"city": "harborview"}))[0]

handle = open_replay(resolved)
result = run_workflow(spec, {"in1.in": (handle.metadata, handle.frames())})

print(f"input: {resolved.metadata.stream_id} "
      f"({sum(1 for _ in open_replay(resolved).frames())} interleaved frames)\n")
for name in ("temperature", "dew_point", "humidity", "wind_speed"):
    sink = result.sinks[name]
    values = [f.values[0] for f in sink.frames]
    print(f"{name:<12} {len(values)} weekly means, "
          f"range {min(values):6.2f} .. {max(values):6.2f}, "
          f"declared {sink.metadata.stream.frequency_hz:g} Hz")

# provenance shows the split: router first, then that branch's mean
temp = result.sinks["temperature"].metadata
print("\ntemperature branch history:",
      " -> ".join(rec.node_id for rec in temp.provenance))
