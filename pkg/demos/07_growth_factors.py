"""Growth factor: how a node reshapes data volume, known before runtime.

A stream's nominal volume is frequency x total channel word size. The
growth factor of a node is outbound volume over inbound volume, computed
purely from metadata: a strided mean compresses 50:1 (GF 0.02), a
derivative that promotes i32 to f64 doubles bytes (GF 2.00), a smoother
changes nothing (GF 1.00), and a classifier whose output size depends on
the data gets no number at all.
"""

from streamloom.heuristics.bench import bench_node, format_table

reports = [
    bench_node("mean", {"window": 50, "stride": 50},
               n_samples=2000, rate_hz=50.0),
    bench_node("differentiate", {}, n_samples=2000, rate_hz=50.0,
               dtype="i32"),
    bench_node("smooth", {"cutoff_hz": 5.0}, n_samples=2000, rate_hz=50.0),
    bench_node("ivt_threshold", {}, n_samples=2000, rate_hz=50.0),
]
print(format_table(reports))

print("\nreading the GF column: 0.02 = 50x compression, 2.00 = byte "
      "doubling,\n1.00 = neutral, blank = volume depends on the data")
