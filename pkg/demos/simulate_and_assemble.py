"""Simulate an error-free genome and assemble it end to end.

    python demos/simulate_and_assemble.py [genome_size] [threads]
"""

import sys

from lockfree_dbg import RunConfig, SimulationConfig, run_assembly

size = int(sys.argv[1]) if len(sys.argv) > 1 else 20_000
threads = int(sys.argv[2]) if len(sys.argv) > 2 else 4

cfg = RunConfig(k=31, workers=threads,
                simulation=SimulationConfig(size, read_length=200, coverage=30, seed=1))
report = run_assembly(cfg)

print(report.stats.format_table())
print(f"{report.num_reads} reads, {report.vertices} vertices, factor {report.factor}")
for phase, ms in report.timings_ms.items():
    print(f"  {phase:<10} {ms:8.1f} ms")
