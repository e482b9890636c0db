"""Time the graph build over several thread counts on the same reads.

Each row also carries the SHA-256 of the canonical graph dump, which is
identical for every thread count. Speed-up needs several physical cores.

    python demos/thread_scaling.py [genome_size]
"""

import os
import sys

from lockfree_dbg import SimulationConfig, format_benchmark, run_benchmark, simulate

size = int(sys.argv[1]) if len(sys.argv) > 1 else 200_000
_, reads = simulate(SimulationConfig(size, read_length=200, coverage=10, seed=3))
print(f"{reads.num_reads} reads on {os.cpu_count()} cores")
rows = run_benchmark(reads, k=31, table_size=size, worker_counts=[1, 2, 4, 8])
print(format_benchmark(rows))
