"""How substitution errors inflate the graph and fragment the assembly.

Every error creates up to k spurious k-mers, so the vertex count grows
with the error rate while the genome fraction of long contigs falls.

    python demos/error_rate_sweep.py
"""

from lockfree_dbg import RunConfig, SimulationConfig, run_assembly

print(f"{'error':>6} {'vertices':>10} {'contigs':>8} {'N50':>7} {'fraction %':>10}")
for rate in (0.0, 0.01, 0.05, 0.10):
    sim = SimulationConfig(50_000, read_length=200, coverage=50, error_rate=rate, seed=9)
    r = run_assembly(RunConfig(k=31, workers=4, simulation=sim))
    s = r.stats
    print(f"{rate:>6.2f} {r.vertices:>10} {s.contig_count:>8} {s.n50:>7} "
          f"{s.genome_fraction:>10.2f}")
