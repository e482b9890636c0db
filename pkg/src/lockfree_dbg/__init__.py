"""Lock-free weighted de Bruijn graph assembly.

Typical use::

    from lockfree_dbg import Graph, build_graph, extract_contigs, partition
    g = Graph.for_reads(reads, k=31, table_size=genome_size, workers=4)
    build_graph(g, partition(reads, 4))
    contigs = extract_contigs(g, workers=4)
"""

from .arena import NodeStore, WorkerPool
from .contigs import Contig, extract_contigs, find_contigs, make_path, only_one_path, out_degree
from .graph import (Graph, Node, add_left_vertex, add_right_vertex, add_vertices, build_graph,
                    find_vertex, hash_index, link_edge, make_graph, snapshot_canonical)
from .normalize import (NormalizationParams, duplicates_factor, normalize, normalize_parallel,
                        normalized_weight, refresh_first_flags)
from .pipeline import RunConfig, RunReport, format_benchmark, run_assembly, run_benchmark
from .reads import Read, ReadFormatError, ReadSet, load_reads, partition, write_fasta
from .sequence import KmerSplit, decode_base, encode_base, kmers, split
from .simulate import SimulationConfig, simulate, simulate_genome, simulate_reads
from .stats import AssemblyStats, compute_stats, genome_fraction, n50_l50

__version__ = "0.1.0"
