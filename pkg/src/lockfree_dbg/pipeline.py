"""End-to-end assembly runs and thread-count sweeps.

Each phase (build, normalise, extract) fans out to ``workers`` threads and
joins before the next one starts, so no graph mutation crosses a phase
boundary. Times are wall-clock milliseconds from ``time.perf_counter``.
"""

import hashlib
import logging
import os
import time
from contextlib import contextmanager
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional, Sequence

from .contigs import Contig, extract_contigs
from .graph import Graph, build_graph, make_graph, snapshot_canonical
from .normalize import (NormalizationParams, duplicates_factor, normalize_parallel,
                        refresh_first_flags)
from .reads import ReadSet, load_reads, partition, write_fasta
from .simulate import SimulationConfig, simulate
from .stats import DEFAULT_MIN_LENGTH, AssemblyStats, compute_stats

logger = logging.getLogger(__name__)

DEFAULT_K = 51
THREADS_PER_CORE = 4


class ConfigError(ValueError):
    pass


class PipelineError(RuntimeError):
    """A phase failed; ``phase`` names it."""

    def __init__(self, phase: str, cause: BaseException):
        super().__init__(f"[{phase}] {type(cause).__name__}: {cause}")
        self.phase = phase


def default_workers() -> int:
    return THREADS_PER_CORE * (os.cpu_count() or 1)


@dataclass
class RunConfig:
    k: int = DEFAULT_K
    workers: Optional[int] = None
    table_size: Optional[int] = None
    genome_size: Optional[int] = None
    input: Optional[str] = None
    simulation: Optional[SimulationConfig] = None
    output: Optional[str] = None
    min_contig_length: int = DEFAULT_MIN_LENGTH
    normalize: bool = True
    report: Optional[str] = None
    dump_graph: Optional[str] = None

    def validate(self) -> None:
        if (self.input is None) == (self.simulation is None):
            raise ConfigError("exactly one of an input file or a simulation is required")
        if self.simulation is not None:
            if self.genome_size not in (None, self.simulation.genome_size):
                raise ConfigError("genome size conflicts with the simulation genome size")
            self.genome_size = self.simulation.genome_size
        if self.genome_size is None:
            raise ConfigError("genome size is required when reading from a file")
        if self.genome_size < 1:
            raise ConfigError("genome size must be at least 1")
        if self.k < 2:
            raise ConfigError("k must be at least 2")
        if self.workers is None:
            self.workers = default_workers()
        if self.workers < 1:
            raise ConfigError("workers must be at least 1")
        if self.table_size is None:
            self.table_size = self.genome_size
        if self.table_size < 1:
            raise ConfigError("table size must be at least 1")
        if self.min_contig_length < 0:
            raise ConfigError("min contig length must be non-negative")


@dataclass
class RunReport:
    config: Dict
    timings_ms: Dict[str, float]
    stats: AssemblyStats
    num_reads: int
    vertices: int
    factor: str
    peak_memory_kb: Optional[int] = None
    contigs: List[Contig] = field(default_factory=list, repr=False)

    def to_text(self) -> str:
        lines = [f"config.{k}={v}" for k, v in self.config.items() if v is not None]
        lines += [f"reads={self.num_reads}", f"vertices={self.vertices}",
                  f"duplicates_factor={self.factor}"]
        lines += [f"time_ms.{k}={v:.1f}" for k, v in self.timings_ms.items()]
        if self.peak_memory_kb is not None:
            lines.append(f"peak_memory_kb={self.peak_memory_kb}")
        return "\n".join(lines) + "\n" + self.stats.to_text()


@dataclass
class BenchmarkRow:
    workers: int
    build_ms: float
    total_ms: float
    snapshot_sha256: Optional[str] = None


def peak_memory_kb() -> Optional[int]:
    """Peak resident set size of this process, where the platform reports it."""
    try:
        import resource
        import sys
    except ImportError:
        return None
    rss = resource.getrusage(resource.RUSAGE_SELF).ru_maxrss
    return rss // 1024 if sys.platform == "darwin" else rss


@contextmanager
def _phase(name: str, timings: Dict[str, float]):
    t0 = time.perf_counter()
    try:
        yield
    except (OSError, MemoryError, ValueError, RuntimeError) as exc:
        if isinstance(exc, PipelineError):
            raise
        raise PipelineError(name, exc) from exc
    finally:
        timings[name] = 1000.0 * (time.perf_counter() - t0)


def warm_up() -> None:
    """Compile (or load from cache) every kernel on a toy graph."""
    g = Graph(4, 8)
    make_graph(g, ["ACGTACGTTGCA"])
    normalize_parallel(g, duplicates_factor(NormalizationParams(2, 12, 4, 9)), 2)
    refresh_first_flags(g, 2)
    extract_contigs(g, 2)
    build_graph(Graph(4, 8), [["ACGTAC"], ["CGTACG"]])


def canonical_order(contigs: Sequence[Contig]) -> List[Contig]:
    """Longest first, ties by sequence: independent of scheduling."""
    return sorted(contigs, key=lambda c: (-len(c.sequence), c.sequence))


def contig_records(contigs: Sequence[Contig]):
    for i, c in enumerate(canonical_order(contigs), 1):
        yield f"contig_{i} len={len(c.sequence)} start={c.start_label}", c.sequence


def normalization_factor(reads: ReadSet, k: int, genome_size: int, read_length=None):
    if reads.num_reads == 0:
        return duplicates_factor(NormalizationParams(0, k, k, genome_size))
    if read_length is None:
        read_length = max(k, round(reads.total_bases / reads.num_reads))
    return duplicates_factor(NormalizationParams(reads.num_reads, read_length, k, genome_size))


def assemble(reads: ReadSet, k: int, table_size: int, workers: int, factor=None,
             timings: Optional[Dict[str, float]] = None):
    """Build, optionally normalise, and extract. Returns ``(graph, contigs)``."""
    timings = {} if timings is None else timings
    with _phase("build", timings):
        g = Graph.for_reads(reads, k, table_size, workers)
        build_graph(g, partition(reads, workers))
    with _phase("normalize", timings):
        if factor is not None:
            normalize_parallel(g, factor, workers)
            refresh_first_flags(g, workers)
    with _phase("contigs", timings):
        contigs = extract_contigs(g, workers)
    return g, contigs


def run_assembly(cfg: RunConfig) -> RunReport:
    """Load or simulate reads, assemble, write outputs and compute statistics."""
    cfg.validate()
    warm_up()
    timings: Dict[str, float] = {}
    t0 = time.perf_counter()
    reference = None
    read_length = None
    with _phase("load", timings):
        if cfg.simulation is not None:
            reference, reads = simulate(cfg.simulation)
            read_length = cfg.simulation.read_length
        else:
            reads = load_reads(cfg.input)
    logger.info("loaded %d reads (%d bases)", reads.num_reads, reads.total_bases)

    factor = None
    if cfg.normalize:
        factor = normalization_factor(reads, cfg.k, cfg.genome_size, read_length)
    g, contigs = assemble(reads, cfg.k, cfg.table_size, cfg.workers, factor, timings)
    logger.info("graph: %d vertices, %d contigs", len(g), len(contigs))

    with _phase("output", timings):
        if cfg.output:
            write_fasta(cfg.output, contig_records(contigs))
        if cfg.dump_graph:
            with open(cfg.dump_graph, "w") as fh:
                fh.write(snapshot_canonical(g))
    with _phase("stats", timings):
        stats = compute_stats(contigs, cfg.min_contig_length, cfg.genome_size, reference)
    timings["total"] = 1000.0 * (time.perf_counter() - t0)

    config = asdict(cfg)
    sim = config.pop("simulation")
    if sim:
        config.update({f"sim_{k}": v for k, v in sim.items()})
    report = RunReport(config, timings, stats, reads.num_reads, len(g),
                       str(factor) if factor is not None else "off",
                       peak_memory_kb(), canonical_order(contigs))
    if cfg.report:
        with open(cfg.report, "w") as fh:
            fh.write(report.to_text())
    return report


def run_benchmark(reads: ReadSet, k: int, table_size: int, worker_counts: Sequence[int],
                  factor=None, verify: bool = True) -> List[BenchmarkRow]:
    """Assemble the same in-memory reads once per worker count.

    With ``verify`` each row carries the SHA-256 of the canonical graph
    snapshot, which must agree across rows.
    """
    warm_up()
    rows = []
    for w in worker_counts:
        timings: Dict[str, float] = {}
        g, _ = assemble(reads, k, table_size, w, factor, timings)
        digest = None
        if verify:
            digest = hashlib.sha256(snapshot_canonical(g).encode()).hexdigest()
        total = timings["build"] + timings["normalize"] + timings["contigs"]
        rows.append(BenchmarkRow(w, timings["build"], total, digest))
        logger.info("workers=%d build=%.1fms", w, timings["build"])
    return rows


def format_benchmark(rows: Sequence[BenchmarkRow]) -> str:
    lines = ["workers\tbuild_ms\ttotal_ms\tsnapshot_sha256"]
    lines += [f"{r.workers}\t{r.build_ms:.1f}\t{r.total_ms:.1f}\t{r.snapshot_sha256 or '-'}"
              for r in rows]
    return "\n".join(lines) + "\n"
