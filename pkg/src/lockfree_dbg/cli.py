"""Command-line entry point: ``lfdbg-assemble`` / ``python -m lockfree_dbg``."""

import argparse
import logging
import sys
from typing import List, Optional

from .pipeline import (ConfigError, PipelineError, RunConfig, default_workers,
                       format_benchmark, normalization_factor, run_assembly, run_benchmark)
from .reads import load_reads
from .simulate import SimulationConfig, simulate
from .stats import DEFAULT_MIN_LENGTH


def _int_list(text: str) -> List[int]:
    try:
        values = [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")
    if not values or min(values) < 1:
        raise argparse.ArgumentTypeError("thread counts must be positive")
    return values


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="lfdbg-assemble",
        description="Assemble reads with a lock-free weighted de Bruijn graph.")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--input", metavar="PATH", help="FASTA/FASTQ reads (.gz allowed)")
    src.add_argument("--simulate", action="store_true",
                     help="simulate a random genome and reads instead of loading a file")
    p.add_argument("--genome-size", type=int,
                   help="approximate genome size (required unless simulating)")
    p.add_argument("--k", type=int, default=51, help="k-mer length (default: 51)")
    p.add_argument("--threads", type=int, default=None,
                   help=f"worker threads (default: 4 x cores = {default_workers()})")
    p.add_argument("--table-size", type=int, help="hash table heads (default: genome size)")
    p.add_argument("--output", metavar="PATH", default="contigs.fasta",
                   help="contig FASTA output (default: contigs.fasta)")
    p.add_argument("--min-contig", type=int, default=DEFAULT_MIN_LENGTH,
                   help="minimum contig length counted in statistics (default: 500)")
    p.add_argument("--no-normalize", action="store_true", help="skip weight normalisation")
    p.add_argument("--seed", type=int, default=0, help="simulation seed")
    p.add_argument("--coverage", type=float, default=30.0, help="simulated coverage")
    p.add_argument("--read-length", type=int, default=200, help="simulated read length")
    p.add_argument("--error-rate", type=float, default=0.0,
                   help="simulated per-base substitution rate")
    p.add_argument("--bench", type=_int_list, metavar="T1,T2,...",
                   help="sweep thread counts over the same reads and print timings")
    p.add_argument("--report", metavar="PATH", help="write the run report to a file")
    p.add_argument("--dump-graph", metavar="PATH", help="write the canonical graph dump")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def config_from_args(args) -> RunConfig:
    sim = None
    if args.simulate:
        if args.genome_size is None:
            raise ConfigError("--simulate needs --genome-size")
        sim = SimulationConfig(args.genome_size, args.read_length, args.coverage,
                               args.error_rate, args.seed)
    return RunConfig(k=args.k, workers=args.threads, table_size=args.table_size,
                     genome_size=args.genome_size, input=args.input, simulation=sim,
                     output=args.output, min_contig_length=args.min_contig,
                     normalize=not args.no_normalize, report=args.report,
                     dump_graph=args.dump_graph)


def _bench(cfg: RunConfig, counts: List[int]) -> str:
    if cfg.simulation is not None:
        _, reads = simulate(cfg.simulation)
        read_length = cfg.simulation.read_length
    else:
        reads = load_reads(cfg.input)
        read_length = None
    factor = None
    if cfg.normalize:
        factor = normalization_factor(reads, cfg.k, cfg.genome_size, read_length)
    rows = run_benchmark(reads, cfg.k, cfg.table_size, counts, factor)
    return format_benchmark(rows)


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = config_from_args(args)
        cfg.validate()
        if args.bench:
            sys.stdout.write(_bench(cfg, args.bench))
            return 0
        report = run_assembly(cfg)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (PipelineError, OSError, MemoryError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    sys.stdout.write(report.stats.format_table())
    sys.stdout.write(report.to_text())
    return 0


if __name__ == "__main__":
    sys.exit(main())
