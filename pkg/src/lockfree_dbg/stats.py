"""Assembly metrics: N50/L50, NG50/LG50 and exact-match genome fraction."""

from dataclasses import asdict, dataclass
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np

DEFAULT_MIN_LENGTH = 500


@dataclass
class AssemblyStats:
    contig_count: int = 0
    longest: int = 0
    total_length: int = 0
    n50: int = 0
    l50: int = 0
    ng50: Optional[int] = None
    lg50: Optional[int] = None
    genome_fraction: Optional[float] = None
    unmatched_contigs: Optional[int] = None

    def to_text(self) -> str:
        """``key=value`` lines; fields that were not computed are omitted."""
        lines = []
        for key, value in asdict(self).items():
            if value is None:
                continue
            if isinstance(value, float):
                value = f"{value:.4f}"
            lines.append(f"{key}={value}")
        return "\n".join(lines) + "\n"

    def format_table(self) -> str:
        rows = [
            ("contigs", self.contig_count),
            ("longest contig", self.longest),
            ("total length", self.total_length),
            ("N50", self.n50),
            ("L50", self.l50),
        ]
        if self.ng50 is not None:
            rows += [("NG50", self.ng50), ("LG50", self.lg50)]
        if self.genome_fraction is not None:
            rows += [("genome fraction (%)", f"{self.genome_fraction:.2f}"),
                     ("unmatched contigs", self.unmatched_contigs)]
        width = max(len(name) for name, _ in rows)
        return "\n".join(f"{name:<{width}}  {value}" for name, value in rows) + "\n"


def n50_l50(lengths: Sequence[int], target: int) -> Tuple[int, int]:
    """Length at which the longest-first running sum reaches ``target / 2``.

    Returns ``(length, number_of_contigs_used)``, or ``(0, 0)`` when the
    contigs together never reach half of ``target``. Pass the assembly total
    for N50/L50 and the reference size for NG50/LG50.
    """
    running = 0
    for i, length in enumerate(sorted(lengths, reverse=True), 1):
        running += length
        if 2 * running >= target:
            return int(length), i
    return 0, 0


def _sequences(contigs: Iterable) -> List[str]:
    return [c if isinstance(c, str) else c.sequence for c in contigs]


def genome_coverage(contigs: Iterable, reference: str) -> Tuple[float, int]:
    """Percent of reference positions covered by an exact contig occurrence,
    and the number of contigs that occur nowhere in the reference.
    """
    seqs = _sequences(contigs)
    G = len(reference)
    if G == 0:
        return 0.0, len(seqs)
    delta = np.zeros(G + 1, dtype=np.int64)
    unmatched = 0
    for seq in seqs:
        pos = reference.find(seq)
        if pos < 0 or not seq:
            unmatched += 1
            continue
        while pos >= 0:
            delta[pos] += 1
            delta[pos + len(seq)] -= 1
            pos = reference.find(seq, pos + 1)
    covered = np.count_nonzero(np.cumsum(delta[:G]) > 0)
    return 100.0 * covered / G, unmatched


def genome_fraction(contigs: Iterable, reference: str) -> float:
    return genome_coverage(contigs, reference)[0]


def compute_stats(contigs: Iterable, min_length: int = DEFAULT_MIN_LENGTH,
                  genome_size: Optional[int] = None,
                  reference: Optional[str] = None) -> AssemblyStats:
    """Metrics over contigs of at least ``min_length`` bases.

    NG50/LG50 need ``genome_size`` (taken from ``reference`` if omitted);
    the genome fraction needs ``reference``.
    """
    seqs = [s for s in _sequences(contigs) if len(s) >= min_length]
    if genome_size is None and reference is not None:
        genome_size = len(reference)
    stats = AssemblyStats()
    if seqs:
        lengths = [len(s) for s in seqs]
        stats.contig_count = len(seqs)
        stats.longest = max(lengths)
        stats.total_length = sum(lengths)
        stats.n50, stats.l50 = n50_l50(lengths, stats.total_length)
        if genome_size:
            stats.ng50, stats.lg50 = n50_l50(lengths, genome_size)
    elif genome_size:
        stats.ng50, stats.lg50 = 0, 0
    if reference is not None:
        stats.genome_fraction, stats.unmatched_contigs = genome_coverage(seqs, reference)
    return stats
