"""Rescaling of edge weights by the expected k-mer duplication factor."""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Tuple

import numpy as np
from numba import njit

from ._atomics import atomic_store
from .arena import NULL


@dataclass(frozen=True)
class NormalizationParams:
    num_reads: int
    read_length: int
    k: int
    genome_size: int

    def __post_init__(self):
        if self.genome_size < 1:
            raise ValueError("genome_size must be at least 1")
        if self.num_reads < 0:
            raise ValueError("num_reads must be non-negative")
        if self.read_length < self.k:
            raise ValueError(f"read_length {self.read_length} is shorter than k={self.k}")


def duplicates_factor(p: NormalizationParams) -> Fraction:
    """Expected copies of each genomic k-mer among the reads, never below 1.

    ``num_reads * (read_length - k + 1) / genome_size``, as an exact fraction.
    """
    f = Fraction(p.num_reads * (p.read_length - p.k + 1), p.genome_size)
    return max(f, Fraction(1))


def normalized_weight(count: int, factor: Fraction) -> int:
    """``round_half_up(count / factor)`` in exact integer arithmetic."""
    return (2 * count * factor.denominator + factor.numerator) // (2 * factor.numerator)


@njit(nogil=True, cache=True)
def _normalize_range(heads, nxt, counters, num, den, lo, hi):
    for h in range(lo, hi):
        v = heads[h]
        while v != NULL:
            for j in range(4 * v, 4 * v + 4):
                c = np.int64(counters[j])
                counters[j] = (2 * c * den + num) // (2 * num)
            v = nxt[v]


def normalize(g, factor: Fraction, lo: int = 0, hi=None) -> None:
    """Divide every counter of the nodes chained at heads ``lo..hi-1`` by ``factor``.

    Rounds half up; a positive count that rounds to zero drops the edge
    (successor links are left in place; "present" means counter > 0).
    """
    factor = Fraction(factor)
    if factor < 1:
        raise ValueError("factor must be at least 1")
    hi = g.table_size if hi is None else hi
    _normalize_range(g.heads, g.store.next, g.store.counters, factor.numerator,
                     factor.denominator, lo, hi)


def table_ranges(n: int, workers: int) -> List[Tuple[int, int]]:
    """Split ``0..n-1`` into ``workers`` contiguous, disjoint ranges."""
    bounds = [n * w // workers for w in range(workers + 1)]
    return list(zip(bounds[:-1], bounds[1:]))


def normalize_parallel(g, factor: Fraction, workers: int = 1) -> None:
    """Normalise the whole table with ``workers`` threads on disjoint head ranges."""
    ranges = table_ranges(g.table_size, workers)
    if workers == 1:
        normalize(g, factor)
        return
    with ThreadPoolExecutor(max_workers=workers) as ex:
        for f in [ex.submit(normalize, g, factor, lo, hi) for lo, hi in ranges]:
            f.result()



@njit(nogil=True, cache=True)
def _mark_targets(heads, nxt, counters, succ, has_in, lo, hi):
    for h in range(lo, hi):
        v = heads[h]
        while v != NULL:
            for j in range(4 * v, 4 * v + 4):
                if counters[j] > 0:
                    atomic_store(has_in, succ[j], 1)
            v = nxt[v]


@njit(nogil=True, cache=True)
def _reset_first(heads, nxt, counters, first, has_in, lo, hi):
    for h in range(lo, hi):
        v = heads[h]
        while v != NULL:
            out = 0
            for j in range(4 * v, 4 * v + 4):
                if counters[j] > 0:
                    out += 1
            first[v] = 1 if (has_in[v] == 0 and out > 0) else 0
            v = nxt[v]


def refresh_first_flags(g, workers: int = 1) -> None:
    """Recompute ``first`` from the edges still present after normalisation.

    A vertex becomes a path start when it has an outgoing edge but no
    incoming one. Right after the build this is exactly the build-time
    flag, so on an un-normalised graph the pass changes nothing; after
    normalisation it turns vertices stranded behind a dropped edge into
    start points. Two barrier-separated passes over disjoint head ranges:
    mark edge targets (idempotent atomic stores, possibly into other
    ranges), then rewrite the flags of the range's own nodes.
    """
    s = g.store
    has_in = np.zeros(s.capacity, dtype=np.uint8)
    ranges = table_ranges(g.table_size, workers)
    with ThreadPoolExecutor(max_workers=workers) as ex:
        for f in [ex.submit(_mark_targets, g.heads, s.next, s.counters, s.successors, has_in,
                            lo, hi) for lo, hi in ranges]:
            f.result()
        for f in [ex.submit(_reset_first, g.heads, s.next, s.counters, s.first, has_in, lo, hi)
                  for lo, hi in ranges]:
            f.result()
