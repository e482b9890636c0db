"""Contig extraction: maximal unambiguous walks from start vertices.

A walk starts at every vertex that either has ``first`` set (no incoming
k-mer was ever seen) or has two or more outgoing edges; a branching vertex
starts one walk per outgoing edge. A walk extends while the current vertex
has exactly one outgoing edge. An edge is present when its counter is
positive, so edges zeroed by normalisation are ignored.

Walks never consume edge multiplicity. A walk also stops when it returns to
its own start vertex, or after ``max(N, allocated slots) + k`` steps, which
bounds walks that fall into a cycle not containing the start.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import List, Optional, Union

import numpy as np
from numba import njit

from .arena import NULL
from .graph import Graph, Node, _base_code
from .normalize import table_ranges
from .sequence import ALPHABET_BYTES

_ALPHABET = np.frombuffer(ALPHABET_BYTES, dtype=np.uint8).copy()


@dataclass(frozen=True)
class Contig:
    sequence: str
    start_label: str

    def __len__(self) -> int:
        return len(self.sequence)


@njit(nogil=True, cache=True)
def _out_degree(counters, v):
    d = 0
    for j in range(4 * v, 4 * v + 4):
        if counters[j] > 0:
            d += 1
    return d


@njit(nogil=True, cache=True)
def _only_base(counters, v):
    for b in range(4):
        if counters[4 * v + b] > 0:
            return b
    return -1


@njit(nogil=True, cache=True)
def _reserve(buf, used, extra):
    if used + extra <= buf.shape[0]:
        return buf
    grown = np.empty(max(2 * buf.shape[0], used + extra), dtype=buf.dtype)
    grown[:used] = buf[:used]
    return grown


@njit(nogil=True, cache=True)
def _walk(labels, counters, succ, L, start, first_base, cap, buf, used):
    """Append one contig to ``buf[used:]``; returns ``(buf, new_used)``."""
    buf = _reserve(buf, used, L + 64)
    for j in range(L):
        buf[used + j] = labels[start * L + j]
    used += L
    if first_base >= 0:
        b = first_base
    elif _out_degree(counters, start) == 1:
        b = _only_base(counters, start)
    else:
        return buf, used
    cur = start
    steps = 0
    while True:
        nxt = succ[4 * cur + b]
        if nxt == NULL:
            raise RuntimeError("present edge without successor link")
        buf = _reserve(buf, used, 1)
        buf[used] = _ALPHABET[b]
        used += 1
        steps += 1
        cur = nxt
        if cur == start or steps >= cap:
            break
        if _out_degree(counters, cur) != 1:
            break
        b = _only_base(counters, cur)
    return buf, used


@njit(nogil=True, cache=True)
def _find_contigs_range(heads, nxt, labels, counters, succ, first, L, cap, lo, hi):
    buf = np.empty(1024, dtype=np.uint8)
    ends = np.empty(64, dtype=np.int64)
    used = 0
    n = 0
    for h in range(lo, hi):
        v = heads[h]
        while v != NULL:
            d = _out_degree(counters, v)
            if d >= 2:
                for b in range(4):
                    if counters[4 * v + b] > 0:
                        buf, used = _walk(labels, counters, succ, L, v, b, cap, buf, used)
                        ends = _reserve(ends, n, 1)
                        ends[n] = used
                        n += 1
            elif first[v]:
                buf, used = _walk(labels, counters, succ, L, v, -1, cap, buf, used)
                ends = _reserve(ends, n, 1)
                ends[n] = used
                n += 1
            v = nxt[v]
    return buf[:used], ends[:n]


def _walk_cap(g: Graph) -> int:
    allocated = g.store.blocks_allocated * g.store.block_capacity
    return max(g.table_size, allocated) + g.k


def out_degree(node: Node) -> int:
    """Number of outgoing edges with a positive weight."""
    return int(_out_degree(node.graph.store.counters, node.index))


def only_one_path(node: Node) -> bool:
    return out_degree(node) == 1


def make_path(start: Node, first_base: Optional[Union[int, str]] = None) -> Contig:
    """Spell the walk from ``start``, optionally forcing the first edge."""
    g = start.graph
    s = g.store
    fb = -1
    if first_base is not None:
        fb = _base_code(first_base)
        if start.counter(fb) == 0:
            raise ValueError(f"{start.label} has no edge on {first_base!r}")
    buf, used = _walk(s.labels, s.counters, s.successors, g.k - 1, start.index, fb,
                      _walk_cap(g), np.empty(256, dtype=np.uint8), 0)
    return Contig(buf[:used].tobytes().decode("ascii"), start.label)


def find_contigs(g: Graph, lo: int = 0, hi: Optional[int] = None) -> List[Contig]:
    """Contigs started from the vertices chained at heads ``lo..hi-1``."""
    hi = g.table_size if hi is None else hi
    s = g.store
    L = g.k - 1
    buf, ends = _find_contigs_range(g.heads, s.next, s.labels, s.counters, s.successors,
                                    s.first, L, _walk_cap(g), lo, hi)
    text = buf.tobytes().decode("ascii")
    out = []
    prev = 0
    for end in ends.tolist():
        out.append(Contig(text[prev:end], text[prev:prev + L]))
        prev = end
    return out


def extract_contigs(g: Graph, workers: int = 1) -> List[Contig]:
    """Run :func:`find_contigs` on disjoint table ranges and merge the results."""
    if workers == 1:
        return find_contigs(g)
    ranges = table_ranges(g.table_size, workers)
    with ThreadPoolExecutor(max_workers=workers) as ex:
        parts = [ex.submit(find_contigs, g, lo, hi) for lo, hi in ranges]
        return [c for f in parts for c in f.result()]
