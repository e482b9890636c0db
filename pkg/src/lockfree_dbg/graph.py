"""Lock-free weighted de Bruijn graph.

The graph is a fixed-size array of chain heads. Each head is the start of a
singly linked list of nodes whose labels hash to that bucket. Vertices are
(k-1)-mers; each node carries four saturating 8-bit edge counters and four
successor links, indexed by the encoded base of the edge (A, C, T, G).

Concurrent construction uses only four atomic operations: acquire-load of a
chain head, compare-and-swap of a chain head to publish a node, a CAS loop
for saturating counter increments, and release-stores for successor links
and the ``first`` flag. A node's ``next`` link is written before publication
and never changes afterwards, and nothing is ever unlinked, so a failed head
CAS always means another worker inserted something (no ABA).

The hot paths are ``nogil`` numba functions; the Python functions in this
module are thin wrappers over the same code, plus inspection helpers.
"""

from concurrent.futures import ThreadPoolExecutor
from typing import Iterable, List, Optional, Sequence, Union

import numpy as np
from numba import njit

from ._atomics import atomic_cas, atomic_load, atomic_store
from .arena import DEFAULT_BLOCK_CAPACITY, NULL, NodeStore, WorkerPool, pool_acquire, pool_recycle
from .sequence import ALPHABET, encode_base, encode_byte

FNV_OFFSET = np.uint64(0xCBF29CE484222325)
FNV_PRIME = np.uint64(0x100000001B3)
COUNTER_MAX = 255

_VALID = frozenset("ACGT")


# --------------------------------------------------------------------------
# kernels
# --------------------------------------------------------------------------

@njit(nogil=True, cache=True)
def _hash(src, off, length, n):
    # 64-bit FNV-1a over the label bytes, reduced modulo the table size
    h = FNV_OFFSET
    for j in range(length):
        h = (h ^ np.uint64(src[off + j])) * FNV_PRIME
    return np.int64(h % np.uint64(n))


@njit(nogil=True, cache=True)
def _scan(labels, nxt, L, src, off, v, stop):
    # walk a chain from node v up to (not including) stop
    while v != stop:
        base = v * L
        same = True
        for j in range(L):
            if labels[base + j] != src[off + j]:
                same = False
                break
        if same:
            return v
        v = nxt[v]
    return NULL


@njit(nogil=True, cache=True)
def _find(heads, labels, nxt, L, src, off, h):
    return _scan(labels, nxt, L, src, off, atomic_load(heads, h), NULL)


@njit(nogil=True, cache=True)
def _bump(counters, idx):
    # saturating increment: read, clamp-add, CAS, retry
    while True:
        c = atomic_load(counters, idx)
        if c == COUNTER_MAX:
            return
        if atomic_cas(counters, idx, c, c + 1) == c:
            return


@njit(nogil=True, cache=True)
def _touch(G, v, base, is_left):
    counters, first = G[2], G[5]
    if is_left:
        _bump(counters, 4 * v + base)
    else:
        atomic_store(first, v, 0)


@njit(nogil=True, cache=True)
def _stage(G, L, bc, state, free_list, src, off, head, base, is_left):
    """Prepare an unpublished node: label copied, edge pre-counted, next = head.

    ``head`` must be a chain head already searched without finding the label.
    """
    heads, labels, counters, succ, nxt, first, published, blocks = G
    v = pool_acquire(state, free_list, blocks, bc, labels, L, counters, succ, nxt, first,
                     published)
    for j in range(L):
        labels[v * L + j] = src[off + j]
    if is_left:
        first[v] = 1
        counters[4 * v + base] = 1
    nxt[v] = head
    return v


@njit(nogil=True, cache=True)
def _publish(G, L, state, free_list, v, src, off, h, base, is_left):
    """CAS the staged node onto its chain, or merge into a racing twin.

    The CAS expects ``next[v]``, whose chain is known not to hold the label.
    When it fails, only the nodes prepended since then can be a twin, so the
    re-search covers the segment between the new head and the old one.
    """
    heads, labels, nxt, published = G[0], G[1], G[4], G[6]
    while True:
        expected = nxt[v]
        seen = atomic_cas(heads, h, expected, v)
        if seen == expected:
            published[v] = 1
            return v
        found = _scan(labels, nxt, L, src, off, seen, expected)
        if found != NULL:
            _touch(G, found, base, is_left)
            pool_recycle(state, free_list, v, labels, L)
            return found
        nxt[v] = seen


@njit(nogil=True, cache=True)
def _spin(heads, h, rounds):
    acc = 0
    for _ in range(rounds):
        acc += atomic_load(heads, h)
    return acc


@njit(nogil=True, cache=True)
def _add_vertex(G, L, bc, state, free_list, src, off, base, is_left, delay):
    heads, labels, nxt = G[0], G[1], G[4]
    h = _hash(src, off, L, heads.shape[0])
    head = atomic_load(heads, h)
    found = _scan(labels, nxt, L, src, off, head, NULL)
    if found != NULL:
        _touch(G, found, base, is_left)
        return found
    v = _stage(G, L, bc, state, free_list, src, off, head, base, is_left)
    if delay > 0:
        _spin(heads, h, delay)
    return _publish(G, L, state, free_list, v, src, off, h, base, is_left)


@njit(nogil=True, cache=True)
def _find_vertex(G, L, src, off):
    heads = G[0]
    h = _hash(src, off, L, heads.shape[0])
    return _find(heads, G[1], G[4], L, src, off, h)


@njit(nogil=True, cache=True)
def _make_graph_kernel(G, L, bc, state, free_list, seq, starts, ends, delay):
    succ = G[3]
    k = L + 1
    for r in range(starts.shape[0]):
        for i in range(starts[r], ends[r] - k + 1):
            b = encode_byte(seq[i + k - 1])
            _add_vertex(G, L, bc, state, free_list, seq, i, b, True, delay)
            _add_vertex(G, L, bc, state, free_list, seq, i + 1, 0, False, delay)
            left = _find_vertex(G, L, seq, i)
            right = _find_vertex(G, L, seq, i + 1)
            atomic_store(succ, 4 * left + b, right)


@njit(nogil=True, cache=True)
def _insert_batch(G, L, bc, state, free_list, labels, bases, delay):
    for i in range(bases.shape[0]):
        b = bases[i]
        if b >= 0:
            _add_vertex(G, L, bc, state, free_list, labels, i * L, b, True, delay)
        else:
            _add_vertex(G, L, bc, state, free_list, labels, i * L, 0, False, delay)


@njit(cache=True)
def _chain_walk(heads, nxt, lo, hi):
    n = 0
    for h in range(lo, hi):
        v = heads[h]
        while v != NULL:
            n += 1
            v = nxt[v]
    nodes = np.empty(n, dtype=np.int32)
    buckets = np.empty(n, dtype=np.int64)
    i = 0
    for h in range(lo, hi):
        v = heads[h]
        while v != NULL:
            nodes[i] = v
            buckets[i] = h
            i += 1
            v = nxt[v]
    return nodes, buckets


# --------------------------------------------------------------------------
# Python surface
# --------------------------------------------------------------------------

def _as_bytes(label: str, expected_len: Optional[int] = None) -> np.ndarray:
    if expected_len is not None and len(label) != expected_len:
        raise ValueError(f"label {label!r} has length {len(label)}, expected {expected_len}")
    if not _VALID.issuperset(label):
        raise ValueError(f"label {label!r} contains characters outside ACGT")
    return np.frombuffer(bytearray(label.encode("ascii")), dtype=np.uint8)


def _base_code(base: Union[int, str]) -> int:
    if isinstance(base, str):
        if base not in _VALID:
            raise ValueError(f"invalid base {base!r}")
        return encode_base(base)
    if not 0 <= base <= 3:
        raise ValueError(f"base code out of range: {base}")
    return int(base)


def hash_index(label: str, n: int) -> int:
    """Bucket of ``label`` in a table of ``n`` heads (FNV-1a 64, mod ``n``)."""
    if n < 1:
        raise ValueError("table size must be at least 1")
    buf = np.frombuffer(bytearray(label.encode("ascii")), dtype=np.uint8)
    return int(_hash(buf, 0, len(buf), n))


def pack_sequences(reads: Iterable) -> tuple:
    """Concatenate read sequences into one byte buffer with start/end offsets.

    Accepts plain strings or objects with a ``sequence`` attribute.
    """
    seqs = [r if isinstance(r, str) else r.sequence for r in reads]
    lengths = np.fromiter(map(len, seqs), dtype=np.int64, count=len(seqs))
    ends = np.cumsum(lengths)
    starts = ends - lengths
    seq = np.frombuffer(bytearray("".join(seqs).encode("ascii")), dtype=np.uint8)
    return seq, starts, ends


class Node:
    """Read-only view of one vertex of a :class:`Graph`."""

    __slots__ = ("graph", "index")

    def __init__(self, graph: "Graph", index: int):
        self.graph = graph
        self.index = int(index)

    @property
    def label(self) -> str:
        L = self.graph.k - 1
        raw = self.graph.store.labels[self.index * L:(self.index + 1) * L]
        return raw.tobytes().decode("latin-1")

    @property
    def counters(self) -> tuple:
        """Edge weights in encoded base order (A, C, T, G)."""
        c = self.graph.store.counters[4 * self.index:4 * self.index + 4]
        return tuple(int(x) for x in c)

    @property
    def successors(self) -> tuple:
        s = self.graph.store.successors[4 * self.index:4 * self.index + 4]
        return tuple(None if x == NULL else Node(self.graph, x) for x in s)

    def counter(self, base: Union[int, str]) -> int:
        return int(self.graph.store.counters[4 * self.index + _base_code(base)])

    def successor(self, base: Union[int, str]) -> Optional["Node"]:
        x = self.graph.store.successors[4 * self.index + _base_code(base)]
        return None if x == NULL else Node(self.graph, x)

    @property
    def first(self) -> bool:
        return bool(self.graph.store.first[self.index])

    @property
    def next(self) -> Optional["Node"]:
        x = self.graph.store.next[self.index]
        return None if x == NULL else Node(self.graph, x)

    def __eq__(self, other):
        return isinstance(other, Node) and other.graph is self.graph and other.index == self.index

    def __hash__(self):
        return hash((id(self.graph), self.index))

    def __repr__(self):
        return f"Node({self.label!r}, counters={self.counters}, first={self.first})"


class Graph:
    """Fixed-size chained hash table of de Bruijn vertices.

    Parameters
    ----------
    k : int
        Graph dimension (k-mer length); vertex labels have length ``k - 1``.
    table_size : int
        Number of chain heads ``N``. Never resized.
    capacity : int, optional
        Node slots in the backing slab. Use :meth:`for_reads` to size it
        from a read set; the default suits small hand-built graphs.
    block_capacity : int
        Node slots a worker pool claims at once.
    """

    def __init__(self, k: int, table_size: int, capacity: Optional[int] = None,
                 block_capacity: int = DEFAULT_BLOCK_CAPACITY):
        if k < 2:
            raise ValueError(f"k must be at least 2, got {k}")
        if table_size < 1:
            raise ValueError("table size must be at least 1")
        if capacity is None:
            capacity = 2 * table_size + 2 * block_capacity
        self.k = k
        self.table_size = table_size
        self.heads = np.full(table_size, NULL, dtype=np.int32)
        self.store = NodeStore(capacity, k - 1, block_capacity)
        self._pool: Optional[WorkerPool] = None

    @classmethod
    def for_reads(cls, reads: Sequence, k: int, table_size: int, workers: int = 1,
                  block_capacity: int = DEFAULT_BLOCK_CAPACITY) -> "Graph":
        """Graph whose slab is guaranteed large enough to ingest ``reads``.

        A read with ``m`` k-mers contributes at most ``m + 1`` distinct
        labels; each worker may strand at most one partly used block.
        """
        n_labels = 0
        for r in reads:
            m = len(r if isinstance(r, str) else r.sequence) - k + 1
            if m > 0:
                n_labels += m + 1
        capacity = n_labels + (workers + 1) * block_capacity
        return cls(k, table_size, capacity, block_capacity)

    @property
    def arrays(self) -> tuple:
        s = self.store
        return (self.heads, s.labels, s.counters, s.successors, s.next, s.first,
                s.published, s.blocks)

    @property
    def pool(self) -> WorkerPool:
        """Pool used by the single-threaded Python-level operations."""
        if self._pool is None:
            self._pool = self.store.pool()
        return self._pool

    def node_indices(self, lo: int = 0, hi: Optional[int] = None) -> np.ndarray:
        """Slots of all nodes reachable from heads ``lo..hi-1``, in chain order."""
        hi = self.table_size if hi is None else hi
        return _chain_walk(self.heads, self.store.next, lo, hi)[0]

    def nodes(self) -> List[Node]:
        return [Node(self, i) for i in self.node_indices()]

    def __len__(self) -> int:
        return len(self.node_indices())

    def chain_lengths(self) -> np.ndarray:
        _, buckets = _chain_walk(self.heads, self.store.next, 0, self.table_size)
        return np.bincount(buckets, minlength=self.table_size)

    def __getitem__(self, label: str) -> Node:
        node = find_vertex(self, label)
        if node is None:
            raise KeyError(label)
        return node

    def __contains__(self, label: str) -> bool:
        return find_vertex(self, label) is not None


def find_vertex(g: Graph, label: str) -> Optional[Node]:
    """Walk the label's chain; ``None`` if absent at the time of the walk."""
    if len(label) != g.k - 1:
        return None
    v = _find_vertex(g.arrays, g.k - 1, _as_bytes(label), 0)
    return None if v == NULL else Node(g, v)


def add_left_vertex(g: Graph, left: str, next_base: Union[int, str],
                    pool: Optional[WorkerPool] = None) -> Node:
    """Ensure ``left`` exists and count one edge ``left -> next_base``.

    The counter saturates at 255. ``pool`` must belong to the calling worker.
    """
    pool = pool or g.pool
    v = _add_vertex(g.arrays, g.k - 1, g.store.block_capacity, pool.state, pool.free_list,
                    _as_bytes(left, g.k - 1), 0, _base_code(next_base), True, 0)
    return Node(g, v)


def add_right_vertex(g: Graph, right: str, pool: Optional[WorkerPool] = None) -> Node:
    """Ensure ``right`` exists and mark it as having an incoming edge."""
    pool = pool or g.pool
    v = _add_vertex(g.arrays, g.k - 1, g.store.block_capacity, pool.state, pool.free_list,
                    _as_bytes(right, g.k - 1), 0, 0, False, 0)
    return Node(g, v)


def link_edge(left_node: Node, next_base: Union[int, str], right_node: Node) -> None:
    b = _base_code(next_base)
    if right_node.label != left_node.label[1:] + ALPHABET[b]:
        raise ValueError(f"{right_node.label} is not the {ALPHABET[b]}-successor "
                         f"of {left_node.label}")
    _store_link(left_node.graph.store.successors, 4 * left_node.index + b, right_node.index)


@njit(nogil=True, cache=True)
def _store_link(succ, idx, value):
    atomic_store(succ, idx, value)


def add_vertices(g: Graph, labels: Sequence[str], bases: Sequence[Optional[int]],
                 pool: Optional[WorkerPool] = None, delay: int = 0) -> None:
    """Batch insertion: ``bases[i]`` is an edge base for a left insert, or ``None``
    for a right insert. Runs without the GIL, so workers can call it concurrently.

    ``delay`` busy-waits that many rounds between staging a node and the
    publishing CAS, widening the race window (for stress tests).
    """
    pool = pool or g.pool
    L = g.k - 1
    buf = _as_bytes("".join(labels), L * len(labels))
    codes = np.array([-1 if b is None else _base_code(b) for b in bases], dtype=np.int64)
    _insert_batch(g.arrays, L, g.store.block_capacity, pool.state, pool.free_list, buf, codes,
                  delay)


def make_graph(g: Graph, reads: Iterable, pool: Optional[WorkerPool] = None,
               delay: int = 0) -> None:
    """Insert every k-mer of ``reads`` (one worker's partition) into ``g``.

    Reads must already be validated to ``ACGT`` (see :mod:`.reads`).
    """
    pool = pool or g.pool
    seq, starts, ends = pack_sequences(reads)
    _make_graph_kernel(g.arrays, g.k - 1, g.store.block_capacity, pool.state, pool.free_list,
                       seq, starts, ends, delay)


def build_graph(g: Graph, partitions: Sequence[Iterable], delay: int = 0) -> List[WorkerPool]:
    """Run :func:`make_graph` concurrently, one thread and one pool per partition.

    Returns the worker pools (their counters describe allocation and races).
    """
    pools = [g.store.pool() for _ in partitions]
    packed = [pack_sequences(p) for p in partitions]
    if len(partitions) == 1:
        _make_graph_kernel(g.arrays, g.k - 1, g.store.block_capacity, pools[0].state,
                           pools[0].free_list, *packed[0], delay)
        return pools
    with ThreadPoolExecutor(max_workers=len(partitions)) as ex:
        futures = [
            ex.submit(_make_graph_kernel, g.arrays, g.k - 1, g.store.block_capacity,
                      pool.state, pool.free_list, *pk, delay)
            for pool, pk in zip(pools, packed)
        ]
        for f in futures:
            f.result()
    return pools


def snapshot_canonical(g: Graph) -> str:
    """Hash- and chain-order-independent text dump of the whole graph.

    One line per node, sorted by label::

        label<TAB>first<TAB>cA,cC,cT,cG<TAB>sA|sC|sT|sG

    Counters and successors are in encoded base order, ``first`` is ``1``
    or ``0`` and a null successor is ``-``.
    """
    idx = g.node_indices()
    if not len(idx):
        return ""
    L = g.k - 1
    text = g.store.labels.reshape(-1, L)[idx].tobytes().decode("latin-1")
    names = [text[i * L:(i + 1) * L] for i in range(len(idx))]
    name_of = dict(zip(idx.tolist(), names))
    name_of[NULL] = "-"
    counters = g.store.counters.reshape(-1, 4)[idx].tolist()
    succ = g.store.successors.reshape(-1, 4)[idx].tolist()
    first = g.store.first[idx].tolist()
    lines = sorted(
        f"{names[i]}\t{first[i]}\t{','.join(map(str, counters[i]))}\t"
        f"{'|'.join(name_of[s] for s in succ[i])}"
        for i in range(len(idx))
    )
    return "\n".join(lines) + "\n"
