"""Per-worker pooled allocation of graph nodes.

All node storage lives in one preallocated slab (struct-of-arrays, see
:class:`NodeStore`). The slab is carved into fixed-size blocks; a worker's
:class:`WorkerPool` claims a whole block at a time with a single atomic
fetch-add on the shared block counter and then hands out slots from it
without any further synchronisation. Slots that lose a publication race
go onto the pool's private LIFO free list and are reused by the same
worker only.

Pool bookkeeping is kept in a small ``int64`` state vector so that the
same ``acquire``/``recycle`` code runs both from Python and inside the
``nogil`` build kernels.
"""

import numpy as np
from numba import njit

from ._atomics import atomic_fetch_add

NULL = -1
DEFAULT_BLOCK_CAPACITY = 4096

# layout of WorkerPool.state
_BLOCK_START = 0
_BLOCK_USED = 1
_FREE_TOP = 2
_BLOCKS = 3
_ACQUIRED = 4
_RECYCLED = 5
_STATE_LEN = 6

# poison written into recycled labels; never a valid nucleotide byte
POISON = 0xEE


class NodeStore:
    """Slab holding every node field as a flat array.

    Node ``i`` owns ``labels[i*L:(i+1)*L]``, ``counters[4*i:4*i+4]`` and
    ``successors[4*i:4*i+4]`` plus the scalar slots ``next[i]``,
    ``first[i]`` and ``published[i]``. Node references are ``int32``
    slot indices with ``-1`` as null.
    """

    def __init__(self, capacity: int, label_length: int,
                 block_capacity: int = DEFAULT_BLOCK_CAPACITY):
        if block_capacity < 1:
            raise ValueError("block_capacity must be positive")
        if label_length < 1:
            raise ValueError("label_length must be positive")
        n_blocks = max(1, -(-capacity // block_capacity))
        capacity = n_blocks * block_capacity
        if capacity >= 2 ** 31:
            raise ValueError(f"capacity {capacity} exceeds int32 node references")
        self.capacity = capacity
        self.label_length = label_length
        self.block_capacity = block_capacity
        self.labels = np.zeros(capacity * label_length, dtype=np.uint8)
        self.counters = np.zeros(capacity * 4, dtype=np.uint8)
        self.successors = np.full(capacity * 4, NULL, dtype=np.int32)
        self.next = np.full(capacity, NULL, dtype=np.int32)
        self.first = np.zeros(capacity, dtype=np.uint8)
        self.published = np.zeros(capacity, dtype=np.uint8)
        # [0]: blocks handed out so far, [1]: total blocks in the slab
        self.blocks = np.array([0, n_blocks], dtype=np.int64)

    @property
    def blocks_allocated(self) -> int:
        return int(self.blocks[0])

    def pool(self) -> "WorkerPool":
        """Create a new pool; call once per worker before the build starts."""
        return WorkerPool(self)

    def nbytes(self) -> int:
        return sum(a.nbytes for a in (self.labels, self.counters, self.successors,
                                      self.next, self.first, self.published))


class WorkerPool:
    """Allocation pool confined to a single worker.

    Not thread-safe by design: exactly one worker may use a given pool.
    """

    def __init__(self, store: NodeStore, free_capacity: int = 64):
        self.store = store
        self.state = np.zeros(_STATE_LEN, dtype=np.int64)
        self.state[_BLOCK_USED] = store.block_capacity  # forces a block claim
        self.free_list = np.full(free_capacity, NULL, dtype=np.int32)

    @property
    def blocks(self) -> int:
        return int(self.state[_BLOCKS])

    @property
    def acquired(self) -> int:
        return int(self.state[_ACQUIRED])

    @property
    def recycled(self) -> int:
        return int(self.state[_RECYCLED])

    @property
    def free_count(self) -> int:
        return int(self.state[_FREE_TOP])

    @property
    def live(self) -> int:
        """Slots acquired and not recycled, i.e. nodes this worker published."""
        return self.acquired - self.recycled

    def acquire(self) -> int:
        s = self.store
        return int(pool_acquire(self.state, self.free_list, s.blocks, s.block_capacity,
                                s.labels, s.label_length, s.counters, s.successors,
                                s.next, s.first, s.published))

    def recycle(self, slot: int) -> None:
        s = self.store
        if s.published[slot]:
            raise ValueError(f"slot {slot} is published and cannot be recycled")
        if self.free_count == len(self.free_list):
            grown = np.full(2 * len(self.free_list), NULL, dtype=np.int32)
            grown[:len(self.free_list)] = self.free_list
            self.free_list = grown
        pool_recycle(self.state, self.free_list, slot, s.labels, s.label_length)


@njit(nogil=True, cache=True)
def pool_acquire(state, free_list, blocks, block_capacity, labels, label_length,
                 counters, successors, nxt, first, published):
    """Return a zero-initialised slot, preferring the free list."""
    top = state[_FREE_TOP]
    if top > 0:
        top -= 1
        slot = free_list[top]
        state[_FREE_TOP] = top
    else:
        if state[_BLOCK_USED] == block_capacity:
            b = atomic_fetch_add(blocks, 0, 1)
            if b >= blocks[1]:
                raise MemoryError("node arena exhausted")
            state[_BLOCK_START] = b * block_capacity
            state[_BLOCK_USED] = 0
            state[_BLOCKS] += 1
        slot = state[_BLOCK_START] + state[_BLOCK_USED]
        state[_BLOCK_USED] += 1
    state[_ACQUIRED] += 1
    base = slot * label_length
    for j in range(label_length):
        labels[base + j] = 0
    for j in range(4):
        counters[4 * slot + j] = 0
        successors[4 * slot + j] = NULL
    nxt[slot] = NULL
    first[slot] = 0
    published[slot] = 0
    return slot


@njit(nogil=True, cache=True)
def pool_recycle(state, free_list, slot, labels, label_length):
    """Push an unpublished slot onto the free list.

    When the free list is full the slot is abandoned. The build kernels
    recycle at most one slot between consecutive acquires and the Python
    wrapper grows the list beforehand, so neither path hits this.
    """
    base = slot * label_length
    for j in range(label_length):
        labels[base + j] = POISON
    state[_RECYCLED] += 1
    top = state[_FREE_TOP]
    if top < free_list.shape[0]:
        free_list[top] = slot
        state[_FREE_TOP] = top + 1
