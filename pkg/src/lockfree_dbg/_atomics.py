"""Hardware atomic primitives on numpy array elements, usable inside ``nogil`` numba code.

Each intrinsic lowers to a single LLVM atomic instruction (``load atomic``,
``store atomic``, ``cmpxchg``, ``atomicrmw add``) on the address of one
element of a contiguous 1-D array. They are the only synchronisation the
graph uses: no locks are taken anywhere.
"""

from numba import njit
from numba.core import cgutils, types
from numba.extending import intrinsic


def _element_pointer(context, builder, aryty, ary, idx):
    array = context.make_array(aryty)(context, builder, ary)
    return cgutils.get_item_pointer(context, builder, aryty, array, [idx])


def _nbytes(aryty):
    return aryty.dtype.bitwidth // 8


@intrinsic
def atomic_load(typingctx, arr, idx):
    """Acquire-load of ``arr[idx]``."""

    def codegen(context, builder, sig, args):
        aryty = sig.args[0]
        ptr = _element_pointer(context, builder, aryty, args[0], args[1])
        return builder.load_atomic(ptr, "acquire", _nbytes(aryty))

    return arr.dtype(arr, idx), codegen


@intrinsic
def atomic_store(typingctx, arr, idx, value):
    """Release-store of ``value`` into ``arr[idx]``."""

    def codegen(context, builder, sig, args):
        aryty = sig.args[0]
        ptr = _element_pointer(context, builder, aryty, args[0], args[1])
        val = context.cast(builder, args[2], sig.args[2], aryty.dtype)
        builder.store_atomic(val, ptr, "release", _nbytes(aryty))
        return context.get_dummy_value()

    return types.void(arr, idx, value), codegen


@intrinsic
def atomic_cas(typingctx, arr, idx, expected, new):
    """Compare-and-swap on ``arr[idx]``; returns the value observed before the attempt.

    The swap succeeded iff the returned value equals ``expected``.
    """

    def codegen(context, builder, sig, args):
        aryty = sig.args[0]
        ptr = _element_pointer(context, builder, aryty, args[0], args[1])
        exp = context.cast(builder, args[2], sig.args[2], aryty.dtype)
        val = context.cast(builder, args[3], sig.args[3], aryty.dtype)
        pair = builder.cmpxchg(ptr, exp, val, "seq_cst", "seq_cst")
        return builder.extract_value(pair, 0)

    return arr.dtype(arr, idx, expected, new), codegen


@intrinsic
def atomic_fetch_add(typingctx, arr, idx, delta):
    """Atomic ``arr[idx] += delta`` returning the previous value."""

    def codegen(context, builder, sig, args):
        aryty = sig.args[0]
        ptr = _element_pointer(context, builder, aryty, args[0], args[1])
        val = context.cast(builder, args[2], sig.args[2], aryty.dtype)
        return builder.atomic_rmw("add", ptr, val, "seq_cst")

    return arr.dtype(arr, idx, delta), codegen


@njit(nogil=True, cache=True)
def _cas_py(arr, idx, expected, new):
    return atomic_cas(arr, idx, expected, new)


def compare_and_swap(arr, idx, expected, new):
    """Python-level CAS on one element of a contiguous 1-D integer array.

    Returns the old value, exactly like the classic ``CAS(val, expected,
    new_val)`` primitive: the caller compares it with ``expected`` to learn
    whether the swap happened.
    """
    return _cas_py(arr, idx, arr.dtype.type(expected), arr.dtype.type(new))


__all__ = [
    "atomic_load",
    "atomic_store",
    "atomic_cas",
    "atomic_fetch_add",
    "compare_and_swap",
]
