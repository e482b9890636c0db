"""Nucleotide encoding, k-mer enumeration and prefix/suffix decomposition.

Bases are encoded with the two-instruction ASCII trick ``(c >> 1) & 3``,
which yields the order A=0, C=1, T=2, G=3. Every 4-slot array in the graph
(edge counters, successor links) is indexed in this order.
"""

from typing import List, NamedTuple

from numba import njit

#: Bases in encoded order: ``ALPHABET[encode_base(c)] == c``.
ALPHABET = "ACTG"
ALPHABET_BYTES = ALPHABET.encode("ascii")


def encode_base(c: str) -> int:
    """Map a nucleotide character to its 2-bit code.

    Only upper-case ``A``, ``C``, ``G``, ``T`` are meaningful. The mapping is
    case-insensitive for this alphabet as a side effect of the bit trick, and
    other characters produce an arbitrary code; validate input beforehand.
    """
    return (ord(c) >> 1) & 0x3


def decode_base(b: int) -> str:
    """Inverse of :func:`encode_base` on ``0..3``."""
    if not 0 <= b <= 3:
        raise ValueError(f"base code out of range: {b}")
    return ALPHABET[b]


@njit(inline="always")
def encode_byte(c):
    return (c >> 1) & 0x3


def kmers(read: str, k: int) -> List[str]:
    """All ``len(read) - k + 1`` substrings of length ``k``, left to right.

    Reads shorter than ``k`` yield an empty list.
    """
    if k < 2:
        raise ValueError(f"k must be at least 2, got {k}")
    return [read[i:i + k] for i in range(len(read) - k + 1)]


class KmerSplit(NamedTuple):
    """Edge view of a k-mer: source label, target label, and the edge base."""

    left: str
    right: str
    next_base: int


def split(kmer: str) -> KmerSplit:
    """Decompose a k-mer into its (k-1)-prefix, (k-1)-suffix and last base."""
    return KmerSplit(kmer[:-1], kmer[1:], encode_base(kmer[-1]))
