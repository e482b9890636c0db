"""FASTA/FASTQ loading, sanitising and partitioning of reads across workers."""

import gzip
import heapq
import os
import re
from dataclasses import dataclass, field
from typing import IO, Iterable, Iterator, List, Optional, Tuple

_ACGT_RUN = re.compile(r"[ACGT]+")
MIN_FRAGMENT = 2


class ReadFormatError(ValueError):
    """Malformed FASTA/FASTQ structure."""

    def __init__(self, path, line: int, message: str):
        super().__init__(f"{path}:{line}: {message}")
        self.path = path
        self.line = line


@dataclass(frozen=True)
class Read:
    id: str
    sequence: str

    def __len__(self) -> int:
        return len(self.sequence)


@dataclass
class ReadSet:
    reads: List[Read] = field(default_factory=list)

    @property
    def num_reads(self) -> int:
        return len(self.reads)

    @property
    def total_bases(self) -> int:
        return sum(len(r.sequence) for r in self.reads)

    def __len__(self) -> int:
        return len(self.reads)

    def __iter__(self) -> Iterator[Read]:
        return iter(self.reads)

    def __getitem__(self, i):
        return self.reads[i]

    @classmethod
    def from_sequences(cls, seqs: Iterable[str], prefix: str = "read") -> "ReadSet":
        return cls([Read(f"{prefix}_{i}", s) for i, s in enumerate(seqs)])


def sanitize(record_id: str, sequence: str) -> List[Read]:
    """Upper-case a record and split it at every run of non-ACGT characters.

    Records without invalid characters keep their id; fragments of a split
    record are suffixed ``/1``, ``/2``, ... Fragments shorter than two bases
    are dropped.
    """
    seq = sequence.upper()
    runs = _ACGT_RUN.findall(seq)
    if len(runs) == 1 and len(runs[0]) == len(seq):
        return [Read(record_id, seq)] if len(seq) >= MIN_FRAGMENT else []
    runs = [r for r in runs if len(r) >= MIN_FRAGMENT]
    return [Read(f"{record_id}/{i}", r) for i, r in enumerate(runs, 1)]


def _open(path, compressed: Optional[bool]) -> IO[str]:
    if compressed is None:
        compressed = str(path).endswith(".gz")
    if compressed:
        return gzip.open(path, "rt")
    return open(path, "rt")


def _record_id(header: str) -> str:
    fields = header[1:].split(maxsplit=1)
    return fields[0] if fields else ""


def _parse_fasta(handle, path) -> Iterator[Tuple[str, str]]:
    rid, chunks = None, []
    for lineno, line in enumerate(handle, 1):
        line = line.strip()
        if not line:
            continue
        if line.startswith(">"):
            if rid is not None:
                yield rid, "".join(chunks)
            rid, chunks = _record_id(line), []
        elif rid is None:
            raise ReadFormatError(path, lineno, "sequence data before the first '>' header")
        else:
            chunks.append(line)
    if rid is not None:
        yield rid, "".join(chunks)


def _parse_fastq(handle, path) -> Iterator[Tuple[str, str]]:
    lines = (l.rstrip("\r\n") for l in handle)
    lineno = 0
    while True:
        header = next(lines, None)
        lineno += 1
        if header is None:
            return
        if not header.strip():
            continue
        if not header.startswith("@"):
            raise ReadFormatError(path, lineno, f"expected '@' header, got {header[:20]!r}")
        seq, plus, qual = next(lines, None), next(lines, None), next(lines, None)
        if qual is None:
            raise ReadFormatError(path, lineno, "truncated FASTQ record")
        if not plus.startswith("+"):
            raise ReadFormatError(path, lineno + 2, "expected '+' separator line")
        if len(qual) != len(seq):
            raise ReadFormatError(path, lineno + 3, "quality length differs from sequence length")
        yield _record_id(header), seq
        lineno += 3


def load_reads(path, compressed: Optional[bool] = None) -> ReadSet:
    """Read a FASTA or FASTQ file (chosen by its first non-blank character).

    Sequences are upper-cased and split at non-ACGT runs (see :func:`sanitize`).
    Quality strings are discarded. ``compressed=None`` enables gzip for
    ``*.gz`` paths.
    """
    if not os.path.exists(path):
        raise FileNotFoundError(f"read file not found: {path}")
    with _open(path, compressed) as handle:
        head = handle.read(1)
        while head and head.isspace():
            head = handle.read(1)
    if not head:
        return ReadSet()
    if head not in ">@":
        raise ReadFormatError(path, 1, f"unrecognised format (starts with {head!r})")
    parser = _parse_fasta if head == ">" else _parse_fastq
    reads: List[Read] = []
    with _open(path, compressed) as handle:
        for rid, seq in parser(handle, path):
            reads.extend(sanitize(rid, seq))
    return ReadSet(reads)


def write_fasta(path, records: Iterable[Tuple[str, str]], width: int = 0) -> None:
    """Write ``(header, sequence)`` pairs; ``width > 0`` wraps sequence lines."""
    with open(path, "w") as out:
        for header, seq in records:
            out.write(f">{header}\n")
            if width > 0:
                for i in range(0, len(seq), width):
                    out.write(seq[i:i + width] + "\n")
            else:
                out.write(seq + "\n")


def partition(rs: ReadSet, workers: int) -> List[ReadSet]:
    """Split reads into ``workers`` disjoint, base-balanced subsets.

    Greedy longest-first assignment to the currently lightest worker; ties go
    to the lowest worker index, so equal-length reads are dealt out evenly.
    Each subset keeps the original read order.
    """
    if workers < 1:
        raise ValueError("workers must be at least 1")
    order = sorted(range(len(rs.reads)), key=lambda i: -len(rs.reads[i].sequence))
    heap = [(0, w) for w in range(workers)]
    assigned: List[List[int]] = [[] for _ in range(workers)]
    for i in order:
        load, w = heapq.heappop(heap)
        assigned[w].append(i)
        heapq.heappush(heap, (load + len(rs.reads[i].sequence), w))
    return [ReadSet([rs.reads[i] for i in sorted(idx)]) for idx in assigned]
