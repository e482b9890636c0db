"""Deterministic synthetic genomes and substitution-error reads.

Random streams come from numpy's PCG64 bit generator:

* genome: ``default_rng(seed)``, one ``integers(0, 4, size, uint8)`` draw
  mapped through ``"ACGT"``;
* reads: ``default_rng([seed, 1])``, processed in chunks of
  ``READ_CHUNK`` reads. Per chunk: start positions
  ``integers(0, G - L + 1, n)``, then an error mask ``random((n, L)) <
  error_rate``, then substitution offsets ``integers(1, 4, (n, L))``; a
  masked base with code ``c`` becomes ``(c + offset) % 4``, which is uniform
  over the three other bases. All draws happen even when ``error_rate`` is 0,
  so the start positions do not depend on it.
"""

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .reads import Read, ReadSet

GENOME_ALPHABET = np.frombuffer(b"ACGT", dtype=np.uint8)
READ_CHUNK = 4096


@dataclass(frozen=True)
class SimulationConfig:
    genome_size: int
    read_length: int = 200
    coverage: float = 30.0
    error_rate: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.genome_size < 1:
            raise ValueError("genome_size must be at least 1")
        if not 1 <= self.read_length <= self.genome_size:
            raise ValueError("read_length must be in 1..genome_size")
        if self.coverage <= 0:
            raise ValueError("coverage must be positive")
        if not 0.0 <= self.error_rate <= 1.0:
            raise ValueError("error_rate must be in [0, 1]")

    @property
    def num_reads(self) -> int:
        # round half up, not banker's rounding
        return int(np.floor(self.coverage * self.genome_size / self.read_length + 0.5))


def simulate_genome(size: int, seed: int = 0) -> str:
    """Uniform i.i.d. sequence over ACGT."""
    if size < 1:
        raise ValueError("size must be at least 1")
    rng = np.random.default_rng(seed)
    codes = rng.integers(0, 4, size=size, dtype=np.uint8)
    return GENOME_ALPHABET[codes].tobytes().decode("ascii")


def simulate_reads(genome: str, cfg: SimulationConfig) -> ReadSet:
    """Sample ``cfg.num_reads`` forward-strand reads with substitution errors."""
    G, L = len(genome), cfg.read_length
    if L > G:
        raise ValueError(f"read_length {L} exceeds genome length {G}")
    rng = np.random.default_rng([cfg.seed, 1])
    ref = np.frombuffer(genome.encode("ascii"), dtype=np.uint8)
    code_of = np.zeros(256, dtype=np.uint8)
    code_of[GENOME_ALPHABET] = np.arange(4, dtype=np.uint8)
    ref_codes = code_of[ref]
    window = np.arange(L)
    reads = []
    remaining = cfg.num_reads
    while remaining > 0:
        n = min(READ_CHUNK, remaining)
        starts = rng.integers(0, G - L + 1, size=n)
        errors = rng.random((n, L)) < cfg.error_rate
        shift = rng.integers(1, 4, size=(n, L), dtype=np.uint8)
        codes = ref_codes[starts[:, None] + window]
        codes = np.where(errors, (codes + shift) % 4, codes).astype(np.uint8)
        text = GENOME_ALPHABET[codes].tobytes().decode("ascii")
        base = len(reads)
        reads.extend(Read(f"read_{base + i}", text[i * L:(i + 1) * L]) for i in range(n))
        remaining -= n
    return ReadSet(reads)


def simulate(cfg: SimulationConfig) -> Tuple[str, ReadSet]:
    """Genome plus reads for one configuration."""
    genome = simulate_genome(cfg.genome_size, cfg.seed)
    return genome, simulate_reads(genome, cfg)
