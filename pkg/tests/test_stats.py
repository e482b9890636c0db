import pytest
from hypothesis import given
from hypothesis import strategies as st

from lockfree_dbg.stats import compute_stats, genome_coverage, genome_fraction, n50_l50

from oracles import brute_force_n50


@pytest.mark.parametrize("lengths, target, expected", [
    ([10, 8, 5, 3], 26, (8, 2)),
    ([100], 100, (100, 1)),
    ([10], 100, (0, 0)),
    ([], 10, (0, 0)),
    ([5, 5, 5, 5], 20, (5, 2)),
])
def test_n50_examples(lengths, target, expected):
    assert n50_l50(lengths, target) == expected


@given(st.lists(st.integers(1, 50), min_size=1, max_size=30))
def test_n50_matches_brute_force(lengths):
    assert n50_l50(lengths, sum(lengths)) == brute_force_n50(lengths, sum(lengths))


@given(st.lists(st.integers(1, 50), min_size=1, max_size=30), st.integers(1, 2000))
def test_ng50_matches_brute_force(lengths, genome_size):
    assert n50_l50(lengths, genome_size) == brute_force_n50(lengths, genome_size)


@given(st.lists(st.integers(1, 50), min_size=1, max_size=30), st.integers(0, 500))
def test_ng50_not_above_n50_when_genome_is_larger(lengths, extra):
    total = sum(lengths)
    assert n50_l50(lengths, total + extra)[0] <= n50_l50(lengths, total)[0]


def test_min_length_filter():
    s = compute_stats(["A" * 600, "C" * 400])
    assert (s.contig_count, s.longest, s.total_length, s.n50, s.l50) == (1, 600, 600, 600, 1)
    assert compute_stats(["A" * 600, "C" * 400], min_length=0).contig_count == 2


def test_empty_assembly():
    s = compute_stats([], genome_size=1000)
    assert (s.contig_count, s.n50, s.l50, s.ng50, s.lg50) == (0, 0, 0, 0, 0)
    assert "contig_count=0" in s.to_text()


def test_genome_fraction_examples():
    ref = "ACGTTGCAAGGCTTAC" * 4
    assert genome_fraction([ref], ref) == 100.0
    half = len(ref) // 2
    assert genome_fraction([ref[:half], ref[half:]], ref) == 100.0
    assert genome_fraction([ref[:half]], ref) >= 50.0
    pct, unmatched = genome_coverage(["GGGGGGGG", ref[:16]], ref)
    assert unmatched == 1
    assert pct == 100.0  # the 16-base unit repeats across the whole reference


def test_genome_fraction_unique_half():
    ref = "ACGTAACCGGTTAGCATGCA"
    assert genome_fraction([ref[:10]], ref) == 50.0
    assert genome_fraction([], ref) == 0.0


def test_stats_with_reference():
    ref = "ACGT" * 300
    s = compute_stats([ref[:700]], reference=ref)
    assert s.ng50 == 700 and s.lg50 == 1
    assert s.genome_fraction == 100.0  # periodic reference: every offset matches
    assert "NG50" in s.format_table()
