import random
import threading

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lockfree_dbg.graph import (Graph, _hash, _publish, _stage, add_left_vertex,
                                add_right_vertex, add_vertices, build_graph, find_vertex,
                                hash_index, link_edge, make_graph, snapshot_canonical)
from lockfree_dbg.reads import ReadSet, partition

from oracles import naive_graph, naive_snapshot


def fnv1a_reference(label: str) -> int:
    h = 0xCBF29CE484222325
    for byte in label.encode():
        h ^= byte
        h = (h * 0x100000001B3) % 2 ** 64
    return h


def toy_graph(table_size=10):
    g = Graph(4, table_size)
    make_graph(g, ["ACGACGACGC"])
    return g


# -- hashing -----------------------------------------------------------------

def test_hash_index_single_bucket_and_determinism():
    assert hash_index("ACGTTGCA", 1) == 0
    assert hash_index("ACG", 1000) == hash_index("ACG", 1000)


@pytest.mark.parametrize("label", ["", "A", "ACG", "ACGTACGTACGTACGTACGTACGTACGTAC"])
def test_hash_is_fnv1a_mod_n(label):
    for n in (1, 10, 7919, 2 ** 31 - 1):
        assert hash_index(label, n) == fnv1a_reference(label) % n


def test_chain_lengths_random_30mers():
    # Poisson(0.5) tail: P(chain >= 9) ~ 1.7e-10 per bucket, so max <= 8 with room to spare
    rng = random.Random(11)
    labels = ["".join(rng.choice("ACGT") for _ in range(30)) for _ in range(10 ** 5)]
    g = Graph(31, 2 * 10 ** 5, capacity=2 * 10 ** 5)
    add_vertices(g, labels, [None] * len(labels))
    lengths = g.chain_lengths()
    assert lengths.sum() == len(set(labels))
    assert lengths.max() <= 8


def test_nodes_live_in_their_hash_bucket():
    g = Graph(6, 37)
    make_graph(g, ["ACGTTGCAAGGCTTAACGGTACCA"])
    for h in range(g.table_size):
        for i in g.node_indices(h, h + 1):
            label = g.nodes()[0].__class__(g, i).label
            assert hash_index(label, 37) == h


# -- find / add ----------------------------------------------------------------

def test_find_vertex_empty_and_present():
    assert find_vertex(Graph(4, 10), "ACG") is None
    g = toy_graph()
    acg = find_vertex(g, "ACG")
    assert acg.counter("A") == 2 and acg.counter("C") == 1
    assert find_vertex(g, "GGG") is None


def test_add_left_new_vertex():
    g = Graph(4, 10)
    n = add_left_vertex(g, "ACG", "T")
    assert n.label == "ACG" and n.first
    assert n.counters == (0, 0, 1, 0)
    assert add_left_vertex(g, "ACG", "T") == n
    assert n.counter("T") == 2


def test_add_left_saturates_at_255():
    g = Graph(4, 10)
    for _ in range(300):
        node = add_left_vertex(g, "AAA", "A")
    assert node.counter("A") == 255


def test_collision_chain_on_single_bucket():
    g = Graph(4, 1)
    a = add_left_vertex(g, "ACG", 0)
    b = add_left_vertex(g, "TTT", 1)
    assert a != b
    assert g.chain_lengths().tolist() == [2]
    assert find_vertex(g, "ACG") == a and find_vertex(g, "TTT") == b
    assert b.next == a  # head insertion


def test_add_right_semantics():
    g = Graph(4, 10)
    r = add_right_vertex(g, "CGA")
    assert r.counters == (0, 0, 0, 0) and not r.first
    left = add_left_vertex(g, "GAC", "G")
    assert left.first
    assert add_right_vertex(g, "GAC") == left
    assert not left.first and left.counters == (0, 0, 0, 1)
    assert add_right_vertex(g, "CGA") == r
    assert len(g) == 2


def test_invalid_labels_rejected():
    g = Graph(4, 10)
    with pytest.raises(ValueError):
        add_left_vertex(g, "ACGT", 0)
    with pytest.raises(ValueError):
        add_right_vertex(g, "ANG")


# -- edges -----------------------------------------------------------------------

def test_link_edge_and_idempotence():
    g = Graph(4, 10)
    left = add_left_vertex(g, "ACG", "A")
    right = add_right_vertex(g, "CGA")
    link_edge(left, "A", right)
    link_edge(left, "A", right)
    assert left.successor("A") == right
    assert left.successors == (right, None, None, None)
    with pytest.raises(ValueError):
        link_edge(left, "C", right)


def test_self_loop():
    g = Graph(4, 10)
    make_graph(g, ["AAAAA"])
    aaa = g["AAA"]
    assert aaa.successor("A") == aaa
    assert aaa.counter("A") == 2
    assert not aaa.first
    assert len(g) == 1


def test_make_graph_toy_topology():
    g = toy_graph()
    assert sorted(n.label for n in g.nodes()) == ["ACG", "CGA", "CGC", "GAC"]
    weights = {(n.label, s.label): n.counter(s.label[-1])
               for n in g.nodes() for s in n.successors if s is not None}
    assert weights == {("ACG", "CGA"): 2, ("CGA", "GAC"): 2, ("GAC", "ACG"): 2,
                       ("ACG", "CGC"): 1}


def test_make_graph_empty_partition():
    g = Graph(4, 10)
    make_graph(g, [])
    make_graph(g, ["ACG"])  # shorter than k
    assert len(g) == 0 and snapshot_canonical(g) == ""


def test_successor_links_match_find_vertex():
    rng = random.Random(3)
    reads = ["".join(rng.choice("ACGT") for _ in range(50)) for _ in range(40)]
    g = Graph.for_reads(reads, 5, 101)
    make_graph(g, reads)
    for n in g.nodes():
        for b, (c, s) in enumerate(zip(n.counters, n.successors)):
            assert (c > 0) == (s is not None)
            if s is not None:
                assert s == find_vertex(g, n.label[1:] + "ACTG"[b])


# -- snapshot ---------------------------------------------------------------------

def test_snapshot_toy():
    snap = snapshot_canonical(toy_graph())
    assert snap.splitlines()[0] == "ACG\t0\t2,1,0,0\tCGA|CGC|-|-"
    assert len(snap.splitlines()) == 4
    assert snap == naive_snapshot(["ACGACGACGC"], 4)


def test_snapshot_independent_of_table_size():
    assert snapshot_canonical(toy_graph(1)) == snapshot_canonical(toy_graph(1000))


# -- concurrency ----------------------------------------------------------------------

def _random_reads(seed, n, length):
    rng = random.Random(seed)
    return ["".join(rng.choice("ACGT") for _ in range(length)) for _ in range(n)]


@pytest.mark.parametrize("workers", [1, 2, 4, 8])
def test_parallel_build_matches_oracle(workers):
    reads = ReadSet.from_sequences(_random_reads(5, 200, 80) + ["ACGT" * 30] * 5)
    g = Graph.for_reads(reads, 9, 257, workers)
    build_graph(g, partition(reads, workers))
    assert snapshot_canonical(g) == naive_snapshot([r.sequence for r in reads], 9)


@settings(max_examples=25, deadline=None)
@given(st.lists(st.text("ACGT", min_size=1, max_size=40), max_size=30),
       st.integers(2, 7), st.integers(1, 6), st.integers(1, 50))
def test_build_equals_oracle_property(seqs, k, workers, table_size):
    reads = ReadSet.from_sequences(seqs)
    g = Graph.for_reads(reads, k, table_size, workers, block_capacity=16)
    build_graph(g, partition(reads, workers))
    assert snapshot_canonical(g) == naive_snapshot(seqs, k)
    nodes = naive_graph(seqs, k)
    assert len(g) == len(nodes)


def test_two_workers_same_absent_label():
    for _ in range(20):
        g = Graph(4, 8, capacity=64, block_capacity=8)
        barrier = threading.Barrier(2)
        pools = [g.store.pool(), g.store.pool()]

        def work(pool):
            barrier.wait()
            add_vertices(g, ["ACG"], ["T"], pool=pool, delay=2000)

        threads = [threading.Thread(target=work, args=(p,)) for p in pools]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert len(g) == 1
        assert g["ACG"].counter("T") == 2
        assert sum(p.live for p in pools) == 1


def _staged(g, pool, label, base):
    L = g.k - 1
    src = np.frombuffer(bytearray(label.encode()), np.uint8)
    h = int(_hash(src, 0, L, g.table_size))
    head = int(g.heads[h])
    assert find_vertex(g, label) is None  # staging presumes a searched, label-free chain
    v = _stage(g.arrays, L, g.store.block_capacity, pool.state, pool.free_list, src, 0, head,
               base, True)
    return v, src, h


def _resume(g, pool, v, src, h, base):
    return _publish(g.arrays, g.k - 1, pool.state, pool.free_list, v, src, 0, h, base, True)


def test_forced_race_loser_recycles_its_node():
    g = Graph(4, 4, capacity=64, block_capacity=16)
    slow, fast = g.store.pool(), g.store.pool()
    v, src, h = _staged(g, slow, "ACG", 2)  # slow worker paused right before its CAS
    winner = add_left_vertex(g, "ACG", 2, pool=fast)
    assert winner.index != v
    got = _resume(g, slow, v, src, h, 2)
    assert got == winner.index
    assert winner.counter(2) == 2
    assert slow.recycled == 1 and slow.free_count == 1
    assert slow.live + fast.live == len(g) == 1
    assert slow.acquire() == v  # recycled slot is reused first


def test_cas_retry_when_head_moves_to_other_label():
    g = Graph(4, 1, capacity=64, block_capacity=16)
    slow, fast = g.store.pool(), g.store.pool()
    v, src, h = _staged(g, slow, "ACG", 0)
    other = add_left_vertex(g, "TTT", 1, pool=fast)
    got = _resume(g, slow, v, src, h, 0)
    assert got == v  # retried the CAS against the new head and won
    assert g.store.next[v] == other.index
    assert slow.recycled == 0
    assert sorted(n.label for n in g.nodes()) == ["ACG", "TTT"]


def test_suspended_worker_does_not_block_others():
    reads = ReadSet.from_sequences(_random_reads(9, 300, 60))
    g = Graph.for_reads(reads, 7, 1, workers=4)  # single bucket: every insert contends
    paused = g.store.pool()
    resume = threading.Event()
    staged = threading.Event()
    result = {}

    def suspended():
        v, src, h = _staged(g, paused, "ACGTAC", 0)
        staged.set()
        resume.wait()
        result["node"] = _resume(g, paused, v, src, h, 0)

    t = threading.Thread(target=suspended)
    t.start()
    staged.wait()
    others = threading.Thread(target=build_graph, args=(g, partition(reads, 3)))
    others.start()
    others.join(timeout=120)
    assert not others.is_alive(), "workers blocked by a suspended insert"
    resume.set()
    t.join()
    expected = naive_graph([r.sequence for r in reads], 7)
    got = g["ACGTAC"]
    assert result["node"] == got.index
    prior = expected.get("ACGTAC", {"counters": [0, 0, 0, 0]})["counters"][0]
    assert got.counter(0) == min(255, prior + 1)
    assert len(g) == len(expected | {"ACGTAC": None})


def test_adversarial_single_bucket_no_duplicates():
    rng = random.Random(1)
    labels = ["".join(rng.choice("ACGT") for _ in range(5)) for _ in range(300)]
    g = Graph(6, 1, capacity=8 * 4096)
    pools = [g.store.pool() for _ in range(4)]
    barrier = threading.Barrier(4)

    def work(i):
        order = labels[:]
        random.Random(i).shuffle(order)
        barrier.wait()
        add_vertices(g, order, [i % 4] * len(order), pool=pools[i], delay=50)

    threads = [threading.Thread(target=work, args=(i,)) for i in range(4)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    distinct = set(labels)
    assert len(g) == len(distinct)
    assert sum(p.live for p in pools) == len(distinct)
    # worker i counts edge base i, once per occurrence of the label in its list
    mult = {l: labels.count(l) for l in distinct}
    for n in g.nodes():
        assert n.counters == tuple(mult[n.label] for _ in range(4))
