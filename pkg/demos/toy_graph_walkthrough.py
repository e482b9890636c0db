"""Walk through a tiny graph built from one read.

Builds the k=4 graph of ``ACGACGACGC``, prints every vertex with its
edge weights, then extracts contigs.

    python demos/toy_graph_walkthrough.py
"""

from lockfree_dbg import Graph, extract_contigs, make_graph, snapshot_canonical

g = Graph(k=4, table_size=16)
make_graph(g, ["ACGACGACGC"])

# label, first flag, weights in A,C,T,G order, successor labels
print(snapshot_canonical(g))

for node in g.nodes():
    for base in "ACTG":
        if node.counter(base):
            print(f"{node.label} -{base}-> {node.successor(base).label}  weight {node.counter(base)}")

# ACG branches (to CGA and CGC) so one walk starts per outgoing edge
for contig in extract_contigs(g):
    print(contig.start_label, contig.sequence)
