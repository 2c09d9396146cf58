"""Anytime behavior: classification quality as rows stream in.

The sketch is usable after any prefix of processed nodes. This demo
streams a labeled four-community graph in random order, snapshots the
embedding at every 10% of nodes, and prints micro-F1 per snapshot. The
curve typically saturates long before the full pass.

Run:  python demos/anytime_classification.py
"""
import numpy as np

import graphsketch as gs


def labeled_communities(block, blocks, p_in, p_out, seed):
    rng = np.random.default_rng(seed)
    n = block * blocks
    iu = np.triu_indices(n, k=1)
    same = (iu[0] // block) == (iu[1] // block)
    mask = rng.random(len(iu[0])) < np.where(same, p_in, p_out)
    lines = (f"{u} {v}" for u, v in zip(iu[0][mask], iu[1][mask]))
    graph, ids = gs.load_edgelist(lines, undirected=True)
    labels = gs.LabelSet(
        labels=[[int(orig) // block] for orig in ids], label_count=blocks
    )
    return graph, labels


def main():
    graph, labels = labeled_communities(200, 4, p_in=0.1, p_out=0.005, seed=3)
    matrix = gs.similarity_matrix(graph, gs.PprConfig(alpha=0.5, method="exact"))
    d = 64
    split = gs.make_split(labels, train_fraction=0.5, seed=0)

    state = gs.FrequentDirectionsSketch(d, graph.n)
    order = gs.node_order(graph.n, "random", seed=0)
    marks = {int(round(frac * graph.n)) for frac in np.arange(0.1, 1.01, 0.1)}

    print("%nodes\tmicro-F1\tmacro-F1")
    for i, v in enumerate(order, start=1):
        state.insert(matrix[v], index=int(v))
        if i in marks:
            micro, macro = gs.classify(state.embedding(d), labels, split)
            print(f"{100 * i // graph.n}\t{micro:.4f}\t{macro:.4f}")


if __name__ == "__main__":
    main()
