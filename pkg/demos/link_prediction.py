"""Link prediction with the five edge-feature operators.

Takes a two-community graph, hides half of the edges from the embedding,
then trains a logistic model on edge features built from the retained
embedding to tell held-out edges from sampled non-edges. Prints
accuracy and ROC-AUC per operator; hadamard is usually the strongest.

Run:  python demos/link_prediction.py
"""
import numpy as np

import graphsketch as gs


def main():
    rng = np.random.default_rng(13)
    iu = np.triu_indices(200, k=1)
    same = (iu[0] < 100) == (iu[1] < 100)
    mask = rng.random(len(iu[0])) < np.where(same, 0.15, 0.01)
    edges = np.stack([iu[0][mask], iu[1][mask]], axis=1)
    keep = rng.random(len(edges)) < 0.5
    visible, hidden = edges[keep], edges[~keep]

    graph, ids = gs.load_edgelist((f"{u} {v}" for u, v in visible), undirected=True)
    print(f"visible graph: {graph.n} nodes, {graph.m} edges; {len(hidden)} held-out edges")

    config = gs.RunConfig(
        dim=32, sketcher="fd", ppr=gs.PprConfig(alpha=0.5, method="exact"), seed=1
    )
    state = gs.embed_stream(graph, config)
    embedding = state.embedding(config.dim)

    back = {int(orig): i for i, orig in enumerate(ids)}
    positives = np.array(
        [[back[u], back[v]] for u, v in hidden if u in back and v in back]
    )
    negatives = gs.sample_non_edges(graph, len(positives), seed=2)

    print("\noperator\taccuracy\tauc")
    for op in ("average", "concat", "hadamard", "weighted_l1", "weighted_l2"):
        accuracy, auc = gs.link_predict(embedding, positives, negatives, op, 0.5, seed=3)
        print(f"{op}\t{accuracy:.4f}\t{auc:.4f}")


if __name__ == "__main__":
    main()
