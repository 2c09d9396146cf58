"""Covariance and projection error of the four sketchers, swept over d.

Builds a two-community graph, materializes its exact log-PPR similarity
matrix, streams the rows through every sketcher at increasing sketch
dimensions, and prints the resulting error table next to the dense-SVD
reference. Expect frequent-directions to track the SVD floor while the
randomized sketchers sit one to two orders of magnitude above it.

Run:  python demos/sketch_quality.py
"""
import numpy as np

import graphsketch as gs


def community_graph(sizes, p_in, p_out, seed):
    rng = np.random.default_rng(seed)
    n = sum(sizes)
    iu = np.triu_indices(n, k=1)
    same = (iu[0] < sizes[0]) == (iu[1] < sizes[0])
    mask = rng.random(len(iu[0])) < np.where(same, p_in, p_out)
    lines = (f"{u} {v}" for u, v in zip(iu[0][mask], iu[1][mask]))
    graph, _ = gs.load_edgelist(lines, undirected=True)
    return graph


def main():
    graph = community_graph([400, 100], p_in=0.02, p_out=0.002, seed=7)
    print(f"graph: {graph.n} nodes, {graph.m} edges")

    # One dense row per node: log(n * PPR_v), the matrix the sketchers see.
    matrix = gs.similarity_matrix(graph, gs.PprConfig(alpha=0.15, method="exact"))
    print(f"similarity matrix: {matrix.shape}, squared Frobenius {np.sum(matrix**2):.1f}")

    kinds = ("fd", "hashing", "random_projection", "sampling")
    print("\nd\t" + "\t".join(f"ce({k})" for k in kinds) + "\tce(svd)\tpe10(fd)")
    for d in (16, 32, 64, 128):
        row = [str(d)]
        fd_state = None
        for kind in kinds:
            state = gs.make_sketch(kind, d, graph.n, seed=1)
            for v in gs.node_order(graph.n, "random", 1):
                state.insert(matrix[v], index=int(v))
            if kind == "fd":
                fd_state = state
            ce = gs.covariance_error(matrix, state.embedding(d, sv_exponent=1.0))
            row.append(f"{ce:.2e}")
        oracle = gs.svd_oracle_embedding(matrix, d, sv_exponent=1.0)
        row.append(f"{gs.covariance_error(matrix, oracle):.2e}")
        row.append(f"{gs.projection_error(matrix, fd_state.embedding(d, sv_exponent=1.0), 10):.6f}")
        print("\t".join(row))

    # Mergeability: two sketches built on disjoint halves of the rows
    # combine into one whose error still honors the 1/d bound.
    d = 32
    half = graph.n // 2
    a = gs.FrequentDirectionsSketch(d, graph.n)
    b = gs.FrequentDirectionsSketch(d, graph.n)
    for v in range(half):
        a.insert(matrix[v])
    for v in range(half, graph.n):
        b.insert(matrix[v])
    merged = gs.merge(a, b)
    ce = gs.covariance_error(matrix, merged.embedding(d, sv_exponent=1.0))
    print(f"\nmerge of half-splits at d={d}: ce={ce:.2e} (bound {1 / d:.2e})")


if __name__ == "__main__":
    main()
