"""Shared synthetic-graph builders for the test suite."""
from __future__ import annotations

import numpy as np
import pytest

import graphsketch as gs


def block_model_lines(block_sizes, probs, seed):
    """Edge-list lines for a stochastic block model.

    ``probs[a][b]`` is the edge probability between blocks a and b;
    node ids are assigned block by block.
    """
    rng = np.random.default_rng(seed)
    n = int(sum(block_sizes))
    bounds = np.cumsum([0] + list(block_sizes))
    block_of = np.searchsorted(bounds, np.arange(n), side="right") - 1
    iu = np.triu_indices(n, k=1)
    p = np.asarray(probs)[block_of[iu[0]], block_of[iu[1]]]
    mask = rng.random(len(p)) < p
    return [f"{u} {v}" for u, v in zip(iu[0][mask], iu[1][mask])]


def block_model_graph(block_sizes, probs, seed):
    """Graph plus per-node block labels aligned with internal node ids."""
    lines = block_model_lines(block_sizes, probs, seed)
    g, ids = gs.load_edgelist(iter(lines), undirected=True)
    bounds = np.cumsum([0] + list(block_sizes))
    block_of = np.searchsorted(bounds, ids, side="right") - 1
    labels = gs.LabelSet(
        labels=[[int(b)] for b in block_of], label_count=len(block_sizes)
    )
    return g, ids, labels


def gnp_graph(n, p, seed):
    rng = np.random.default_rng(seed)
    iu = np.triu_indices(n, k=1)
    mask = rng.random(len(iu[0])) < p
    lines = [f"{u} {v}" for u, v in zip(iu[0][mask], iu[1][mask])]
    g, ids = gs.load_edgelist(iter(lines), undirected=True)
    return g, ids


@pytest.fixture(scope="session")
def triangle():
    g, ids = gs.load_edgelist(iter(["0 1", "1 2", "2 0"]), undirected=True)
    return g


@pytest.fixture(scope="session")
def two_path():
    g, ids = gs.load_edgelist(iter(["0 1"]), undirected=True)
    return g
