"""Rows of the log-scaled personalized-PageRank similarity matrix.

Each node v yields a dense length-n row: first its PPR vector (exact
power iteration or Monte-Carlo random walks), then the entrywise
transform max(log(n * p), 0). Rows for distinct nodes are independent;
Monte-Carlo draws come from a stream keyed by (seed, node), so rows may
be computed in parallel and in any order with identical results.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import Graph


class PprConvergenceError(RuntimeError):
    """Power iteration failed to reach tolerance; carries last residual."""

    def __init__(self, node: int, residual: float, iterations: int):
        super().__init__(
            f"PPR for node {node} did not converge within {iterations} iterations "
            f"(last L1 residual {residual:.3e})"
        )
        self.node = node
        self.residual = residual
        self.iterations = iterations


@dataclass(frozen=True)
class PprConfig:
    """Damping, solver choice and solver knobs for PPR rows."""

    alpha: float = 0.85
    method: str = "exact"
    tol: float = 1e-8
    max_iters: int = 1000
    walks_per_node: int = 10_000
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.alpha <= 1.0:
            raise ValueError(f"alpha must be in (0, 1], got {self.alpha}")
        if self.method not in ("exact", "monte_carlo"):
            raise ValueError(f"unknown PPR method {self.method!r}")
        if self.tol <= 0:
            raise ValueError("tol must be positive")
        if self.walks_per_node < 1:
            raise ValueError("walks_per_node must be >= 1")


@dataclass(frozen=True)
class SimilarityRow:
    """One log-transformed similarity row; all entries finite and >= 0."""

    node: int
    values: np.ndarray


def ppr_exact(g: Graph, v: int, cfg: PprConfig) -> np.ndarray:
    """Fixed point of x = alpha * e_v + (1 - alpha) * P^T x by power iteration.

    Out-degree-0 nodes redirect their full mass back to the restart node,
    which keeps every iterate an exact probability distribution. Raises
    PprConvergenceError if the L1 step size stays above cfg.tol.
    """
    if not 0 <= v < g.n:
        raise ValueError(f"node {v} out of range [0, {g.n})")
    p = g.transition_matrix()
    dangling = g.degrees == 0
    x = np.full(g.n, 1.0 / g.n)
    residual = np.inf
    for _ in range(cfg.max_iters):
        x_next = (1.0 - cfg.alpha) * (x @ p)
        x_next[v] += cfg.alpha + (1.0 - cfg.alpha) * x[dangling].sum()
        residual = np.abs(x_next - x).sum()
        x = x_next
        if residual <= cfg.tol:
            return x
    raise PprConvergenceError(v, residual, cfg.max_iters)


def ppr_monte_carlo(g: Graph, v: int, cfg: PprConfig) -> np.ndarray:
    """Empirical PPR estimate from geometrically terminated random walks.

    Every walk starts at v; at each step it terminates with probability
    alpha, otherwise moves to a uniform out-neighbor. Walks stranded at
    an out-degree-0 node terminate there. The returned vector is the
    terminal-node frequency over cfg.walks_per_node walks, deterministic
    given (cfg.seed, v).
    """
    if not 0 <= v < g.n:
        raise ValueError(f"node {v} out of range [0, {g.n})")
    rng = np.random.default_rng([cfg.seed, v])
    counts = np.zeros(g.n, dtype=np.int64)
    active = np.full(cfg.walks_per_node, v, dtype=np.int64)
    while active.size:
        stopped = rng.random(active.size) < cfg.alpha
        counts += np.bincount(active[stopped], minlength=g.n)
        active = active[~stopped]
        if not active.size:
            break
        deg = g.degrees[active]
        stranded = deg == 0
        if stranded.any():
            counts += np.bincount(active[stranded], minlength=g.n)
            active = active[~stranded]
            deg = deg[~stranded]
            if not active.size:
                break
        step = np.minimum((rng.random(active.size) * deg).astype(np.int64), deg - 1)
        active = g.targets[g.offsets[active] + step]
    return counts / float(cfg.walks_per_node)


def log_transform(p: np.ndarray, n: int) -> np.ndarray:
    """Entrywise max(log(n * p), 0); zero probabilities stay at 0."""
    values = np.zeros(len(p))
    positive = p > 0
    values[positive] = np.maximum(np.log(n * p[positive]), 0.0)
    return values


def similarity_row(g: Graph, v: int, cfg: PprConfig) -> SimilarityRow:
    """Compute one full similarity row for node v under cfg."""
    if cfg.method == "exact":
        ppr = ppr_exact(g, v, cfg)
    else:
        ppr = ppr_monte_carlo(g, v, cfg)
    return SimilarityRow(node=v, values=log_transform(ppr, g.n))
