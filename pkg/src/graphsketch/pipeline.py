"""End-to-end embedding runs: similarity rows streamed into a sketcher.

Row production can run on a thread pool (numpy releases the GIL in the
heavy parts); rows are always consumed in the configured node order by a
single writer, so results are identical for any worker count.
"""
from __future__ import annotations

from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .graph import Graph
from .linalg import CapabilityError, svd_oracle_embedding
from .similarity import PprConfig, similarity_row
from .sketch import Embedding, Sketch, make_sketch

SKETCHER_KINDS = ("fd", "hashing", "random_projection", "sampling", "svd")

CheckpointCallback = Callable[[Sketch, int, float], None]


@dataclass(frozen=True)
class RunConfig:
    """Everything an embedding run depends on besides the graph itself."""

    dim: int = 128
    sketcher: str = "fd"
    ppr: PprConfig = field(default_factory=PprConfig)
    order: str = "random"
    seed: int = 0
    checkpoint_every: float = 1.0
    sv_exponent: float = 0.5
    workers: int = 1

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dim must be >= 1")
        if self.sketcher not in SKETCHER_KINDS:
            raise ValueError(f"unknown sketcher {self.sketcher!r}")
        if not 0.0 < self.checkpoint_every <= 1.0:
            raise ValueError("checkpoint_every must be in (0, 1]")
        if self.order not in ("random", "natural"):
            raise ValueError("order must be 'random' or 'natural'")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")


def node_order(n: int, order: str, seed: int) -> np.ndarray:
    if order == "natural":
        return np.arange(n, dtype=np.int64)
    return np.random.default_rng([seed, 0x08D]).permutation(n).astype(np.int64)


def similarity_matrix(g: Graph, ppr: PprConfig) -> np.ndarray:
    """Materialize all similarity rows (desk-scale; row i = node i)."""
    m = np.empty((g.n, g.n))
    for v in range(g.n):
        m[v] = similarity_row(g, v, ppr).values
    return m


def _checkpoint_marks(n: int, fraction: float) -> list[int]:
    """Row counts after which a snapshot is due; always includes n."""
    count = int(np.ceil(1.0 / fraction - 1e-9))
    marks = sorted({min(n, int(np.ceil(fraction * i * n - 1e-9))) for i in range(1, count + 1)})
    if marks[-1] != n:
        marks.append(n)
    return [m for m in marks if m > 0]


def embed_stream(
    g: Graph,
    config: RunConfig,
    state: Sketch | None = None,
    checkpoint: CheckpointCallback | None = None,
) -> Sketch:
    """Stream similarity rows through a sketcher, in the configured order.

    Pass an existing ``state`` to resume: the first ``state.rows_seen``
    nodes of the (deterministic) order are skipped.
    """
    if config.sketcher == "svd":
        raise ValueError("the svd oracle is not a streaming sketcher; use embed_oracle")
    if state is None:
        state = make_sketch(config.sketcher, config.dim, g.n, seed=config.seed)
    elif state.kind != config.sketcher or state.d != config.dim or state.n != g.n:
        raise ValueError("resume state does not match the run configuration")

    order = node_order(g.n, config.order, config.seed)
    todo = order[state.rows_seen:]
    marks = deque(m for m in _checkpoint_marks(g.n, config.checkpoint_every) if m > state.rows_seen)

    def consume(row) -> None:
        state.insert(row.values, index=row.node)
        if marks and state.rows_seen >= marks[0]:
            marks.popleft()
            if checkpoint is not None:
                checkpoint(state, state.rows_seen, state.rows_seen / g.n)

    if config.workers == 1:
        for v in todo:
            consume(similarity_row(g, int(v), config.ppr))
    else:
        window = 2 * config.workers
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            pending = deque()
            for v in todo:
                pending.append(pool.submit(similarity_row, g, int(v), config.ppr))
                if len(pending) >= window:
                    consume(pending.popleft().result())
            while pending:
                consume(pending.popleft().result())
    return state


def embed_oracle(g: Graph, config: RunConfig, max_nodes: int = 20_000) -> Embedding:
    """Dense-SVD reference embedding of the full similarity matrix."""
    if g.n > max_nodes:
        raise CapabilityError(f"svd oracle guard: {g.n} nodes exceeds limit {max_nodes}")
    m = similarity_matrix(g, config.ppr)
    return svd_oracle_embedding(m, config.dim, sv_exponent=config.sv_exponent, max_nodes=max_nodes)
