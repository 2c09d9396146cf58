"""Dense kernels and error metrics for short-and-wide row buffers.

The covariance error is computed matrix-free: the n x n difference
between the stream's Gram matrix and the sketch's Gram matrix is only
ever applied to vectors, one pass over the row stream per power-iteration
step, so memory stays linear in n.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Union

import numpy as np

RowSource = Union[np.ndarray, Callable[[], Iterable[np.ndarray]]]

DEFAULT_DENSE_GUARD = 20_000


class CapabilityError(RuntimeError):
    """Operation requires materializing a matrix beyond the dense-size guard."""


@dataclass(frozen=True)
class SvdResult:
    """Thin SVD M = U @ diag(singular_values) @ Vt with deterministic signs."""

    U: np.ndarray
    singular_values: np.ndarray
    Vt: np.ndarray


def _fix_signs(u: np.ndarray, vt: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Flip each singular pair so the largest-|entry| of its right vector is positive."""
    if vt.shape[0] == 0:
        return u, vt
    anchor = np.argmax(np.abs(vt), axis=1)
    signs = np.sign(vt[np.arange(vt.shape[0]), anchor])
    signs[signs == 0] = 1.0
    return u * signs[None, :], vt * signs[:, None]


def thin_svd(m: np.ndarray) -> SvdResult:
    """Thin SVD of a dense matrix, singular values sorted descending."""
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.size == 0:
        raise ValueError("thin_svd expects a non-empty 2-D matrix")
    if not np.isfinite(m).all():
        raise ValueError("thin_svd input contains non-finite entries")
    u, s, vt = np.linalg.svd(m, full_matrices=False)
    u, vt = _fix_signs(u, vt)
    return SvdResult(U=u, singular_values=s, Vt=vt)


def _embedding_matrix(embedding) -> np.ndarray:
    values = getattr(embedding, "values", embedding)
    values = np.asarray(values, dtype=float)
    if values.ndim == 1:
        values = values[None, :]
    return values


def _row_chunks(rows: RowSource, chunk_rows: int = 256) -> Iterable[np.ndarray]:
    """Yield 2-D float blocks from an array or a re-iterable row stream."""
    if isinstance(rows, np.ndarray):
        if rows.ndim != 2:
            raise ValueError("row source array must be 2-D")
        for start in range(0, rows.shape[0], chunk_rows):
            yield np.asarray(rows[start:start + chunk_rows], dtype=float)
        return
    iterable = rows() if callable(rows) else rows
    block: list[np.ndarray] = []
    for row in iterable:
        block.append(np.asarray(row, dtype=float))
        if len(block) == chunk_rows:
            yield np.stack(block)
            block = []
    if block:
        yield np.stack(block)


def covariance_error(
    rows: RowSource,
    embedding,
    max_iters: int = 200,
    rel_tol: float = 1e-9,
    chunk_rows: int = 256,
) -> float:
    """Spectral-norm covariance error ||M^T M - E^T E||_2 / ||M||_F^2.

    ``rows`` must be re-iterable (an array, or a callable returning a
    fresh iterator per pass): the spectral norm comes from power
    iteration on x -> M^T(Mx) - E^T(Ex), one stream pass per step.
    """
    e = _embedding_matrix(embedding)
    frob_sq = 0.0
    n = None
    for block in _row_chunks(rows, chunk_rows):
        frob_sq += float(np.einsum("ij,ij->", block, block))
        n = block.shape[1]
    if n is None:
        raise ValueError("empty row stream")
    if e.shape[1] != n:
        raise ValueError(f"embedding width {e.shape[1]} != row length {n}")
    if frob_sq == 0.0:
        raise ValueError("zero row stream: covariance error undefined")

    x = np.random.default_rng(0x5EED).standard_normal(n)
    x /= np.linalg.norm(x)
    estimate = 0.0
    for _ in range(max_iters):
        y = -e.T @ (e @ x)
        for block in _row_chunks(rows, chunk_rows):
            y += block.T @ (block @ x)
        norm_y = float(np.linalg.norm(y))
        if norm_y == 0.0:
            return 0.0
        converged = abs(norm_y - estimate) <= rel_tol * norm_y
        estimate = norm_y
        if converged:
            break
        x = y / norm_y
    return estimate / frob_sq


def _materialize(rows: RowSource, max_nodes: int) -> np.ndarray:
    blocks = list(_row_chunks(rows))
    if not blocks:
        raise ValueError("empty row stream")
    m = np.concatenate(blocks, axis=0)
    if m.shape[1] > max_nodes:
        raise CapabilityError(
            f"dense SVD guard: {m.shape[1]} columns exceeds limit {max_nodes}"
        )
    return m


def projection_error(
    rows: RowSource,
    embedding,
    k: int,
    max_nodes: int = DEFAULT_DENSE_GUARD,
) -> float:
    """Rank-k projection error ||M - pi_E^k(M)||_F^2 / ||M - [M]_k||_F^2.

    Projects the stream onto the span of the embedding's top-k right
    singular vectors. The denominator needs a dense SVD of M, so this is
    guarded desk-scale-only.
    """
    e = _embedding_matrix(embedding)
    if not 1 <= k <= e.shape[0]:
        raise ValueError(f"k={k} exceeds the embedding's {e.shape[0]} directions")
    m = _materialize(rows, max_nodes)
    if e.shape[1] != m.shape[1]:
        raise ValueError("embedding width does not match row length")

    vk = thin_svd(e).Vt[:k]
    residual = m - (m @ vk.T) @ vk
    numerator = float(np.einsum("ij,ij->", residual, residual))

    sigma = np.linalg.svd(m, compute_uv=False)
    denominator = float(np.square(sigma[k:]).sum())
    if denominator == 0.0:
        raise ValueError(f"rank of stream <= {k}: projection error undefined")
    return numerator / denominator


def svd_oracle_embedding(
    m: np.ndarray,
    d: int,
    sv_exponent: float = 0.5,
    max_nodes: int = DEFAULT_DENSE_GUARD,
):
    """Optimal rank-d factor diag(sigma^sv_exponent) @ Vt from a full SVD.

    Desk-scale reference only: raises CapabilityError beyond the
    column-count guard.
    """
    from .sketch import Embedding

    m = np.asarray(m, dtype=float)
    if m.ndim != 2:
        raise ValueError("expected a 2-D matrix")
    if m.shape[1] > max_nodes:
        raise CapabilityError(
            f"dense SVD guard: {m.shape[1]} columns exceeds limit {max_nodes}"
        )
    if not 1 <= d <= min(m.shape):
        raise ValueError(f"d={d} out of range for a {m.shape} matrix")
    res = thin_svd(m)
    values = (res.singular_values[:d] ** sv_exponent)[:, None] * res.Vt[:d]
    return Embedding(
        k=d,
        n=m.shape[1],
        values=values,
        provenance=f"svd rows_seen={m.shape[0]}",
    )
