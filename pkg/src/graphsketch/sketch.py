"""Streaming covariance-preserving sketchers over similarity rows.

The primary sketcher is Frequent Directions: a 2d x n row buffer plus a
per-slot weight vector. Raw rows enter with weight 1; when the buffer is
full its weighted SVD is taken, the top d directions are kept with
energies shrunk by the d-th squared singular value, and the remaining
slots are freed. The Gram matrix of the weighted buffer then tracks the
Gram matrix of everything inserted so far within a spectral error of
(sum of squared row norms) / d, at every prefix of the stream.

Three baseline sketchers with the same insert/extract surface are
provided for comparison: signed hashing (count-sketch), dense random
projections, and squared-norm-weighted reservoir row sampling.
"""
from __future__ import annotations

import struct
from dataclasses import dataclass
from typing import IO, Iterable

import numpy as np
import scipy.linalg

from .linalg import _fix_signs, thin_svd

CHECKPOINT_MAGIC = b"FDSK"
CHECKPOINT_VERSION = 1

_KIND_CODES = {"fd": 0, "hashing": 1, "random_projection": 2, "sampling": 3}
_KIND_NAMES = {code: kind for kind, code in _KIND_CODES.items()}

_HASH_PRIME = (1 << 31) - 1


@dataclass(frozen=True)
class Embedding:
    """k x n embedding matrix; column j is the vector of node j."""

    k: int
    n: int
    values: np.ndarray
    provenance: str = ""


def _check_row(row: np.ndarray, n: int) -> np.ndarray:
    row = np.asarray(row, dtype=float)
    if row.shape != (n,):
        raise ValueError(f"row has shape {row.shape}, expected ({n},)")
    return row


def _spectral_factors(w: np.ndarray, k: int, sv_exponent: float, kind: str, rows_seen: int) -> Embedding:
    """Top-k rows of diag(sigma^sv_exponent) @ Vt from the thin SVD of w."""
    res = thin_svd(w)
    out = np.zeros((k, w.shape[1]))
    take = min(k, res.singular_values.size)
    out[:take] = (res.singular_values[:take] ** sv_exponent)[:, None] * res.Vt[:take]
    return Embedding(k=k, n=w.shape[1], values=out, provenance=f"{kind} rows_seen={rows_seen}")


class FrequentDirectionsSketch:
    """Deterministic streaming sketch with the 1/d covariance guarantee.

    ``buffer`` holds 2d slots: after a shrink the top d are orthogonal
    directions weighted by ``weights``; raw rows (weight 1) fill the
    remaining slots. ``seed`` is unused here and kept only so all
    sketcher states share one constructor shape.
    """

    kind = "fd"

    def __init__(self, d: int, n: int, seed: int = 0):
        if d < 1 or n < 1:
            raise ValueError("d and n must be positive")
        self.d = d
        self.n = n
        self.seed = seed
        self.buffer = np.zeros((2 * d, n))
        self.weights = np.ones(2 * d)
        self.fill = 0
        self.rows_seen = 0
        self._dirs = 0
        self._compressed: tuple[np.ndarray, np.ndarray] | None = None

    def insert(self, row: np.ndarray, index: int | None = None) -> None:
        row = _check_row(row, self.n)
        if not np.isfinite(row).all():
            raise ValueError("row contains non-finite entries")
        slot = self._dirs + self.fill
        self.buffer[slot] = row
        self.weights[slot] = 1.0
        self.fill += 1
        self.rows_seen += 1
        self._compressed = None
        if self._dirs + self.fill == 2 * self.d:
            self._shrink()

    def _shrink(self) -> None:
        # SVD of the transposed buffer reuses the buffer as LAPACK
        # workspace, keeping peak memory at two 2d x n arrays.
        self.buffer *= self.weights[:, None]
        u, s, _ = scipy.linalg.svd(
            self.buffer.T, full_matrices=False, overwrite_a=True, check_finite=False
        )
        d = self.d
        kept = min(d, s.size)
        pivot = s[d - 1] if s.size >= d else 0.0
        self.buffer[:] = 0.0
        # Right singular vectors of the buffer are the columns of u.
        anchor = np.argmax(np.abs(u[:, :kept]), axis=0)
        signs = np.sign(u[anchor, np.arange(kept)])
        signs[signs == 0] = 1.0
        self.buffer[:kept] = u[:, :kept].T * signs[:, None]
        self.weights[:d] = 0.0
        self.weights[:kept] = np.sqrt(np.maximum(s[:kept] ** 2 - pivot**2, 0.0))
        self.weights[d:] = 1.0
        self._dirs = d
        self.fill = 0

    def _compress(self) -> tuple[np.ndarray, np.ndarray]:
        """Singular values and orthogonal directions of the current buffer.

        Cached until the next insert; computed from the 2d x 2d Gram
        matrix so no second 2d x n scratch buffer is needed. Right after
        a shrink the buffer already is in this form.
        """
        if self._compressed is not None:
            return self._compressed
        if self.fill == 0 and self._dirs > 0:
            self._compressed = (self.weights[: self.d].copy(), self.buffer[: self.d])
            return self._compressed
        gram = self.buffer @ self.buffer.T
        gram *= np.outer(self.weights, self.weights)
        eigvals, eigvecs = np.linalg.eigh(gram)
        order = np.argsort(eigvals)[::-1]
        eigvals = np.maximum(eigvals[order], 0.0)
        s = np.sqrt(eigvals)
        nonzero = s > (s[0] * 1e-15 if s.size and s[0] > 0 else 0.0)
        s = s[nonzero]
        basis = (eigvecs[:, order[nonzero]].T * self.weights[None, :]) @ self.buffer
        basis /= s[:, None]
        _, basis = _fix_signs(np.empty((0, s.size)), basis)
        self._compressed = (s, basis)
        return self._compressed

    def embedding(self, k: int, sv_exponent: float = 0.5) -> Embedding:
        """Anytime extraction: top-k weighted directions of the sketch."""
        if self.rows_seen == 0:
            raise ValueError("cannot extract an embedding from an empty sketch")
        if not 1 <= k <= self.d:
            raise ValueError(f"k={k} out of range [1, {self.d}]")
        s, basis = self._compress()
        out = np.zeros((k, self.n))
        take = min(k, s.size)
        out[:take] = (s[:take] ** sv_exponent)[:, None] * basis[:take]
        return Embedding(k=k, n=self.n, values=out, provenance=f"fd rows_seen={self.rows_seen}")

    def nonzero_rows(self) -> Iterable[np.ndarray]:
        """Weighted buffer rows with positive norm (for merging)."""
        for slot in range(self._dirs + self.fill):
            w = self.weights[slot]
            if w == 0.0:
                continue
            row = self.buffer[slot]
            if not row.any():
                continue
            yield w * row


class _BaselineSketch:
    """Shared surface of the randomized baseline sketchers."""

    kind = "baseline"

    def __init__(self, d: int, n: int, seed: int = 0):
        if d < 1 or n < 1:
            raise ValueError("d and n must be positive")
        self.d = d
        self.n = n
        self.seed = seed
        self.matrix = np.zeros((d, n))
        self.rows_seen = 0

    def insert(self, row: np.ndarray, index: int) -> None:
        row = _check_row(row, self.n)
        self._update(row, index)
        self.rows_seen += 1

    def _update(self, row: np.ndarray, index: int) -> None:
        raise NotImplementedError

    def _extraction_matrix(self) -> np.ndarray:
        return self.matrix

    def embedding(self, k: int, sv_exponent: float = 0.5) -> Embedding:
        if self.rows_seen == 0:
            raise ValueError("cannot extract an embedding from an empty sketch")
        if not 1 <= k <= self.d:
            raise ValueError(f"k={k} out of range [1, {self.d}]")
        return _spectral_factors(
            self._extraction_matrix(), k, sv_exponent, self.kind, self.rows_seen
        )


def _hash_coefficients(seed: int, count: int) -> np.ndarray:
    rng = np.random.default_rng([seed, 0xA5])
    coeffs = rng.integers(0, _HASH_PRIME, size=count)
    coeffs[0] = max(int(coeffs[0]), 1)
    return coeffs


class HashingSketch(_BaselineSketch):
    """Count-sketch: row i accumulates into bucket h(i) with sign g(i).

    h is a 2-universal linear hash, g the parity of a degree-3 polynomial
    hash, both over a Mersenne prime with coefficients derived from the
    two stored seeds. Tests may overwrite ``bucket_coeffs``/``sign_coeffs``
    directly to pin specific hash values.
    """

    kind = "hashing"

    def __init__(self, d: int, n: int, seed: int = 0):
        super().__init__(d, n, seed)
        self.bucket_seed = seed
        self.sign_seed = seed + 1
        self.bucket_coeffs = _hash_coefficients(self.bucket_seed, 2)
        self.sign_coeffs = _hash_coefficients(self.sign_seed, 4)

    def bucket(self, index: int) -> int:
        a1, a0 = (int(c) for c in self.bucket_coeffs)
        return ((a1 * index + a0) % _HASH_PRIME) % self.d

    def sign(self, index: int) -> float:
        b3, b2, b1, b0 = (int(c) for c in self.sign_coeffs)
        value = (b3 * index**3 + b2 * index**2 + b1 * index + b0) % _HASH_PRIME
        return 1.0 if value % 2 == 0 else -1.0

    def _update(self, row: np.ndarray, index: int) -> None:
        self.matrix[self.bucket(index)] += self.sign(index) * row


class RandomProjectionSketch(_BaselineSketch):
    """Rank-one updates with +-1/sqrt(d) mixing vectors keyed by (seed, row)."""

    kind = "random_projection"

    def _update(self, row: np.ndarray, index: int) -> None:
        rng = np.random.default_rng([self.seed, index])
        mix = (2.0 * rng.integers(0, 2, size=self.d) - 1.0) / np.sqrt(self.d)
        self.matrix += np.outer(mix, row)


class SamplingSketch(_BaselineSketch):
    """d independent weighted reservoirs over rows, weight = squared norm.

    Each slot keeps the row maximizing log(u)/||row||^2 over the stream
    (one uniform u per slot per row, keyed by (seed, row)), which samples
    proportionally to squared norms. Rows are rescaled at extraction time
    once the full squared Frobenius norm is known.
    """

    kind = "sampling"

    def __init__(self, d: int, n: int, seed: int = 0):
        super().__init__(d, n, seed)
        self.slot_keys = np.full(d, -np.inf)
        self.slot_indices = np.full(d, -1, dtype=np.int64)
        self.slot_norms_sq = np.zeros(d)
        self.total_sq_norm = 0.0

    def _update(self, row: np.ndarray, index: int) -> None:
        norm_sq = float(row @ row)
        self.total_sq_norm += norm_sq
        if norm_sq == 0.0:
            return
        uniforms = 1.0 - np.random.default_rng([self.seed, index]).random(self.d)
        keys = np.log(uniforms) / norm_sq
        replace = keys > self.slot_keys
        if replace.any():
            self.slot_keys[replace] = keys[replace]
            self.slot_indices[replace] = index
            self.slot_norms_sq[replace] = norm_sq
            self.matrix[replace] = row

    def _extraction_matrix(self) -> np.ndarray:
        occupied = self.slot_norms_sq > 0.0
        scale = np.zeros(self.d)
        scale[occupied] = np.sqrt(self.total_sq_norm / (self.d * self.slot_norms_sq[occupied]))
        return scale[:, None] * self.matrix


Sketch = FrequentDirectionsSketch | HashingSketch | RandomProjectionSketch | SamplingSketch


def make_sketch(kind: str, d: int, n: int, seed: int = 0) -> Sketch:
    classes = {
        "fd": FrequentDirectionsSketch,
        "hashing": HashingSketch,
        "random_projection": RandomProjectionSketch,
        "sampling": SamplingSketch,
    }
    if kind not in classes:
        raise ValueError(f"unknown sketcher kind {kind!r}")
    return classes[kind](d, n, seed)


def merge(a: Sketch, b: Sketch) -> Sketch:
    """Combine two sketches of disjoint row sets into one.

    Frequent Directions: stream both weighted buffers through a fresh
    sketch, which preserves the 1/d covariance bound on the concatenated
    stream. Hashing and random projections sum their accumulators, which
    requires identical seeds; sampling merges reservoirs by key.
    """
    if type(a) is not type(b):
        raise ValueError(f"cannot merge sketcher kinds {a.kind!r} and {b.kind!r}")
    if (a.d, a.n) != (b.d, b.n):
        raise ValueError("cannot merge sketches with different shapes")

    if isinstance(a, FrequentDirectionsSketch):
        merged = FrequentDirectionsSketch(a.d, a.n, seed=a.seed)
        for state in (a, b):
            for row in state.nonzero_rows():
                merged.insert(row)
        merged.rows_seen = a.rows_seen + b.rows_seen
        return merged

    if a.seed != b.seed:
        raise ValueError(f"{a.kind} sketches can only be merged with equal seeds")
    if isinstance(a, SamplingSketch):
        merged = SamplingSketch(a.d, a.n, seed=a.seed)
        winner_b = b.slot_keys > a.slot_keys
        merged.slot_keys = np.where(winner_b, b.slot_keys, a.slot_keys)
        merged.slot_indices = np.where(winner_b, b.slot_indices, a.slot_indices)
        merged.slot_norms_sq = np.where(winner_b, b.slot_norms_sq, a.slot_norms_sq)
        merged.matrix = np.where(winner_b[:, None], b.matrix, a.matrix)
        merged.total_sq_norm = a.total_sq_norm + b.total_sq_norm
        merged.rows_seen = a.rows_seen + b.rows_seen
        return merged

    merged = make_sketch(a.kind, a.d, a.n, seed=a.seed)
    merged.matrix = a.matrix + b.matrix
    merged.rows_seen = a.rows_seen + b.rows_seen
    return merged


def _f64_bytes(arr: np.ndarray) -> bytes:
    return np.ascontiguousarray(arr, dtype="<f8").tobytes()


def save_sketch(state: Sketch, stream: IO[bytes]) -> None:
    """Binary checkpoint: FDSK magic, header, then kind-specific payload."""
    fill = state.fill if isinstance(state, FrequentDirectionsSketch) else 0
    stream.write(CHECKPOINT_MAGIC)
    stream.write(
        struct.pack(
            "<IBIQQI",
            CHECKPOINT_VERSION,
            _KIND_CODES[state.kind],
            state.d,
            state.n,
            state.rows_seen,
            fill,
        )
    )
    if isinstance(state, FrequentDirectionsSketch):
        stream.write(_f64_bytes(state.weights))
        stream.write(_f64_bytes(state.buffer))
    elif isinstance(state, HashingSketch):
        stream.write(struct.pack("<QQ", state.bucket_seed, state.sign_seed))
        stream.write(_f64_bytes(state.matrix))
    elif isinstance(state, RandomProjectionSketch):
        stream.write(struct.pack("<Q", state.seed))
        stream.write(_f64_bytes(state.matrix))
    else:
        stream.write(struct.pack("<Qd", state.seed, state.total_sq_norm))
        stream.write(_f64_bytes(state.slot_keys))
        stream.write(np.ascontiguousarray(state.slot_indices, dtype="<i8").tobytes())
        stream.write(_f64_bytes(state.slot_norms_sq))
        stream.write(_f64_bytes(state.matrix))


def _read_exact(stream: IO[bytes], count: int) -> bytes:
    data = stream.read(count)
    if len(data) != count:
        raise ValueError("truncated sketch checkpoint")
    return data


def _read_f64(stream: IO[bytes], shape: tuple[int, ...]) -> np.ndarray:
    count = int(np.prod(shape))
    data = _read_exact(stream, count * 8)
    return np.frombuffer(data, dtype="<f8").astype(float).reshape(shape)


def load_sketch(stream: IO[bytes]) -> Sketch:
    if _read_exact(stream, 4) != CHECKPOINT_MAGIC:
        raise ValueError("not a sketch checkpoint (bad magic)")
    version, kind_code, d, n, rows_seen, fill = struct.unpack(
        "<IBIQQI", _read_exact(stream, struct.calcsize("<IBIQQI"))
    )
    if version != CHECKPOINT_VERSION:
        raise ValueError(f"unsupported checkpoint version {version}")
    if kind_code not in _KIND_NAMES:
        raise ValueError(f"unknown sketcher kind code {kind_code}")
    kind = _KIND_NAMES[kind_code]

    if kind == "fd":
        state = FrequentDirectionsSketch(d, int(n))
        state.weights = _read_f64(stream, (2 * d,))
        state.buffer = _read_f64(stream, (2 * d, int(n)))
        state.rows_seen = int(rows_seen)
        state.fill = int(fill)
        # A shrink always zeroes the weight of the d-th slot and nothing
        # else ever does, so it marks whether directions are present.
        state._dirs = d if state.weights[d - 1] == 0.0 else 0
        return state
    if kind == "hashing":
        bucket_seed, sign_seed = struct.unpack("<QQ", _read_exact(stream, 16))
        state = HashingSketch(d, int(n), seed=int(bucket_seed))
        state.bucket_seed = int(bucket_seed)
        state.sign_seed = int(sign_seed)
        state.bucket_coeffs = _hash_coefficients(state.bucket_seed, 2)
        state.sign_coeffs = _hash_coefficients(state.sign_seed, 4)
        state.matrix = _read_f64(stream, (d, int(n)))
        state.rows_seen = int(rows_seen)
        return state
    if kind == "random_projection":
        (seed,) = struct.unpack("<Q", _read_exact(stream, 8))
        state = RandomProjectionSketch(d, int(n), seed=int(seed))
        state.matrix = _read_f64(stream, (d, int(n)))
        state.rows_seen = int(rows_seen)
        return state
    seed, total_sq = struct.unpack("<Qd", _read_exact(stream, 16))
    state = SamplingSketch(d, int(n), seed=int(seed))
    state.total_sq_norm = float(total_sq)
    state.slot_keys = _read_f64(stream, (d,))
    state.slot_indices = np.frombuffer(_read_exact(stream, d * 8), dtype="<i8").astype(np.int64)
    state.slot_norms_sq = _read_f64(stream, (d,))
    state.matrix = _read_f64(stream, (d, int(n)))
    state.rows_seen = int(rows_seen)
    return state


def write_embedding_text(embedding: Embedding, original_ids: np.ndarray, stream: IO[str]) -> None:
    """Text format: header "n k", then one "original_id v1 ... vk" line per node."""
    stream.write(f"{embedding.n} {embedding.k}\n")
    for node in range(embedding.n):
        coords = " ".join(f"{v:.12g}" for v in embedding.values[:, node])
        stream.write(f"{original_ids[node]} {coords}\n")


def read_embedding_text(stream: Iterable[str]) -> tuple[np.ndarray, np.ndarray]:
    """Read the text format back as (original_ids, n x k matrix)."""
    lines = iter(stream)
    try:
        n, k = (int(tok) for tok in next(lines).split())
    except (StopIteration, ValueError):
        raise ValueError("embedding file missing 'n k' header") from None
    ids = np.empty(n, dtype=np.int64)
    vectors = np.empty((n, k))
    for i in range(n):
        parts = next(lines).split()
        if len(parts) != k + 1:
            raise ValueError(f"embedding row {i} has {len(parts) - 1} values, expected {k}")
        ids[i] = int(parts[0])
        vectors[i] = [float(tok) for tok in parts[1:]]
    return ids, vectors
