"""Compressed adjacency graphs loaded from edge-list text.

Node ids found in the input are remapped to a dense range [0, n) in
first-seen order; the mapping back to the original ids is returned
alongside the graph and can be written to a sidecar file.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import IO, Iterable

import numpy as np
import scipy.sparse as sp


class EdgeListParseError(ValueError):
    """Malformed edge-list input, carrying the offending line number."""

    def __init__(self, message: str, line_number: int):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


@dataclass(frozen=True)
class Graph:
    """Immutable directed multigraph-free adjacency in CSR layout.

    ``offsets`` has length ``n + 1``; the out-neighbors of node ``v`` are
    ``targets[offsets[v]:offsets[v + 1]]``. Undirected edges are counted
    once in ``m`` but stored as two arcs.
    """

    n: int
    m: int
    offsets: np.ndarray
    targets: np.ndarray
    degrees: np.ndarray
    _p_cache: list = field(default_factory=list, repr=False, compare=False)

    def __post_init__(self):
        if self.offsets.shape != (self.n + 1,):
            raise ValueError("offsets must have length n + 1")
        if np.any(np.diff(self.offsets) < 0) or self.offsets[-1] != len(self.targets):
            raise ValueError("offsets must be non-decreasing and end at len(targets)")
        if not np.array_equal(self.degrees, np.diff(self.offsets)):
            raise ValueError("degrees must equal offsets[i+1] - offsets[i]")
        if len(self.targets) and (self.targets.min() < 0 or self.targets.max() >= self.n):
            raise ValueError("target index out of range")

    def out_neighbors(self, v: int) -> np.ndarray:
        return self.targets[self.offsets[v]:self.offsets[v + 1]]

    def transition_matrix(self) -> sp.csr_matrix:
        """Row-stochastic P = D^-1 A as a CSR matrix (cached).

        Rows of out-degree-0 nodes are left all-zero; callers decide how
        that missing probability mass is handled.
        """
        if not self._p_cache:
            with np.errstate(divide="ignore"):
                inv_deg = np.where(self.degrees > 0, 1.0 / self.degrees, 0.0)
            data = np.repeat(inv_deg, self.degrees)
            p = sp.csr_matrix(
                (data, self.targets.astype(np.int64), self.offsets.astype(np.int64)),
                shape=(self.n, self.n),
            )
            self._p_cache.append(p)
        return self._p_cache[0]


def transition_row(g: Graph, v: int) -> dict[int, float]:
    """One row of P = D^-1 A: probability 1/deg(v) at each out-neighbor.

    Returns an empty mapping for out-degree-0 nodes.
    """
    if not 0 <= v < g.n:
        raise ValueError(f"node {v} out of range [0, {g.n})")
    deg = int(g.degrees[v])
    if deg == 0:
        return {}
    p = 1.0 / deg
    return {int(t): p for t in g.out_neighbors(v)}


def load_edgelist(stream: Iterable[str], undirected: bool = True) -> tuple[Graph, np.ndarray]:
    """Parse whitespace-separated node-id pairs into a Graph.

    Lines starting with '#' are comments. Duplicate edges are collapsed;
    self-loops are kept as single arcs. Returns the graph together with
    the original ids array (index = internal id).

    Raises EdgeListParseError on malformed tokens and ValueError on
    empty input.
    """
    id_of: dict[int, int] = {}
    original: list[int] = []

    def intern(raw: int) -> int:
        node = id_of.get(raw)
        if node is None:
            node = len(original)
            id_of[raw] = node
            original.append(raw)
        return node

    arcs: set[tuple[int, int]] = set()
    m = 0
    for lineno, line in enumerate(stream, start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 2:
            raise EdgeListParseError(f"expected two node ids, got {len(parts)} tokens", lineno)
        try:
            raw_u, raw_v = int(parts[0]), int(parts[1])
        except ValueError:
            raise EdgeListParseError(f"non-integer node id in {parts!r}", lineno) from None
        if raw_u < 0 or raw_v < 0:
            raise EdgeListParseError("node ids must be non-negative", lineno)
        u, v = intern(raw_u), intern(raw_v)
        if (u, v) in arcs:
            continue
        arcs.add((u, v))
        m += 1
        if undirected and u != v:
            arcs.add((v, u))

    if not arcs:
        raise ValueError("empty edge list")

    n = len(original)
    arc_array = np.array(sorted(arcs), dtype=np.int64)
    degrees = np.bincount(arc_array[:, 0], minlength=n).astype(np.int64)
    offsets = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(degrees, out=offsets[1:])
    graph = Graph(n=n, m=m, offsets=offsets, targets=arc_array[:, 1].copy(), degrees=degrees)
    return graph, np.array(original, dtype=np.int64)


def write_edgelist(g: Graph, original_ids: np.ndarray, stream: IO[str], undirected: bool = True) -> None:
    """Serialize arcs back to edge-list text using original ids.

    Reloading the output reproduces the graph and id mapping exactly. To
    keep the loader's first-seen numbering stable, a preamble of arcs
    introduces nodes in internal order; the remaining arcs follow in
    canonical order and the loader collapses the duplicates.
    """
    incoming: dict[int, list[int]] = {}
    if not undirected:
        for u in range(g.n):
            for v in g.out_neighbors(u):
                incoming.setdefault(int(v), []).append(u)

    seen = np.zeros(g.n, dtype=bool)
    for j in range(g.n):
        if seen[j]:
            continue
        neighbors = set(int(t) for t in g.out_neighbors(j))
        if not undirected:
            neighbors.update(incoming.get(j, ()))
        smaller = [i for i in neighbors if i < j]
        if smaller:
            i = min(smaller)
            if i in set(int(t) for t in g.out_neighbors(j)):
                stream.write(f"{original_ids[j]} {original_ids[i]}\n")
            else:
                stream.write(f"{original_ids[i]} {original_ids[j]}\n")
        elif j in neighbors:
            stream.write(f"{original_ids[j]} {original_ids[j]}\n")
        else:
            # First-seen numbering implies the co-introduced partner is
            # j + 1 and the arc j -> j + 1 is stored.
            stream.write(f"{original_ids[j]} {original_ids[j + 1]}\n")
            seen[j + 1] = True
        seen[j] = True

    for u in range(g.n):
        for v in g.out_neighbors(u):
            if undirected and v < u:
                continue
            stream.write(f"{original_ids[u]} {original_ids[v]}\n")


def write_id_map(original_ids: np.ndarray, stream: IO[str]) -> None:
    """Sidecar mapping, one "original_id internal_id" line per node."""
    for internal, raw in enumerate(original_ids):
        stream.write(f"{raw} {internal}\n")


def read_id_map(stream: Iterable[str]) -> np.ndarray:
    pairs = []
    for line in stream:
        line = line.strip()
        if not line:
            continue
        raw, internal = line.split()
        pairs.append((int(internal), int(raw)))
    pairs.sort()
    return np.array([raw for _, raw in pairs], dtype=np.int64)
