"""Downstream task harness: node classification and link prediction.

Both tasks train L2-regularized logistic regression on embedding-derived
features. Classification follows the standard multi-label protocol of
the embedding literature: one-vs-rest classifiers, and for every test
node the number of true labels is assumed known, so the t highest-scoring
labels are predicted.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import IO, Iterable, Sequence

import numpy as np
from sklearn.linear_model import LogisticRegression
from sklearn.metrics import f1_score, roc_auc_score

from .graph import Graph
from .sketch import Embedding

logger = logging.getLogger(__name__)

EDGE_OPERATORS = {
    "average": lambda a, b: 0.5 * (a + b),
    "concat": lambda a, b: np.concatenate([a, b], axis=-1),
    "hadamard": lambda a, b: a * b,
    "weighted_l1": lambda a, b: np.abs(a - b),
    "weighted_l2": lambda a, b: (a - b) ** 2,
}


@dataclass(frozen=True)
class LabelSet:
    """Per-node label-id lists; nodes may carry zero labels."""

    labels: list[list[int]]
    label_count: int

    def labeled_nodes(self) -> np.ndarray:
        return np.array([i for i, ls in enumerate(self.labels) if ls], dtype=np.int64)


@dataclass(frozen=True)
class EvalSplit:
    """Disjoint train/test node sets drawn from the labeled nodes."""

    train_nodes: np.ndarray
    test_nodes: np.ndarray
    train_fraction: float
    seed: int


def load_labels(stream: Iterable[str]) -> dict[int, set[int]]:
    """Parse "node_id label_id" lines (repeated node ids = multi-label)."""
    raw: dict[int, set[int]] = {}
    for lineno, line in enumerate(stream, start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ValueError(f"label file line {lineno}: expected 'node_id label_id'")
        node, label = int(parts[0]), int(parts[1])
        raw.setdefault(node, set()).add(label)
    return raw


def align_labels(raw: dict[int, set[int]], original_ids: np.ndarray) -> LabelSet:
    """Join raw labels onto internal node order; label ids compacted to [0, L)."""
    all_labels = sorted({l for ls in raw.values() for l in ls})
    remap = {l: i for i, l in enumerate(all_labels)}
    labels = [sorted(remap[l] for l in raw.get(int(orig), ())) for orig in original_ids]
    return LabelSet(labels=labels, label_count=len(all_labels))


def make_split(labels: LabelSet, train_fraction: float, seed: int) -> EvalSplit:
    """Random split of the labeled nodes; unlabeled nodes are excluded."""
    if not 0.0 < train_fraction < 1.0:
        raise ValueError("train_fraction must be in (0, 1)")
    nodes = labels.labeled_nodes()
    rng = np.random.default_rng([seed, 0xEA1])
    nodes = rng.permutation(nodes)
    cut = int(round(train_fraction * len(nodes)))
    train, test = nodes[:cut], nodes[cut:]
    if len(train) == 0 or len(test) == 0:
        raise ValueError("split leaves an empty train or test set")
    return EvalSplit(train_nodes=train, test_nodes=test, train_fraction=train_fraction, seed=seed)


def _node_features(embedding: Embedding | np.ndarray) -> np.ndarray:
    values = getattr(embedding, "values", embedding)
    return np.asarray(values, dtype=float).T


def classify(
    embedding: Embedding | np.ndarray,
    labels: LabelSet,
    split: EvalSplit,
    c: float = 1.0,
    tol: float = 1e-8,
    max_iter: int = 2000,
) -> tuple[float, float]:
    """One-vs-rest logistic regression; returns (micro_f1, macro_f1).

    Labels absent from the training split are scored always-negative and
    reported through the module logger.
    """
    x = _node_features(embedding)
    x_train, x_test = x[split.train_nodes], x[split.test_nodes]
    n_labels = labels.label_count
    y_train = np.zeros((len(split.train_nodes), n_labels), dtype=bool)
    for i, node in enumerate(split.train_nodes):
        y_train[i, labels.labels[node]] = True

    scores = np.full((len(split.test_nodes), n_labels), -np.inf)
    missing = []
    for label in range(n_labels):
        y = y_train[:, label]
        if not y.any():
            missing.append(label)
            continue
        if y.all():
            scores[:, label] = np.inf
            continue
        model = LogisticRegression(C=c, tol=tol, max_iter=max_iter, solver="lbfgs")
        model.fit(x_train, y)
        scores[:, label] = model.decision_function(x_test)
    if missing:
        logger.warning(
            "%d label(s) absent from the training split scored always-negative: %s",
            len(missing), missing,
        )

    y_true = np.zeros((len(split.test_nodes), n_labels), dtype=bool)
    y_pred = np.zeros_like(y_true)
    for i, node in enumerate(split.test_nodes):
        true = labels.labels[node]
        y_true[i, true] = True
        top = np.argsort(-scores[i], kind="stable")[: len(true)]
        y_pred[i, top] = True

    micro = f1_score(y_true, y_pred, average="micro", zero_division=0)
    macro = f1_score(y_true, y_pred, average="macro", zero_division=0)
    return float(micro), float(macro)


def repeat_classify(
    embedding: Embedding | np.ndarray,
    labels: LabelSet,
    train_fraction: float,
    seeds: Sequence[int],
    c: float = 1.0,
) -> tuple[float, float, float, float]:
    """Mean and standard deviation of micro/macro F1 over split seeds."""
    micros, macros = [], []
    for seed in seeds:
        split = make_split(labels, train_fraction, seed)
        micro, macro = classify(embedding, labels, split, c=c)
        micros.append(micro)
        macros.append(macro)
    return (
        float(np.mean(micros)),
        float(np.std(micros)),
        float(np.mean(macros)),
        float(np.std(macros)),
    )


def edge_features(a: np.ndarray, b: np.ndarray, op: str) -> np.ndarray:
    """Combine two endpoint vectors into one edge feature vector."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"endpoint shapes differ: {a.shape} vs {b.shape}")
    if op not in EDGE_OPERATORS:
        raise ValueError(f"unknown edge operator {op!r}")
    return EDGE_OPERATORS[op](a, b)


def _edge_matrix(features: np.ndarray, edges: np.ndarray, op: str) -> np.ndarray:
    edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    return edge_features(features[edges[:, 0]], features[edges[:, 1]], op)


def _fit_link_model(
    x_train: np.ndarray,
    y_train: np.ndarray,
    x_test: np.ndarray,
    y_test: np.ndarray,
    c: float,
) -> tuple[float, float]:
    model = LogisticRegression(C=c, tol=1e-8, max_iter=2000, solver="lbfgs")
    model.fit(x_train, y_train)
    accuracy = float(np.mean(model.predict(x_test) == y_test))
    auc = float(roc_auc_score(y_test, model.decision_function(x_test)))
    return accuracy, auc


def link_predict(
    embedding: Embedding | np.ndarray,
    pos_edges: np.ndarray,
    neg_edges: np.ndarray,
    op: str,
    split_fraction: float = 0.5,
    seed: int = 0,
    c: float = 1.0,
) -> tuple[float, float]:
    """Train/test link classification; returns (accuracy, roc_auc).

    Positives and negatives are shuffled and split separately at
    split_fraction so both halves stay balanced.
    """
    pos_edges = np.asarray(pos_edges, dtype=np.int64).reshape(-1, 2)
    neg_edges = np.asarray(neg_edges, dtype=np.int64).reshape(-1, 2)
    if len(pos_edges) == 0 or len(neg_edges) == 0:
        raise ValueError("empty edge sets")
    rng = np.random.default_rng([seed, 0x11E])
    pos = rng.permutation(pos_edges)
    neg = rng.permutation(neg_edges)
    cut_pos = int(round(split_fraction * len(pos)))
    cut_neg = int(round(split_fraction * len(neg)))
    if min(cut_pos, cut_neg) == 0 or cut_pos == len(pos) or cut_neg == len(neg):
        raise ValueError("split leaves an empty train or test side")
    return link_predict_presplit(
        embedding, pos[:cut_pos], neg[:cut_neg], pos[cut_pos:], neg[cut_neg:], op, c=c
    )


def link_predict_presplit(
    embedding: Embedding | np.ndarray,
    train_pos: np.ndarray,
    train_neg: np.ndarray,
    test_pos: np.ndarray,
    test_neg: np.ndarray,
    op: str,
    c: float = 1.0,
) -> tuple[float, float]:
    """Link classification with externally provided edge splits."""
    features = _node_features(embedding)
    sets = [np.asarray(e, dtype=np.int64).reshape(-1, 2) for e in (train_pos, train_neg, test_pos, test_neg)]
    if any(len(e) == 0 for e in sets):
        raise ValueError("empty edge sets")
    train_pos, train_neg, test_pos, test_neg = sets
    x_train = np.vstack([_edge_matrix(features, train_pos, op), _edge_matrix(features, train_neg, op)])
    y_train = np.concatenate([np.ones(len(train_pos)), np.zeros(len(train_neg))])
    x_test = np.vstack([_edge_matrix(features, test_pos, op), _edge_matrix(features, test_neg, op)])
    y_test = np.concatenate([np.ones(len(test_pos)), np.zeros(len(test_neg))])
    return _fit_link_model(x_train, y_train, x_test, y_test, c)


def sample_non_edges(
    g: Graph,
    count: int,
    seed: int,
    exclude: Iterable[tuple[int, int]] = (),
) -> np.ndarray:
    """Uniform sample of node pairs that are not arcs of g (no self-pairs)."""
    if count <= 0:
        raise ValueError("count must be positive")
    forbidden = {(int(u), int(v)) for u, v in exclude}
    rng = np.random.default_rng([seed, 0x0FF])
    found: list[tuple[int, int]] = []
    seen: set[tuple[int, int]] = set()
    max_rounds = 1000
    for _ in range(max_rounds):
        need = count - len(found)
        if need == 0:
            break
        candidates = rng.integers(0, g.n, size=(4 * need + 8, 2))
        for u, v in candidates:
            u, v = int(u), int(v)
            if u == v or (u, v) in seen or (u, v) in forbidden:
                continue
            row = g.out_neighbors(u)
            pos = np.searchsorted(row, v)
            if pos < len(row) and row[pos] == v:
                continue
            seen.add((u, v))
            found.append((u, v))
            if len(found) == count:
                break
    if len(found) < count:
        raise ValueError("could not sample enough non-edges (graph too dense?)")
    return np.array(found, dtype=np.int64)


def parse_edge_pairs(stream: Iterable[str]) -> list[tuple[int, int]]:
    """Read "u v" lines (original node ids)."""
    pairs = []
    for lineno, line in enumerate(stream, start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ValueError(f"edge file line {lineno}: expected 'u v'")
        pairs.append((int(parts[0]), int(parts[1])))
    return pairs


def write_edge_pairs(pairs: Iterable[tuple[int, int]], stream: IO[str]) -> None:
    for u, v in pairs:
        stream.write(f"{u} {v}\n")
