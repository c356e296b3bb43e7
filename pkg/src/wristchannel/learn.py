"""From-scratch classifiers, clustering and evaluation.

Multinomial logistic regression (full-batch descent with a backtracking
line search), a random forest of Gini decision trees, and Lloyd's K-means
with restarts.  Everything is deterministic given seeds, and fitted models
are immutable; no external ML dependency.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from ._rng import generator
from .errors import (DegenerateLabels, EmptyDataset, NoCoverage,
                     ShapeMismatch, TooFewPoints)
from .features import Standardizer, fit_standardizer

MODEL_SCHEMA_VERSION = 1


@dataclass(frozen=True)
class Dataset:
    """Feature matrix with one label per row."""

    X: np.ndarray
    y: tuple

    def __post_init__(self):
        X = np.asarray(self.X, dtype=np.float64)
        if X.ndim != 2 or X.shape[0] == 0:
            raise EmptyDataset(f"need a non-empty 2-d matrix, got shape {X.shape}")
        if not np.all(np.isfinite(X)):
            raise ValueError("feature matrix must be finite")
        if len(self.y) != X.shape[0]:
            raise ValueError("one label per row required")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", tuple(self.y))

    @property
    def labels(self) -> tuple:
        return tuple(sorted(set(self.y)))

    def encoded(self, labels) -> np.ndarray:
        index = {lab: i for i, lab in enumerate(labels)}
        return np.asarray([index[v] for v in self.y], dtype=np.int64)


def _check_trainable(ds: Dataset) -> tuple:
    labels = ds.labels
    if len(labels) < 2:
        raise DegenerateLabels(f"need at least two classes, got {labels}")
    return labels


def _softmax(scores: np.ndarray) -> np.ndarray:
    shifted = scores - scores.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


# --- logistic regression ---------------------------------------------------

@dataclass(frozen=True)
class LogRegModel:
    """Multinomial logistic regression over standardized features."""

    weights: np.ndarray  # (n_classes, d)
    bias: np.ndarray  # (n_classes,)
    labels: tuple
    standardizer: Standardizer
    n_iters: int = 0
    final_grad_norm: float = 0.0

    def decision(self, X: np.ndarray) -> np.ndarray:
        Xs = self.standardizer.transform(X)
        return Xs @ self.weights.T + self.bias

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        return _softmax(self.decision(np.atleast_2d(X)))


def logreg_loss_grad(W, b, X, Y, l2_lambda):
    """Mean cross-entropy + L2 (weights only); returns (loss, dW, db)."""
    n = X.shape[0]
    probs = _softmax(X @ W.T + b)
    eps = 1e-300
    loss = -np.sum(Y * np.log(probs + eps)) / n + 0.5 * l2_lambda * np.sum(W * W)
    delta = (probs - Y) / n
    dW = delta.T @ X + l2_lambda * W
    db = delta.sum(axis=0)
    return loss, dW, db


def train_logreg(train: Dataset, l2_lambda: float = 1e-3, max_iters: int = 1000,
                 tol: float = 1e-6) -> LogRegModel:
    """Deterministic full-batch training.

    Gradient descent with a backtracking (Armijo) line search, so the loss
    is non-increasing across accepted iterations; stops when the gradient
    norm drops to ``tol`` or after ``max_iters`` accepted steps.
    """
    labels = _check_trainable(train)
    std = fit_standardizer(train.X)
    X = std.transform(train.X)
    yi = train.encoded(labels)
    n, d = X.shape
    k = len(labels)
    Y = np.zeros((n, k))
    Y[np.arange(n), yi] = 1.0
    W = np.zeros((k, d))
    b = np.zeros(k)
    step = 1.0
    loss, dW, db = logreg_loss_grad(W, b, X, Y, l2_lambda)
    grad_norm = math.sqrt(float(np.sum(dW * dW) + np.sum(db * db)))
    iters = 0
    while iters < max_iters and grad_norm > tol:
        accepted = False
        for _ in range(60):
            W2 = W - step * dW
            b2 = b - step * db
            loss2, dW2, db2 = logreg_loss_grad(W2, b2, X, Y, l2_lambda)
            if loss2 <= loss - 1e-4 * step * grad_norm ** 2:
                accepted = True
                break
            step *= 0.5
        if not accepted:
            break
        W, b, loss, dW, db = W2, b2, loss2, dW2, db2
        grad_norm = math.sqrt(float(np.sum(dW * dW) + np.sum(db * db)))
        step *= 1.25
        iters += 1
    return LogRegModel(weights=W, bias=b, labels=labels, standardizer=std,
                       n_iters=iters, final_grad_norm=grad_norm)


# --- random forest -----------------------------------------------------------

@dataclass(frozen=True)
class TreeNode:
    feature: int = -1  # -1 marks a leaf
    threshold: float = 0.0
    left: "TreeNode | None" = None
    right: "TreeNode | None" = None
    counts: np.ndarray | None = None  # class counts at a leaf

    @property
    def is_leaf(self) -> bool:
        return self.feature < 0


def _build_tree(X, yi, n_classes, max_features, min_leaf, rng) -> TreeNode:
    counts = np.bincount(yi, minlength=n_classes).astype(np.int64)
    if np.count_nonzero(counts) <= 1 or X.shape[0] < 2 * min_leaf:
        return TreeNode(counts=counts)
    candidates = rng.permutation(X.shape[1])[:max_features]
    best = (np.inf, -1, 0.0)
    for f in candidates:
        found, thr, score = kernels.best_split_column(
            X[:, f], yi, n_classes, min_leaf)
        if found and score < best[0]:
            best = (score, int(f), thr)
    if best[1] < 0:
        return TreeNode(counts=counts)
    _, f, thr = best
    mask = X[:, f] <= thr
    left = _build_tree(X[mask], yi[mask], n_classes, max_features, min_leaf, rng)
    right = _build_tree(X[~mask], yi[~mask], n_classes, max_features, min_leaf, rng)
    return TreeNode(feature=f, threshold=thr, left=left, right=right)


def _tree_leaf(node: TreeNode, row: np.ndarray) -> TreeNode:
    while not node.is_leaf:
        node = node.left if row[node.feature] <= node.threshold else node.right
    return node


@dataclass(frozen=True)
class ForestModel:
    """Bagged Gini decision trees; predicts by averaging leaf distributions."""

    trees: tuple
    labels: tuple
    seed: int
    n_features: int

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        out = np.zeros((X.shape[0], len(self.labels)))
        for i, row in enumerate(X):
            acc = np.zeros(len(self.labels))
            for tree in self.trees:
                counts = _tree_leaf(tree, row).counts
                acc += counts / counts.sum()
            out[i] = acc / len(self.trees)
        return out


def train_forest(train: Dataset, n_trees: int = 60, max_features: int | None = None,
                 min_leaf: int = 1, seed: int = 0) -> ForestModel:
    """Bootstrap-bagged trees with per-node random feature subsets."""
    labels = _check_trainable(train)
    X = train.X
    yi = train.encoded(labels)
    n, d = X.shape
    if max_features is None:
        max_features = max(1, int(math.isqrt(d)))
    trees = []
    for t in range(n_trees):
        rng = generator(seed, "tree", t)
        idx = rng.integers(0, n, size=n)
        trees.append(_build_tree(X[idx], yi[idx], len(labels),
                                 max_features, min_leaf, rng))
    return ForestModel(trees=tuple(trees), labels=labels, seed=seed, n_features=d)


# --- shared prediction -------------------------------------------------------

def predict(model, fv) -> tuple:
    """(label, per-class probabilities) for one feature vector.

    Ties break to the lowest label index so predictions are stable.
    """
    values = np.asarray(getattr(fv, "values", fv), dtype=np.float64)
    d = model.weights.shape[1] if isinstance(model, LogRegModel) else model.n_features
    if values.shape != (d,):
        raise ShapeMismatch(f"expected {d} features, got shape {values.shape}")
    probs = model.predict_proba(values[None, :])[0]
    return model.labels[int(np.argmax(probs))], probs


def predict_batch(model, X) -> list:
    probs = model.predict_proba(np.asarray(X, dtype=np.float64))
    return [model.labels[int(i)] for i in np.argmax(probs, axis=1)]


# --- k-means -----------------------------------------------------------------

@dataclass(frozen=True)
class KMeansResult:
    centroids: np.ndarray
    assignments: np.ndarray
    inertia: float


def _assign(X, centroids):
    d2 = ((X[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
    return np.argmin(d2, axis=1), d2


def kmeans(points, k: int = 4, restarts: int = 10, seed: int = 0,
           max_iters: int = 300) -> KMeansResult:
    """Lloyd iterations to an assignment fixed point, best of ``restarts``.

    Empty clusters are repaired by re-seeding from the point farthest from
    its assigned centroid.
    """
    X = np.asarray(points, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] == 0:
        raise EmptyDataset("k-means needs a non-empty 2-d matrix")
    n = X.shape[0]
    if n < k:
        raise TooFewPoints(f"need at least {k} points, got {n}")
    best = None
    for restart in range(restarts):
        rng = generator(seed, "kmeans", restart)
        centroids = X[rng.choice(n, size=k, replace=False)].copy()
        assign, d2 = _assign(X, centroids)
        for _ in range(max_iters):
            for c in range(k):
                if not np.any(assign == c):
                    far = int(np.argmax(d2[np.arange(n), assign]))
                    centroids[c] = X[far]
                    assign, d2 = _assign(X, centroids)
            for c in range(k):
                members = assign == c
                if np.any(members):
                    centroids[c] = X[members].mean(axis=0)
            new_assign, d2 = _assign(X, centroids)
            if np.array_equal(new_assign, assign):
                break
            assign = new_assign
        inertia = float(d2[np.arange(n), assign].sum())
        if best is None or inertia < best.inertia:
            best = KMeansResult(centroids=centroids.copy(),
                                assignments=assign.copy(), inertia=inertia)
    return best


def select_symbols(clusters: KMeansResult, candidates, preference=None) -> list:
    """One symbol per cluster, highest-preference candidate first.

    Default preference: the answer-option letters A-D, then the remaining
    candidates alphabetically.
    """
    candidates = list(candidates)
    if len(candidates) != clusters.assignments.size:
        raise ValueError("one candidate per clustered point required")
    if preference is None:
        preference = ["A", "B", "C", "D"] + sorted(
            c for c in candidates if c not in ("A", "B", "C", "D"))
    rank = {s: i for i, s in enumerate(preference)}
    k = clusters.centroids.shape[0]
    chosen = []
    for c in range(k):
        members = [candidates[i] for i in np.flatnonzero(clusters.assignments == c)]
        members = [m for m in members if m in rank]
        if not members:
            raise NoCoverage(f"cluster {c} contains no candidate symbols")
        chosen.append(min(members, key=lambda s: rank[s]))
    return chosen


# --- evaluation --------------------------------------------------------------

@dataclass(frozen=True)
class ConfusionMatrix:
    """Counts[i, j] = samples of true class i predicted as class j."""

    labels: tuple
    counts: np.ndarray

    def row_normalized(self) -> np.ndarray:
        totals = self.counts.sum(axis=1, keepdims=True).astype(np.float64)
        return np.divide(self.counts, totals, out=np.zeros_like(self.counts, dtype=np.float64),
                         where=totals > 0)

    def to_json_dict(self) -> dict:
        return {"labels": list(self.labels),
                "counts": [[int(v) for v in row] for row in self.counts]}


def evaluate(model, test: Dataset) -> tuple:
    """(accuracy, confusion matrix) on a test dataset."""
    if test.X.shape[0] == 0:
        raise EmptyDataset("empty test set")
    preds = predict_batch(model, test.X)
    labels = model.labels
    index = {lab: i for i, lab in enumerate(labels)}
    counts = np.zeros((len(labels), len(labels)), dtype=np.int64)
    correct = 0
    for truth, pred in zip(test.y, preds):
        counts[index[truth], index[pred]] += 1
        correct += truth == pred
    return correct / len(test.y), ConfusionMatrix(labels=labels, counts=counts)


def aggregate_confusions(matrices) -> np.ndarray:
    """Element-wise mean of the row-normalized matrices."""
    matrices = list(matrices)
    if not matrices:
        raise EmptyDataset("nothing to aggregate")
    return np.mean([m.row_normalized() for m in matrices], axis=0)


def evaluation_report_json(accuracy: float, confusion: ConfusionMatrix) -> str:
    """Evaluation report file: accuracy plus raw confusion counts."""
    return json.dumps(
        {"schema_version": MODEL_SCHEMA_VERSION, "accuracy": accuracy,
         "confusion": confusion.to_json_dict()},
        sort_keys=True)


# --- model serialization -----------------------------------------------------

def model_to_json(model) -> str:
    """Versioned JSON for either model kind."""
    if isinstance(model, LogRegModel):
        doc = {
            "schema_version": MODEL_SCHEMA_VERSION,
            "kind": "logreg",
            "labels": list(model.labels),
            "weights": model.weights.tolist(),
            "bias": model.bias.tolist(),
            "standardizer": {"mean": model.standardizer.mean.tolist(),
                             "std": model.standardizer.std.tolist()},
        }
    elif isinstance(model, ForestModel):
        doc = {
            "schema_version": MODEL_SCHEMA_VERSION,
            "kind": "forest",
            "labels": list(model.labels),
            "seed": model.seed,
            "n_features": model.n_features,
            "trees": [_tree_to_dict(t) for t in model.trees],
        }
    else:
        raise TypeError(f"cannot serialize {type(model).__name__}")
    return json.dumps(doc, sort_keys=True)


def _tree_to_dict(node: TreeNode):
    if node.is_leaf:
        return {"counts": [int(v) for v in node.counts]}
    return {"feature": node.feature, "threshold": node.threshold,
            "left": _tree_to_dict(node.left), "right": _tree_to_dict(node.right)}


def _tree_from_dict(doc) -> TreeNode:
    if "counts" in doc:
        return TreeNode(counts=np.asarray(doc["counts"], dtype=np.int64))
    return TreeNode(feature=doc["feature"], threshold=doc["threshold"],
                    left=_tree_from_dict(doc["left"]),
                    right=_tree_from_dict(doc["right"]))


def model_from_json(text: str):
    doc = json.loads(text)
    if doc.get("schema_version") != MODEL_SCHEMA_VERSION:
        raise ValueError(f"unsupported model schema {doc.get('schema_version')!r}")
    labels = tuple(doc["labels"])
    if doc["kind"] == "logreg":
        std = Standardizer(mean=np.asarray(doc["standardizer"]["mean"]),
                           std=np.asarray(doc["standardizer"]["std"]))
        return LogRegModel(weights=np.asarray(doc["weights"]),
                           bias=np.asarray(doc["bias"]),
                           labels=labels, standardizer=std)
    if doc["kind"] == "forest":
        return ForestModel(trees=tuple(_tree_from_dict(t) for t in doc["trees"]),
                           labels=labels, seed=doc["seed"],
                           n_features=doc["n_features"])
    raise ValueError(f"unknown model kind {doc['kind']!r}")
