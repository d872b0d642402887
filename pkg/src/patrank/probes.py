"""Frozen-embedding probes: one-vs-rest logistic regression, cosine kNN,
and k-means clustering scored by V-measure / ARI / NMI.

The linear probe minimizes 0.5 * ||w||^2 + C * sum_i log(1 + exp(-y_i z_i))
per class (bias unpenalized) with deterministic full-batch L-BFGS, declaring
convergence when the gradient max-norm drops below ``tol``. C is selected on
the validation split by macro-F1, ties resolved toward the smaller C.

Clustering ground truth is single-label: for multi-label documents the first
listed label is the primary one (LabelMatrix.primary).
"""

from __future__ import annotations

from math import comb, log
from typing import Mapping, Optional, Sequence

import numpy as np
from scipy.optimize import minimize
from scipy.special import expit
from sklearn.base import BaseEstimator

from .errors import (
    ConfigError,
    DataError,
    DegenerateClassError,
    EmptyInputError,
    ShapeError,
)


class LabelMatrix:
    """Binary doc x class assignment with ordered docs and classes."""

    def __init__(self, docs: Sequence[str], classes: Sequence[str], assignment: np.ndarray, primary: Optional[Sequence[str]] = None):
        self.docs = tuple(docs)
        self.classes = tuple(classes)
        self.assignment = np.asarray(assignment, dtype=bool)
        if self.assignment.shape != (len(self.docs), len(self.classes)):
            raise ShapeError(f"assignment shape {self.assignment.shape} != ({len(self.docs)}, {len(self.classes)})")
        rowsums = self.assignment.sum(axis=1)
        if (rowsums == 0).any():
            bad = self.docs[int(np.flatnonzero(rowsums == 0)[0])]
            raise DataError(f"document {bad!r} has no positive class")
        self._primary = tuple(primary) if primary is not None else tuple(
            self.classes[int(np.flatnonzero(row)[0])] for row in self.assignment
        )

    @classmethod
    def from_labels(cls, labels: Mapping[str, Sequence[str]], classes: Optional[Sequence[str]] = None) -> "LabelMatrix":
        """Build from doc -> ordered label list; the first label per doc is primary."""
        docs = list(labels)
        if classes is None:
            classes = sorted({l for ls in labels.values() for l in ls})
        class_idx = {c: i for i, c in enumerate(classes)}
        assignment = np.zeros((len(docs), len(classes)), dtype=bool)
        primary: list[str] = []
        for r, doc in enumerate(docs):
            ls = list(labels[doc])
            if not ls:
                raise DataError(f"document {doc!r} has no labels")
            primary.append(ls[0])
            for l in ls:
                if l not in class_idx:
                    raise DataError(f"document {doc!r}: label {l!r} not in class list")
                assignment[r, class_idx[l]] = True
        return cls(docs, classes, assignment, primary=primary)

    @property
    def primary(self) -> tuple[str, ...]:
        """First-listed label per doc (clustering ground truth)."""
        return self._primary

    def subset(self, docs: Sequence[str]) -> "LabelMatrix":
        idx = {d: i for i, d in enumerate(self.docs)}
        rows = [idx[d] for d in docs]
        return LabelMatrix(docs, self.classes, self.assignment[rows], primary=[self._primary[i] for i in rows])

    def __len__(self) -> int:
        return len(self.docs)


# ---------------------------------------------------------------------------
# linear probe


def _fit_logistic_binary(X: np.ndarray, y: np.ndarray, C: float, tol: float, max_iter: int):
    """Full-batch L2-regularized logistic regression for one class.

    Returns (weights, bias, info) where info records iterations, the achieved
    gradient max-norm, the convergence flag, and the per-iteration loss curve.
    """
    n, d = X.shape
    ypm = np.where(y, 1.0, -1.0)

    def objective(params):
        w, b = params[:d], params[d]
        z = ypm * (X @ w + b)
        loss = 0.5 * float(w @ w) + C * float(np.logaddexp(0.0, -z).sum())
        coef = -C * ypm * expit(-z)
        grad = np.empty(d + 1)
        grad[:d] = w + X.T @ coef
        grad[d] = coef.sum()
        return loss, grad

    losses: list[float] = []

    def record(params):
        losses.append(objective(params)[0])

    x0 = np.zeros(d + 1)
    losses.append(objective(x0)[0])
    result = minimize(
        objective,
        x0,
        jac=True,
        method="L-BFGS-B",
        callback=record,
        options={"maxiter": max_iter, "gtol": tol, "ftol": 1e-18, "maxls": 50},
    )
    _, grad = objective(result.x)
    grad_norm = float(np.abs(grad).max())
    info = {
        "iterations": int(result.nit),
        "grad_max_norm": grad_norm,
        "converged": grad_norm < tol,
        "losses": losses,
    }
    return result.x[:d], float(result.x[d]), info


def macro_f1(y_true: np.ndarray, y_pred: np.ndarray) -> float:
    """Unweighted mean of per-class F1; a class with no true and no predicted
    positives contributes 0."""
    y_true = np.asarray(y_true, dtype=bool)
    y_pred = np.asarray(y_pred, dtype=bool)
    if y_true.shape != y_pred.shape:
        raise ShapeError(f"shape mismatch {y_true.shape} vs {y_pred.shape}")
    scores = []
    for c in range(y_true.shape[1]):
        tp = int((y_true[:, c] & y_pred[:, c]).sum())
        fp = int((~y_true[:, c] & y_pred[:, c]).sum())
        fn = int((y_true[:, c] & ~y_pred[:, c]).sum())
        denom = 2 * tp + fp + fn
        scores.append(2 * tp / denom if denom else 0.0)
    return float(np.mean(scores))


DEFAULT_C_GRID = (0.01, 0.1, 1.0, 10.0, 100.0)


class LinearProbe(BaseEstimator):
    """One-vs-rest logistic regression probe with validation-tuned C."""

    def __init__(self, C_grid: Sequence[float] = DEFAULT_C_GRID, tol: float = 1e-6, max_iter: int = 1000, seed: int = 42):
        self.C_grid = C_grid
        self.tol = tol
        self.max_iter = max_iter
        self.seed = seed

    def fit(self, X_train, Y_train: LabelMatrix | np.ndarray, X_val=None, Y_val: LabelMatrix | np.ndarray | None = None) -> "LinearProbe":
        X = np.asarray(X_train, dtype=np.float64)
        Y = Y_train.assignment if isinstance(Y_train, LabelMatrix) else np.asarray(Y_train, dtype=bool)
        classes = Y_train.classes if isinstance(Y_train, LabelMatrix) else tuple(str(i) for i in range(Y.shape[1]))
        if X.shape[0] != Y.shape[0]:
            raise ShapeError(f"{X.shape[0]} rows vs {Y.shape[0]} label rows")
        if Y.shape[1] < 2:
            raise ConfigError("probe needs at least 2 classes")
        if not self.C_grid:
            raise ConfigError("empty C grid")
        for c, name in enumerate(classes):
            if not Y[:, c].any():
                raise DegenerateClassError(f"class {name!r} has no positive training examples")

        grid = sorted(float(c) for c in self.C_grid)
        fits: dict[float, tuple[np.ndarray, np.ndarray, list[dict]]] = {}
        for C in grid:
            W = np.zeros((Y.shape[1], X.shape[1]))
            bias = np.zeros(Y.shape[1])
            infos = []
            for c in range(Y.shape[1]):
                W[c], bias[c], info = _fit_logistic_binary(X, Y[:, c], C, self.tol, self.max_iter)
                infos.append(info)
            fits[C] = (W, bias, infos)

        if X_val is not None and Y_val is not None:
            Xv = np.asarray(X_val, dtype=np.float64)
            Yv = Y_val.assignment if isinstance(Y_val, LabelMatrix) else np.asarray(Y_val, dtype=bool)
            best_C, best_f1 = None, -1.0
            val_scores = {}
            for C in grid:
                W, bias, _ = fits[C]
                pred = expit(Xv @ W.T + bias) > 0.5
                f1 = macro_f1(Yv, pred)
                val_scores[C] = f1
                if f1 > best_f1:
                    best_C, best_f1 = C, f1
            self.val_scores_ = val_scores
        else:
            best_C = grid[0]
            self.val_scores_ = {}

        W, bias, infos = fits[best_C]
        self.C_ = best_C
        self.classes_ = classes
        self.coef_ = W
        self.intercept_ = bias
        self.n_iter_ = tuple(i["iterations"] for i in infos)
        self.converged_ = tuple(i["converged"] for i in infos)
        self.grad_max_norm_ = tuple(i["grad_max_norm"] for i in infos)
        self.loss_curves_ = tuple(tuple(i["losses"]) for i in infos)
        return self

    def predict_proba(self, X) -> np.ndarray:
        return expit(np.asarray(X, dtype=np.float64) @ self.coef_.T + self.intercept_)

    def predict(self, X) -> np.ndarray:
        return self.predict_proba(X) > 0.5


def train_linear_probe(X_train, Y_train, X_val, Y_val, C_grid: Sequence[float] = DEFAULT_C_GRID, seed: int = 42) -> LinearProbe:
    return LinearProbe(C_grid=C_grid, seed=seed).fit(X_train, Y_train, X_val, Y_val)


def eval_probe(model: LinearProbe, X_test, Y_test: LabelMatrix | np.ndarray) -> float:
    Y = Y_test.assignment if isinstance(Y_test, LabelMatrix) else np.asarray(Y_test, dtype=bool)
    return macro_f1(Y, model.predict(X_test))


# ---------------------------------------------------------------------------
# kNN


class KnnClassifier(BaseEstimator):
    """Multi-label kNN by cosine distance: a label is predicted when present
    in strictly more than k/2 neighbors; when no label clears that bar the
    single most frequent neighbor label wins (ties lexicographic)."""

    def __init__(self, k: int = 5):
        self.k = k

    def fit(self, X_train, Y_train: LabelMatrix) -> "KnnClassifier":
        X = np.asarray(X_train, dtype=np.float64)
        if X.shape[0] == 0:
            raise EmptyInputError("empty training set")
        if self.k < 1 or self.k > X.shape[0]:
            raise ConfigError(f"k must be in [1, {X.shape[0]}], got {self.k}")
        if len(Y_train) != X.shape[0]:
            raise ShapeError(f"{X.shape[0]} rows vs {len(Y_train)} label rows")
        norms = np.linalg.norm(X, axis=1)
        self.X_ = X / np.where(norms == 0.0, 1.0, norms)[:, None]
        self.Y_ = Y_train
        # Neighbor ties break by ascending training doc_id.
        self._id_rank_ = np.argsort(np.argsort(np.array(Y_train.docs)))
        return self

    def predict(self, X_test, test_ids: Optional[Sequence[str]] = None) -> LabelMatrix:
        X = np.asarray(X_test, dtype=np.float64)
        norms = np.linalg.norm(X, axis=1)
        Xn = X / np.where(norms == 0.0, 1.0, norms)[:, None]
        sims = Xn @ self.X_.T
        classes = self.Y_.classes
        n_test = X.shape[0]
        assignment = np.zeros((n_test, len(classes)), dtype=bool)
        primary: list[str] = []
        for i in range(n_test):
            dists = 1.0 - sims[i]
            order = np.lexsort((self._id_rank_, dists))[: self.k]
            votes = self.Y_.assignment[order].sum(axis=0)
            winners = votes > self.k / 2.0
            if not winners.any():
                top = votes.max()
                # ties lexicographic: classes sorted by name among max-vote labels
                best = min((classes[c] for c in np.flatnonzero(votes == top)))
                winners = np.array([c == best for c in classes])
            assignment[i] = winners
            primary.append(classes[int(np.flatnonzero(winners)[0])])
        docs = tuple(test_ids) if test_ids is not None else tuple(f"q{i}" for i in range(n_test))
        return LabelMatrix(docs, classes, assignment, primary=primary)


def knn_classify(X_train, Y_train: LabelMatrix, X_test, k: int, test_ids: Optional[Sequence[str]] = None) -> LabelMatrix:
    return KnnClassifier(k=k).fit(X_train, Y_train).predict(X_test, test_ids=test_ids)


# ---------------------------------------------------------------------------
# k-means


def _kmeanspp_init(X: np.ndarray, K: int, rng: np.random.Generator) -> np.ndarray:
    n = X.shape[0]
    centers = np.empty((K, X.shape[1]))
    centers[0] = X[int(rng.integers(n))]
    d2 = ((X - centers[0]) ** 2).sum(axis=1)
    for j in range(1, K):
        total = d2.sum()
        if total > 0:
            idx = int(rng.choice(n, p=d2 / total))
        else:
            idx = int(rng.integers(n))
        centers[j] = X[idx]
        d2 = np.minimum(d2, ((X - centers[j]) ** 2).sum(axis=1))
    return centers


def _assign(X: np.ndarray, centers: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    d2 = ((X[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
    labels = d2.argmin(axis=1)
    return labels, d2[np.arange(X.shape[0]), labels]


def _lloyd(X: np.ndarray, centers: np.ndarray, max_iter: int, tol: float) -> tuple[np.ndarray, float, int]:
    K = centers.shape[0]
    iterations = 0
    for iterations in range(1, max_iter + 1):
        labels, mindist = _assign(X, centers)
        new_centers = centers.copy()
        empty: list[int] = []
        for j in range(K):
            members = labels == j
            if members.any():
                new_centers[j] = X[members].mean(axis=0)
            else:
                empty.append(j)
        if empty:
            # relocate each empty centroid to the current farthest point
            order = np.argsort(-mindist, kind="stable")
            for idx, j in zip(order, empty):
                new_centers[j] = X[idx]
        shift = float(np.sqrt(((new_centers - centers) ** 2).sum(axis=1)).max())
        centers = new_centers
        if shift < tol:
            break
    labels, mindist = _assign(X, centers)
    return labels, float(mindist.sum()), iterations


def kmeans(X, K: int, seed: int = 42, n_restarts: int = 10, max_iter: int = 300, tol: float = 1e-6) -> np.ndarray:
    """k-means++ seeded Lloyd iterations, best of n_restarts by inertia."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise ShapeError(f"X must be 2-D, got shape {X.shape}")
    if not 1 <= K <= X.shape[0]:
        raise ConfigError(f"K must be in [1, {X.shape[0]}], got {K}")
    rng = np.random.default_rng(seed)
    best_labels, best_inertia = None, np.inf
    for _ in range(n_restarts):
        centers = _kmeanspp_init(X, K, rng)
        labels, inertia, _ = _lloyd(X, centers, max_iter, tol)
        if inertia < best_inertia:
            best_labels, best_inertia = labels, inertia
    return best_labels


# ---------------------------------------------------------------------------
# clustering agreement


def _contingency(assignment: np.ndarray, truth: np.ndarray) -> np.ndarray:
    _, a_idx = np.unique(assignment, return_inverse=True)
    _, t_idx = np.unique(truth, return_inverse=True)
    table = np.zeros((t_idx.max() + 1, a_idx.max() + 1), dtype=np.int64)
    np.add.at(table, (t_idx, a_idx), 1)
    return table


def clustering_scores(assignment: Sequence, truth_labels: Sequence) -> dict[str, float]:
    """V-measure, ARI and NMI from the contingency table.

    Degenerate convention: a single cluster against a single class scores 1.0
    on all three; entropies use natural log (V and NMI are base-invariant).
    """
    a = np.asarray(assignment)
    t = np.asarray(truth_labels)
    if a.shape != t.shape or a.ndim != 1:
        raise ShapeError(f"assignment shape {a.shape} vs truth shape {t.shape}")
    n = a.shape[0]
    if n == 0:
        raise EmptyInputError("empty clustering")
    table = _contingency(a, t)
    class_sizes = table.sum(axis=1)
    cluster_sizes = table.sum(axis=0)
    pc = class_sizes / n
    pk = cluster_sizes / n
    h_classes = -float(np.sum(pc[pc > 0] * np.log(pc[pc > 0])))
    h_clusters = -float(np.sum(pk[pk > 0] * np.log(pk[pk > 0])))
    mi = 0.0
    for i, j in zip(*np.nonzero(table)):
        nij = table[i, j]
        mi += (nij / n) * log(n * nij / (class_sizes[i] * cluster_sizes[j]))
    mi = max(mi, 0.0)

    homogeneity = 1.0 - (h_classes - mi) / h_classes if h_classes > 0 else 1.0
    completeness = 1.0 - (h_clusters - mi) / h_clusters if h_clusters > 0 else 1.0
    hc = homogeneity + completeness
    v_measure = 2.0 * homogeneity * completeness / hc if hc > 0 else 0.0

    index = float(sum(comb(int(x), 2) for x in table.flat))
    sum_classes = float(sum(comb(int(x), 2) for x in class_sizes))
    sum_clusters = float(sum(comb(int(x), 2) for x in cluster_sizes))
    pairs = comb(n, 2)
    if pairs == 0:
        ari = 1.0
    else:
        expected = sum_classes * sum_clusters / pairs
        max_index = 0.5 * (sum_classes + sum_clusters)
        ari = 1.0 if max_index == expected else (index - expected) / (max_index - expected)

    normalizer = 0.5 * (h_classes + h_clusters)
    nmi = 1.0 if normalizer == 0 else min(1.0, mi / normalizer)

    return {
        "v_measure": v_measure,
        "ari": ari,
        "nmi": nmi,
        "homogeneity": homogeneity,
        "completeness": completeness,
    }
