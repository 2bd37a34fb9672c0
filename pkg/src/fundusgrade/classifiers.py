"""From-scratch classifiers over scaled feature vectors: a CART random
forest, Gaussian naive Bayes, and a cascade of linear SVMs trained with
the Pegasos subgradient schedule.

Everything is a deterministic function of (data, hyperparameters, seed);
per-tree and per-stage RNG streams depend only on the seed and the tree or
stage index, so parallel and serial training would produce identical
models. All ties break toward the lowest class index.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .rng import Pcg32, derive_seed, pcg32_stream

N_CLASSES = 5


class Label(enum.IntEnum):
    HEALTHY = 0
    MILD = 1
    MODERATE = 2
    SEVERE = 3
    PDR = 4


LABEL_NAMES = ("Healthy", "Mild NPDR", "Moderate NPDR", "Severe NPDR", "PDR")


def _check_labels(y: np.ndarray) -> None:
    if y.size and (y.min() < 0 or y.max() >= N_CLASSES):
        raise ValueError(f"labels must lie in 0..{N_CLASSES - 1}")


def _as_matrix(X) -> np.ndarray:
    x = np.asarray(X, dtype=np.float64)
    if x.ndim != 2:
        raise ValueError("expected a 2-D feature matrix")
    return x


# ---------------------------------------------------------------------------
# Random forest


@dataclass(frozen=True, eq=False)
class TreeNode:
    """Internal node (feature/threshold/children) or leaf (class_counts)."""

    feature: int = -1
    threshold: float = 0.0
    left: "TreeNode | None" = None
    right: "TreeNode | None" = None
    class_counts: np.ndarray | None = None

    @property
    def is_leaf(self) -> bool:
        return self.class_counts is not None


@dataclass(frozen=True)
class RandomForestParams:
    n_trees: int = 100
    max_depth: int = 16
    m_features: int | None = None  # None: ceil(sqrt(n_features))


@dataclass(frozen=True, eq=False)
class RandomForestModel:
    trees: tuple[TreeNode, ...]
    n_features: int
    params: RandomForestParams
    seed: int


def _sample_features(rng: Pcg32, n_features: int, m: int) -> list[int]:
    """m distinct feature indices via partial Fisher-Yates."""
    pool = list(range(n_features))
    for i in range(m):
        j = i + rng.below(n_features - i)
        pool[i], pool[j] = pool[j], pool[i]
    return pool[:m]


def _best_split(X: np.ndarray, y: np.ndarray, features: list[int]):
    """Best (feature, threshold) by Gini; candidate thresholds are midpoints
    of consecutive sorted unique values. First strict improvement wins, so
    ties resolve to the earliest sampled feature and lowest threshold."""
    n = len(y)
    onehot = (y[:, None] == np.arange(N_CLASSES)[None, :]).astype(np.float64)
    best = None
    best_score = -np.inf  # maximizing sum(c^2)/n_side minimizes weighted Gini
    for f in features:
        values = X[:, f]
        order = np.argsort(values, kind="stable")
        sv = values[order]
        boundaries = np.nonzero(sv[1:] > sv[:-1])[0]
        if boundaries.size == 0:
            continue
        prefix = np.cumsum(onehot[order], axis=0)
        left = prefix[boundaries]
        right = prefix[-1] - left
        n_left = boundaries + 1.0
        n_right = n - n_left
        score = (left**2).sum(axis=1) / n_left + (right**2).sum(axis=1) / n_right
        j = int(np.argmax(score))
        if score[j] > best_score:
            best_score = score[j]
            best = (f, (sv[boundaries[j]] + sv[boundaries[j] + 1]) / 2.0)
    return best


def grow_tree(
    X: np.ndarray,
    y: np.ndarray,
    rng: Pcg32,
    *,
    max_depth: int,
    m_features: int,
    depth: int = 0,
) -> TreeNode:
    counts = np.bincount(y, minlength=N_CLASSES)
    if depth >= max_depth or len(y) < 2 or int(counts.max()) == len(y):
        return TreeNode(class_counts=counts)
    split = _best_split(X, y, _sample_features(rng, X.shape[1], m_features))
    if split is None:  # all sampled features constant on this node
        return TreeNode(class_counts=counts)
    feature, thr = split
    go_left = X[:, feature] <= thr
    left = grow_tree(X[go_left], y[go_left], rng, max_depth=max_depth, m_features=m_features, depth=depth + 1)
    right = grow_tree(X[~go_left], y[~go_left], rng, max_depth=max_depth, m_features=m_features, depth=depth + 1)
    return TreeNode(feature=feature, threshold=thr, left=left, right=right)


def rf_train(X, y, params: RandomForestParams = RandomForestParams(), seed: int = 0) -> RandomForestModel:
    X = _as_matrix(X)
    y = np.asarray(y, dtype=np.int64)
    if X.shape[0] == 0 or X.shape[0] != y.shape[0]:
        raise ValueError("training data must be non-empty with matching labels")
    _check_labels(y)
    n, d = X.shape
    m = params.m_features if params.m_features is not None else math.ceil(math.sqrt(d))
    m = min(m, d)
    trees = []
    for t in range(params.n_trees):
        rng = pcg32_stream(seed, t)
        idx = np.fromiter((rng.below(n) for _ in range(n)), dtype=np.int64, count=n)
        trees.append(grow_tree(X[idx], y[idx], rng, max_depth=params.max_depth, m_features=m))
    return RandomForestModel(tuple(trees), d, params, seed)


def tree_predict(node: TreeNode, x: np.ndarray) -> int:
    while not node.is_leaf:
        node = node.left if x[node.feature] <= node.threshold else node.right
    return int(np.argmax(node.class_counts))  # leaf tie -> lowest class


def rf_predict(model: RandomForestModel, x) -> int:
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (model.n_features,):
        raise ValueError(f"expected a feature vector of dimension {model.n_features}")
    votes = np.zeros(N_CLASSES, dtype=np.int64)
    for tree in model.trees:
        votes[tree_predict(tree, x)] += 1
    return int(np.argmax(votes))  # vote tie -> lowest class


# ---------------------------------------------------------------------------
# Gaussian naive Bayes


@dataclass(frozen=True, eq=False)
class GaussianNBModel:
    priors: np.ndarray  # (5,)
    means: np.ndarray  # (5, d)
    variances: np.ndarray  # (5, d), floored at var_floor
    var_floor: float


def nb_train(X, y) -> GaussianNBModel:
    X = _as_matrix(X)
    y = np.asarray(y, dtype=np.int64)
    if X.shape[0] != y.shape[0]:
        raise ValueError("training data must have matching labels")
    _check_labels(y)
    counts = np.bincount(y, minlength=N_CLASSES)
    if int(counts.min()) < 1:
        raise ValueError("every class must appear at least once in training data")
    d = X.shape[1]
    means = np.empty((N_CLASSES, d))
    variances = np.empty((N_CLASSES, d))
    for c in range(N_CLASSES):
        rows = X[y == c]
        means[c] = rows.mean(axis=0)
        variances[c] = rows.var(axis=0)
    max_var = float(X.var(axis=0).max())
    var_floor = 1e-9 * (max_var if max_var > 0.0 else 1.0)
    return GaussianNBModel(
        priors=counts / counts.sum(),
        means=means,
        variances=np.maximum(variances, var_floor),
        var_floor=var_floor,
    )


def nb_predict(model: GaussianNBModel, x) -> int:
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (model.means.shape[1],):
        raise ValueError(f"expected a feature vector of dimension {model.means.shape[1]}")
    with np.errstate(divide="ignore"):
        log_prior = np.log(model.priors)
    log_lik = -0.5 * (
        np.log(2.0 * np.pi * model.variances) + (x - model.means) ** 2 / model.variances
    ).sum(axis=1)
    return int(np.argmax(log_prior + log_lik))  # tie -> lowest class


# ---------------------------------------------------------------------------
# Linear SVM cascade


@dataclass(frozen=True, eq=False)
class LinearSvm:
    w: np.ndarray
    b: float

    def decision(self, x: np.ndarray) -> float:
        return float(self.w @ x + self.b)


def svm_train_binary(X, y, lam: float = 1e-4, epochs: int = 200, seed: int = 0) -> LinearSvm:
    """Primal hinge-loss minimization with the Pegasos step schedule.

    The bias rides along as an augmented constant feature, so it is
    regularized with the rest of the weight vector.
    """
    X = _as_matrix(X)
    y = np.asarray(y, dtype=np.float64)
    if set(np.unique(y)) != {-1.0, 1.0}:
        raise ValueError("binary SVM training needs both labels -1 and +1")
    if lam <= 0.0 or epochs < 1:
        raise ValueError("lambda must be positive and epochs at least 1")
    n = X.shape[0]
    Xa = np.hstack([X, np.ones((n, 1))])
    w = np.zeros(Xa.shape[1])
    rng = pcg32_stream(seed, 0)
    order = list(range(n))
    t = 0
    for _ in range(epochs):
        rng.shuffle(order)
        for i in order:
            t += 1
            eta = 1.0 / (lam * t)
            margin = y[i] * (w @ Xa[i])
            w *= 1.0 - eta * lam
            if margin < 1.0:
                w += (eta * y[i]) * Xa[i]
    return LinearSvm(w[:-1].copy(), float(w[-1]))


def svm_objective(X, y, model: LinearSvm, lam: float) -> float:
    """Regularized mean hinge loss (augmented-bias formulation)."""
    X = _as_matrix(X)
    y = np.asarray(y, dtype=np.float64)
    margins = y * (X @ model.w + model.b)
    hinge = np.maximum(0.0, 1.0 - margins).mean()
    return 0.5 * lam * (float(model.w @ model.w) + model.b**2) + float(hinge)


@dataclass(frozen=True)
class SvmCascadeParams:
    lam: float = 1e-4
    epochs: int = 200


@dataclass(frozen=True, eq=False)
class SvmCascadeModel:
    healthy_vs_dr: LinearSvm
    npdr_vs_pdr: LinearSvm
    grade_ovr: tuple[LinearSvm, LinearSvm, LinearSvm]  # one-vs-rest for classes 1..3
    params: SvmCascadeParams = field(default_factory=SvmCascadeParams)
    seed: int = 0


def svm_cascade_train(X, y, params: SvmCascadeParams = SvmCascadeParams(), seed: int = 0) -> SvmCascadeModel:
    X = _as_matrix(X)
    y = np.asarray(y, dtype=np.int64)
    _check_labels(y)
    if len(set(y.tolist())) != N_CLASSES:
        raise ValueError("cascade training needs all five classes present")

    stage1 = svm_train_binary(X, np.where(y == 0, -1.0, 1.0), params.lam, params.epochs, derive_seed(seed, 0))

    dr = y > 0
    stage2 = svm_train_binary(
        X[dr], np.where(y[dr] == 4, 1.0, -1.0), params.lam, params.epochs, derive_seed(seed, 1)
    )

    npdr = (y >= 1) & (y <= 3)
    ovr = tuple(
        svm_train_binary(
            X[npdr],
            np.where(y[npdr] == c, 1.0, -1.0),
            params.lam,
            params.epochs,
            derive_seed(seed, 1 + c),
        )
        for c in (1, 2, 3)
    )
    return SvmCascadeModel(stage1, stage2, ovr, params, seed)


def svm_cascade_predict(model: SvmCascadeModel, x) -> int:
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (model.healthy_vs_dr.w.shape[0],):
        raise ValueError("feature dimension does not match the cascade model")
    if model.healthy_vs_dr.decision(x) <= 0.0:  # tie breaks toward Healthy
        return int(Label.HEALTHY)
    if model.npdr_vs_pdr.decision(x) > 0.0:
        return int(Label.PDR)
    margins = [svm.decision(x) for svm in model.grade_ovr]
    return 1 + int(np.argmax(margins))  # tie -> lowest grade
