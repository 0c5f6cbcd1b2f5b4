"""Newton-boosted regression trees with the regularized objective
``loss + gamma * leaves + lambda/2 * ||w||^2``.

Binary problems use the logistic loss and one tree per round; multiclass
problems use softmax cross-entropy and one tree per class per round.  Leaf
weights are ``-G / (H + lambda)`` and a split is kept only when its
structure-score gain, less ``gamma``, is positive.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import ConfigError, DataError
from ._backend import get_kernels
from .tree import Tree, _Builder, _check_xy, as_float32, apply

_EPS = 1e-15


def leaf_weight(G: float, H: float, lam: float) -> float:
    return -G / (H + lam)


def split_gain(GL: float, HL: float, GR: float, HR: float, lam: float, gamma: float) -> float:
    G, H = GL + GR, HL + HR
    return 0.5 * (GL * GL / (HL + lam) + GR * GR / (HR + lam) - G * G / (H + lam)) - gamma


def sigmoid(z):
    z = np.asarray(z, dtype=np.float64)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def softmax(F: np.ndarray) -> np.ndarray:
    e = np.exp(F - F.max(axis=1, keepdims=True))
    return e / e.sum(axis=1, keepdims=True)


@dataclass
class GbtModel:
    tree_groups: list[list[Tree]]  # [round][class group]
    learning_rate: float
    gamma: float
    lam: float
    max_depth: int
    base_score: np.ndarray  # one entry per class group
    objective: str  # binary_logistic | softmax
    n_classes: int
    n_features: int
    train_loss_trace: list[float] = field(default_factory=list)

    @property
    def n_rounds(self) -> int:
        return len(self.tree_groups)


def _grow_regression(X32, g, h, lam, gamma, max_depth, min_leaf, kern) -> Tree:
    d = X32.shape[1]
    features = np.arange(d, dtype=np.intp)
    b = _Builder(1)
    stack = [(b.add(), np.arange(X32.shape[0], dtype=np.intp), 0)]
    while stack:
        node, idx, depth = stack.pop()
        G = float(np.cumsum(g[idx])[-1])
        H = float(np.cumsum(h[idx])[-1])
        b.value[node] = np.array([leaf_weight(G, H, lam)])
        if depth >= max_depth or len(idx) < 2 * min_leaf:
            continue
        f, t, score = kern.best_split_reg(X32, g, h, idx, features, lam, min_leaf, G, H)
        if f < 0:
            continue
        gain = 0.5 * (score - G * G / (H + lam)) - gamma
        if not gain > 0.0:
            continue
        t32 = np.float32(t)
        mask = X32[idx, f] <= t32
        left, right = b.add(), b.add()
        b.feature[node] = int(f)
        b.threshold[node] = float(t32)
        b.left[node], b.right[node] = left, right
        b.gain[node] = gain
        stack.append((right, idx[~mask], depth + 1))
        stack.append((left, idx[mask], depth + 1))
    return b.finish()


def _logloss(y: np.ndarray, F: np.ndarray, objective: str) -> float:
    if objective == "binary_logistic":
        # log(1 + e^-F) for positives, log(1 + e^F) for negatives
        return float(np.mean(np.logaddexp(0.0, np.where(y == 1, -F, F))))
    top = F.max(axis=1)
    lse = top + np.log(np.exp(F - top[:, None]).sum(axis=1))
    return float(np.mean(lse - F[np.arange(len(y)), y]))


def gbt_fit(X, y, n_rounds: int = 100, learning_rate: float = 0.3, gamma: float = 0.0,
            lam: float = 1.0, max_depth: int = 6, seed: int = 0, n_classes: int | None = None,
            min_samples_leaf: int = 1, backend: str | None = None) -> GbtModel:
    """Fit a boosted ensemble.  ``seed`` is recorded; the fit itself draws no randomness."""
    if not 0 < learning_rate <= 1:
        raise ConfigError("learning_rate must lie in (0, 1]")
    if gamma < 0 or lam < 0:
        raise ConfigError("gamma and lambda must be non-negative")
    if n_rounds < 0:
        raise ConfigError("n_rounds must be >= 0")
    X32, y = _check_xy(X, y)
    n = len(y)
    C = n_classes or int(y.max()) + 1
    if n < 2 or len(np.unique(y)) < 2:
        raise DataError("boosting needs at least two rows and two classes")
    kern = get_kernels(backend)
    if C == 2:
        objective = "binary_logistic"
        p = float(np.clip(np.mean(y == 1), _EPS, 1 - _EPS))
        base = np.array([np.log(p / (1 - p))])
        F = np.full(n, base[0])
    else:
        objective = "softmax"
        prior = np.clip(np.bincount(y, minlength=C) / n, _EPS, None)
        base = np.log(prior)
        F = np.tile(base, (n, 1))
    groups: list[list[Tree]] = []
    trace: list[float] = []
    for _ in range(n_rounds):
        if objective == "binary_logistic":
            p = sigmoid(F)
            g = p - (y == 1)
            hess = np.maximum(p * (1 - p), _EPS)
            tree = _grow_regression(X32, g, hess, lam, gamma, max_depth, min_samples_leaf, kern)
            F = F + learning_rate * tree.value[apply(tree, X32, backend), 0]
            groups.append([tree])
        else:
            P = softmax(F)
            round_trees = []
            update = np.zeros_like(F)
            for c in range(C):
                g = P[:, c] - (y == c)
                hess = np.maximum(P[:, c] * (1 - P[:, c]), _EPS)
                tree = _grow_regression(X32, g, hess, lam, gamma, max_depth,
                                        min_samples_leaf, kern)
                update[:, c] = tree.value[apply(tree, X32, backend), 0]
                round_trees.append(tree)
            F = F + learning_rate * update
            groups.append(round_trees)
        trace.append(_logloss(y, F, objective))
    return GbtModel(groups, float(learning_rate), float(gamma), float(lam), int(max_depth),
                    base, objective, C, X32.shape[1], trace)


def gbt_margins(m: GbtModel, X) -> np.ndarray:
    X32 = as_float32(X)
    if X32.shape[1] != m.n_features:
        raise DataError(f"expected {m.n_features} features, got {X32.shape[1]}")
    F = np.tile(m.base_score, (X32.shape[0], 1))
    for group in m.tree_groups:
        for c, tree in enumerate(group):
            F[:, c] += m.learning_rate * tree.value[apply(tree, X32), 0]
    return F


def gbt_predict_proba(m: GbtModel, X) -> np.ndarray:
    F = gbt_margins(m, X)
    if m.objective == "binary_logistic":
        p = sigmoid(F[:, 0])
        return np.column_stack([1.0 - p, p])
    return softmax(F)


def gbt_predict(m: GbtModel, X) -> np.ndarray:
    return np.argmax(gbt_predict_proba(m, X), axis=1)
