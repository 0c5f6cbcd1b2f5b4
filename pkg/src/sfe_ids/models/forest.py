"""Random forests (bootstrap + best split) and extra trees (full sample + random cuts)."""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .. import _rng
from ..errors import ConfigError, DataError
from .tree import Tree, TreeParams, _check_xy, as_float32, apply, grow_classifier

KINDS = ("random_forest", "extra_trees")


@dataclass
class ForestModel:
    trees: list[Tree]
    kind: str
    params: TreeParams
    bootstrap: bool
    seed: int
    n_classes: int
    n_features: int
    extra: dict = field(default_factory=dict)

    @property
    def n_trees(self) -> int:
        return len(self.trees)


def _fit_forest(X, y, n_trees, params, seed, bootstrap, kind, n_classes, threads, backend):
    if n_trees < 1:
        raise ConfigError("n_trees must be >= 1")
    X32, y = _check_xy(X, y)
    n = len(y)
    C = n_classes or int(y.max()) + 1

    def build(i: int) -> Tree:
        rng = _rng.stream(seed, _rng.FOREST, i)
        if bootstrap:
            idx = np.sort(rng.integers(0, n, size=n)).astype(np.intp)
        else:
            idx = np.arange(n, dtype=np.intp)
        return grow_classifier(X32, y, C, params, idx, rng, backend)

    if threads and threads > 1 and n_trees > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            trees = list(pool.map(build, range(n_trees)))
    else:
        trees = [build(i) for i in range(n_trees)]
    return ForestModel(trees, kind, params, bootstrap, int(seed), C, X32.shape[1])


def rf_fit(X, y, n_trees: int = 100, params: TreeParams | None = None, seed: int = 0,
           n_classes: int | None = None, threads: int = 1, bootstrap: bool = True,
           backend: str | None = None) -> ForestModel:
    """Random forest: each tree sees an n-row bootstrap and searches best splits.

    ``bootstrap=False`` exists for testing only; a forest of one unbootstrapped
    tree with ``max_features="all"`` equals :func:`dt_fit`.
    """
    params = replace(params or TreeParams(max_features="sqrt"), splitter="best")
    return _fit_forest(X, y, n_trees, params, seed, bootstrap, "random_forest",
                       n_classes, threads, backend)


def et_fit(X, y, n_trees: int = 100, params: TreeParams | None = None, seed: int = 0,
           n_classes: int | None = None, threads: int = 1,
           backend: str | None = None) -> ForestModel:
    """Extremely randomized trees: every tree uses all rows and random cut-points."""
    params = replace(params or TreeParams(max_features="sqrt"), splitter="random")
    return _fit_forest(X, y, n_trees, params, seed, False, "extra_trees",
                       n_classes, threads, backend)


def forest_predict_proba(m: ForestModel, X) -> np.ndarray:
    """Mean of the per-tree leaf class frequencies."""
    X32 = as_float32(X)
    if X32.shape[1] != m.n_features:
        raise DataError(f"expected {m.n_features} features, got {X32.shape[1]}")
    total = np.zeros((X32.shape[0], m.n_classes))
    for tree in m.trees:
        counts = tree.value[apply(tree, X32)]
        total += counts / counts.sum(axis=1, keepdims=True)
    return total / len(m.trees)


def forest_predict(m: ForestModel, X) -> np.ndarray:
    return np.argmax(forest_predict_proba(m, X), axis=1)


def majority_vote(votes, n_classes: int | None = None) -> int:
    """Most frequent class among hard votes; ties go to the lowest code."""
    votes = np.asarray(votes, dtype=np.int64)
    return int(np.argmax(np.bincount(votes, minlength=n_classes or 0)))
