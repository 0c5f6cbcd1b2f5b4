"""Tree classifiers with a uniform fit / predict surface.

``fit_model("dt" | "rf" | "et" | "gbt", X, y, ...)`` returns one of
:class:`SingleTree`, :class:`~.forest.ForestModel` or :class:`~.gbt.GbtModel`;
:func:`predict_proba` and :func:`predict` dispatch on the type.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError, DataError
from ._backend import BACKEND, available, get_kernels
from .forest import ForestModel, et_fit, forest_predict_proba, majority_vote, rf_fit
from .gbt import GbtModel, gbt_fit, gbt_predict_proba, leaf_weight
from .impurity import entropy, gini, info_gain
from .tree import Tree, TreeParams, dt_fit, tree_predict, tree_predict_proba

MODEL_KINDS = ("dt", "rf", "et", "gbt")

# Hyperparameters accepted per model kind, with defaults.
DEFAULTS = {
    "dt": {"criterion": "gini", "max_depth": None, "min_samples_split": 2,
           "min_samples_leaf": 1, "max_features": "all"},
    "rf": {"n_trees": 100, "criterion": "gini", "max_depth": None, "min_samples_split": 2,
           "min_samples_leaf": 1, "max_features": "sqrt"},
    "et": {"n_trees": 100, "criterion": "gini", "max_depth": None, "min_samples_split": 2,
           "min_samples_leaf": 1, "max_features": "sqrt"},
    "gbt": {"n_rounds": 100, "learning_rate": 0.3, "gamma": 0.0, "lam": 1.0, "max_depth": 6,
            "min_samples_leaf": 1},
}


@dataclass
class SingleTree:
    tree: Tree
    params: TreeParams
    n_classes: int
    n_features: int


Model = SingleTree | ForestModel | GbtModel


def resolve_params(kind: str, overrides: dict | None = None) -> dict:
    if kind not in DEFAULTS:
        raise ConfigError(f"unknown model {kind!r}; choose from {MODEL_KINDS}")
    params = dict(DEFAULTS[kind])
    for key, value in (overrides or {}).items():
        if key not in params:
            raise ConfigError(f"model {kind!r} has no hyperparameter {key!r}")
        params[key] = value
    return params


def _tree_params(p: dict, seed: int) -> TreeParams:
    return TreeParams(criterion=p["criterion"], max_depth=p["max_depth"],
                      min_samples_split=p["min_samples_split"],
                      min_samples_leaf=p["min_samples_leaf"],
                      max_features=p["max_features"], seed=seed)


def fit_model(kind: str, X, y, n_classes: int, params: dict | None = None, seed: int = 0,
              threads: int = 1, backend: str | None = None) -> Model:
    p = resolve_params(kind, params)
    if kind == "dt":
        tp = _tree_params(p, seed)
        tree = dt_fit(X, y, tp, n_classes=n_classes, backend=backend)
        return SingleTree(tree, tp, n_classes, np.asarray(X).shape[1])
    if kind in ("rf", "et"):
        fit = rf_fit if kind == "rf" else et_fit
        return fit(X, y, n_trees=p["n_trees"], params=_tree_params(p, seed), seed=seed,
                   n_classes=n_classes, threads=threads, backend=backend)
    return gbt_fit(X, y, n_rounds=p["n_rounds"], learning_rate=p["learning_rate"],
                   gamma=p["gamma"], lam=p["lam"], max_depth=p["max_depth"], seed=seed,
                   n_classes=n_classes, min_samples_leaf=p["min_samples_leaf"], backend=backend)


def predict_proba(model: Model, X) -> np.ndarray:
    if isinstance(model, SingleTree):
        return tree_predict_proba(model.tree, X, model.n_features)
    if isinstance(model, ForestModel):
        return forest_predict_proba(model, X)
    if isinstance(model, GbtModel):
        return gbt_predict_proba(model, X)
    raise DataError(f"not a model: {type(model).__name__}")


def predict(model: Model, X) -> np.ndarray:
    return np.argmax(predict_proba(model, X), axis=1)


def model_kind(model: Model) -> str:
    if isinstance(model, SingleTree):
        return "dt"
    if isinstance(model, ForestModel):
        return "rf" if model.kind == "random_forest" else "et"
    return "gbt"


__all__ = [
    "BACKEND", "DEFAULTS", "MODEL_KINDS", "ForestModel", "GbtModel", "SingleTree", "Tree",
    "TreeParams", "available", "dt_fit", "entropy", "et_fit", "fit_model", "gbt_fit",
    "get_kernels", "gini", "info_gain", "leaf_weight", "majority_vote", "model_kind",
    "predict", "predict_proba", "resolve_params", "rf_fit", "tree_predict",
    "tree_predict_proba",
]
