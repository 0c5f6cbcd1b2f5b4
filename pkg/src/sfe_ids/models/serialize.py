"""Versioned JSON model files.

Layout::

    {"format": "sfe-ids-model", "schema_version": 1, "kind": "rf",
     "class_names": [...], "n_features": d, "params": {...}, "trees": [...]}

Each tree is stored column-wise (feature / threshold / left / right / value).
Thresholds are float32 values written as the shortest decimal that round-trips
through float64, so they reload bit-exactly.  Keys are sorted and separators
compact, so equal models give equal bytes.
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from ..errors import DataError
from . import ForestModel, GbtModel, Model, SingleTree, model_kind
from .tree import Tree, TreeParams

FORMAT = "sfe-ids-model"
SCHEMA_VERSION = 1


def dumps(obj: dict) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=False)


def _tree_params_from(d: dict) -> TreeParams:
    return TreeParams(**d)


def model_to_dict(model: Model, class_names: list[str]) -> dict:
    kind = model_kind(model)
    out = {"format": FORMAT, "schema_version": SCHEMA_VERSION, "kind": kind,
           "class_names": list(class_names), "n_classes": model.n_classes,
           "n_features": model.n_features}
    if isinstance(model, SingleTree):
        out["params"] = model.params.to_dict()
        out["trees"] = [model.tree.to_dict()]
    elif isinstance(model, ForestModel):
        out["params"] = model.params.to_dict()
        out["bootstrap"] = model.bootstrap
        out["seed"] = model.seed
        out["trees"] = [t.to_dict() for t in model.trees]
    else:
        out["params"] = {"learning_rate": model.learning_rate, "gamma": model.gamma,
                         "lam": model.lam, "max_depth": model.max_depth}
        out["objective"] = model.objective
        out["base_score"] = [float(b) for b in model.base_score]
        out["train_loss_trace"] = [float(v) for v in model.train_loss_trace]
        out["tree_groups"] = [[t.to_dict(counts=False) for t in group]
                              for group in model.tree_groups]
    return out


def model_from_dict(data: dict) -> tuple[Model, list[str]]:
    if data.get("format") != FORMAT:
        raise DataError(f"not a model file (format {data.get('format')!r})")
    if data.get("schema_version") != SCHEMA_VERSION:
        raise DataError(f"unsupported model schema version {data.get('schema_version')!r}")
    kind = data["kind"]
    C, d = int(data["n_classes"]), int(data["n_features"])
    if kind == "dt":
        model = SingleTree(Tree.from_dict(data["trees"][0]),
                           _tree_params_from(data["params"]), C, d)
    elif kind in ("rf", "et"):
        model = ForestModel([Tree.from_dict(t) for t in data["trees"]],
                            "random_forest" if kind == "rf" else "extra_trees",
                            _tree_params_from(data["params"]), bool(data["bootstrap"]),
                            int(data["seed"]), C, d)
    elif kind == "gbt":
        p = data["params"]
        model = GbtModel([[Tree.from_dict(t) for t in g] for g in data["tree_groups"]],
                         p["learning_rate"], p["gamma"], p["lam"], p["max_depth"],
                         np.asarray(data["base_score"], dtype=np.float64), data["objective"],
                         C, d, list(data["train_loss_trace"]))
    else:
        raise DataError(f"unknown model kind {kind!r}")
    return model, list(data["class_names"])


def save_model(model: Model, class_names: list[str], path) -> None:
    Path(path).write_text(dumps(model_to_dict(model, class_names)) + "\n", encoding="utf-8")


def load_model(path) -> tuple[Model, list[str]]:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise DataError(f"cannot read model file {path}: {exc}") from exc
    return model_from_dict(data)
