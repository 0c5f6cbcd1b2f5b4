"""Folds, metrics and cross-validation reports."""
from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import _rng
from .errors import ConfigError, DataError
from .models import fit_model, predict_proba
from .pipeline import PipelineConfig, fit_transforms
from .transform import LabelMap

AVERAGES = ("macro", "weighted", "micro")


# -- folds -------------------------------------------------------------------

@dataclass
class FoldPlan:
    k: int
    assignments: np.ndarray  # fold index per row
    stratified: bool
    seed: int

    def test_indices(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.assignments == fold)

    def train_indices(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.assignments != fold)

    def sizes(self) -> np.ndarray:
        return np.bincount(self.assignments, minlength=self.k)


def make_folds(y, k: int = 10, stratified: bool = True, seed: int = 0) -> FoldPlan:
    """Shuffled fold assignment.

    Stratified plans shuffle each class separately and deal its rows round-robin,
    continuing from where the previous class stopped, so both per-class and
    overall fold sizes differ by at most one.
    """
    y = np.asarray(y)
    n = len(y)
    if k < 2:
        raise ConfigError("k must be >= 2")
    if k > n:
        raise DataError(f"cannot make {k} folds from {n} rows")
    out = np.empty(n, dtype=np.int64)
    if not stratified:
        perm = _rng.stream(seed, _rng.FOLDS, 0).permutation(n)
        out[perm] = np.arange(n) % k
        return FoldPlan(k, out, False, int(seed))
    offset = 0
    for c in np.unique(y):
        members = np.flatnonzero(y == c)
        members = members[_rng.stream(seed, _rng.FOLDS, 1, int(c)).permutation(len(members))]
        out[members] = (offset + np.arange(len(members))) % k
        offset = (offset + len(members)) % k
    return FoldPlan(k, out, True, int(seed))


# -- metrics -----------------------------------------------------------------

def confusion_matrix(y_true, y_pred, n_classes: int) -> np.ndarray:
    """Rows are actual classes, columns predicted."""
    t = np.asarray(y_true, dtype=np.int64)
    p = np.asarray(y_pred, dtype=np.int64)
    if t.shape != p.shape:
        raise DataError("y_true and y_pred differ in length")
    for name, v in (("y_true", t), ("y_pred", p)):
        if v.size and (v.min() < 0 or v.max() >= n_classes):
            raise DataError(f"{name} has a code outside [0, {n_classes - 1}]")
    return np.bincount(t * n_classes + p, minlength=n_classes * n_classes).reshape(
        n_classes, n_classes)


def accuracy(cm) -> float:
    cm = np.asarray(cm)
    total = cm.sum()
    if total <= 0:
        raise DataError("empty confusion matrix")
    return float(np.trace(cm) / total)


def per_class_prf(cm) -> dict:
    """One-vs-rest precision, recall and F1 per class; zero denominators give 0."""
    cm = np.asarray(cm, dtype=np.float64)
    tp = np.diag(cm)
    predicted = cm.sum(axis=0)
    support = cm.sum(axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        precision = np.where(predicted > 0, tp / predicted, 0.0)
        recall = np.where(support > 0, tp / support, 0.0)
        denom = precision + recall
        f1 = np.where(denom > 0, 2 * precision * recall / denom, 0.0)
    return {"precision": precision, "recall": recall, "f1": f1,
            "support": support.astype(np.int64), "predicted": predicted.astype(np.int64),
            "zero_precision": predicted == 0, "zero_recall": support == 0}


def precision_recall_f1(cm, averaging: str = "macro") -> tuple[float, float, float]:
    """Averaged precision/recall/F1.  Macro averages over classes that occur in
    either the actual or the predicted labels."""
    cm = np.asarray(cm)
    if cm.sum() <= 0:
        raise DataError("empty confusion matrix")
    if averaging not in AVERAGES:
        raise ConfigError(f"averaging must be one of {AVERAGES}")
    m = per_class_prf(cm)
    if averaging == "micro":
        tp = float(np.trace(cm))
        p = tp / m["predicted"].sum()
        r = tp / m["support"].sum()
        return p, r, (2 * p * r / (p + r) if p + r > 0 else 0.0)
    if averaging == "macro":
        used = (m["support"] > 0) | (m["predicted"] > 0)
        return tuple(float(m[key][used].mean()) for key in ("precision", "recall", "f1"))
    w = m["support"] / m["support"].sum()
    return tuple(float((m[key] * w).sum()) for key in ("precision", "recall", "f1"))


def _roc_counts(y_true, scores):
    y = np.asarray(y_true).astype(bool)
    s = np.asarray(scores, dtype=np.float64)
    if y.shape != s.shape:
        raise DataError("labels and scores differ in length")
    if not np.isfinite(s).all():
        raise DataError("scores must be finite")
    P = int(y.sum())
    N = len(y) - P
    if P == 0 or N == 0:
        raise DataError("ROC needs both classes present")
    order = np.argsort(-s, kind="stable")
    s_sorted = s[order]
    y_sorted = y[order]
    tps = np.cumsum(y_sorted)
    fps = np.cumsum(~y_sorted)
    # one point per distinct score: the last row of each tie group
    last = np.r_[np.flatnonzero(s_sorted[1:] != s_sorted[:-1]), len(s) - 1]
    tp = np.r_[0, tps[last]].astype(np.int64)
    fp = np.r_[0, fps[last]].astype(np.int64)
    return tp, fp, P, N, s_sorted[last]


def roc_curve(y_true, scores) -> list[tuple[float, float]]:
    """(fpr, tpr) points, thresholds descending, from (0, 0) to (1, 1)."""
    tp, fp, P, N, _ = _roc_counts(y_true, scores)
    return [(f / N, t / P) for f, t in zip(fp.tolist(), tp.tolist())]


def auc(y_true, scores) -> float:
    """Trapezoid area under the ROC curve.

    Accumulated as the integer ``sum dFP * (TP_prev + TP)`` over ``2 P N`` and
    divided once, so the result is the correctly rounded exact area.
    """
    tp, fp, P, N, _ = _roc_counts(y_true, scores)
    twice_area = sum(int(dfp) * int(a + b) for dfp, a, b in zip(np.diff(fp), tp[:-1], tp[1:]))
    return float(Fraction(twice_area, 2 * P * N))


def multiclass_auc(y_true, proba, n_classes: int | None = None) -> dict:
    """One-vs-rest AUC per class present in ``y_true`` plus their macro mean."""
    y = np.asarray(y_true, dtype=np.int64)
    proba = np.asarray(proba, dtype=np.float64)
    C = n_classes or proba.shape[1]
    present = np.unique(y)
    if len(present) < 2:
        raise DataError("AUC needs at least two classes present")
    per_class: dict[int, float | None] = {}
    for c in range(C):
        per_class[c] = auc(y == c, proba[:, c]) if c in present else None
    defined = [v for v in per_class.values() if v is not None]
    return {"per_class": per_class, "macro": float(np.mean(defined))}


def metric_block(cm) -> dict:
    out = {"accuracy": accuracy(cm)}
    for avg in AVERAGES:
        p, r, f = precision_recall_f1(cm, avg)
        out[avg] = {"precision": p, "recall": r, "f1": f}
    return out


# -- cross-validation ----------------------------------------------------------

@dataclass
class FoldResult:
    fold: int
    n_train: int
    n_test: int
    confusion: np.ndarray
    metrics: dict
    auc: dict
    appended_in_test: int
    n_appended: int
    fit_ms: float
    predict_ms: float
    test_indices: np.ndarray = field(repr=False, default=None)
    proba: np.ndarray = field(repr=False, default=None)


@dataclass
class EvaluationReport:
    config: dict
    class_names: list[str]
    n_rows: int
    n_rows_evaluated: int
    n_appended: int
    folds: list[FoldResult]
    confusion: np.ndarray
    aggregate: dict
    mean_over_folds: dict
    roc: dict
    auc: dict
    per_class: dict
    warnings: list[str]
    reduction_ratio: float | None
    audit: dict
    timings: dict

    @property
    def accuracy(self) -> float:
        return self.aggregate["accuracy"]

    def macro_f1(self) -> float:
        return self.aggregate["macro"]["f1"]

    def recall_of(self, class_name: str) -> float:
        return self.per_class["recall"][self.class_names.index(class_name)]

    def to_dict(self, include_timings: bool = False) -> dict:
        out = {
            "format": "sfe-ids-report", "schema_version": 1,
            "metadata": {"config": self.config, "leakage_mode": self.config["leakage"],
                         "seed": self.config["seed"], "reduction_ratio": self.reduction_ratio,
                         "class_names": self.class_names, "n_rows": self.n_rows,
                         "n_rows_evaluated": self.n_rows_evaluated,
                         "n_appended": self.n_appended},
            "folds": [{"fold": f.fold, "n_train": f.n_train, "n_test": f.n_test,
                       "confusion": f.confusion.tolist(), "metrics": f.metrics,
                       "auc": _auc_json(f.auc), "appended_in_test": f.appended_in_test}
                      for f in self.folds],
            "aggregate": {"confusion": self.confusion.tolist(), **self.aggregate,
                          "mean_over_folds": self.mean_over_folds,
                          "per_class": {k: [float(v) for v in vals]
                                        for k, vals in self.per_class.items()},
                          "auc": _auc_json(self.auc)},
            "roc": self.roc,
            "audit": self.audit,
            "warnings": self.warnings,
        }
        if include_timings:
            out["timings_ms"] = self.timings
        return out


def _auc_json(a: dict | None):
    if a is None:
        return None
    return {"macro": a["macro"],
            "per_class": {str(k): v for k, v in a["per_class"].items()}}


def _fold_auc(y_true, proba, n_classes):
    present = np.unique(y_true)
    if len(present) < 2:
        return None
    if n_classes == 2:
        a = auc(y_true == 1, proba[:, 1])
        return {"per_class": {1: a}, "macro": a}
    return multiclass_auc(y_true, proba, n_classes)


def _run_fold(fold, train, test, X, y, cfg, label_map, feature_names, is_appended, threads):
    C = label_map.n_classes
    if cfg.leakage == "strict":
        prep = fit_transforms(X[train], y[train], cfg, label_map, feature_names)
        X_train, y_train = prep.X, prep.y
        X_test = prep.chain.apply(X[test])
        # oversampled copies are drawn from training rows only; count any whose source is a test row
        sources = train[prep.plan.source_indices] if prep.plan else np.empty(0, np.int64)
        appended_in_test = int(np.isin(sources, test).sum())
        n_appended = len(sources)
    else:
        X_train, y_train = X[train], y[train]
        X_test = X[test]
        appended_in_test = int(is_appended[test].sum())
        n_appended = 0
    t0 = time.perf_counter()
    model = fit_model(cfg.model, X_train, y_train, C, cfg.model_params, seed=cfg.seed,
                      threads=threads)
    t1 = time.perf_counter()
    proba = predict_proba(model, X_test)
    t2 = time.perf_counter()
    y_test = y[test]
    pred = np.argmax(proba, axis=1)
    cm = confusion_matrix(y_test, pred, C)
    return FoldResult(fold, len(y_train), len(test), cm, metric_block(cm),
                      _fold_auc(y_test, proba, C), appended_in_test, n_appended,
                      (t1 - t0) * 1e3, (t2 - t1) * 1e3, test, proba)


def cross_validate(X, y, cfg: PipelineConfig, label_map: LabelMap,
                   feature_names: list[str], threads: int = 1) -> EvaluationReport:
    """k-fold evaluation of the configured pipeline.

    faithful: standardize, oversample, SFE and PCA run once on all rows; folds
    are then drawn over the transformed, oversampled rows, so copies of a test
    row can sit in the training folds.
    strict: folds are drawn over the original rows and every transform
    (oversampling included) is fit on each fold's training rows only.
    """
    X = np.asarray(X)
    y = np.asarray(y, dtype=np.int64)
    n_rows = len(y)
    C = label_map.n_classes
    t_start = time.perf_counter()
    rr = None
    n_appended = 0
    if cfg.leakage == "faithful":
        prep = fit_transforms(X, y, cfg, label_map, feature_names)
        X_eval, y_eval = prep.X, prep.y
        n_appended = prep.plan.n_appended if prep.plan else 0
        rr = prep.chain.reduction_ratio()
    else:
        X_eval, y_eval = X, y
    is_appended = np.zeros(len(y_eval), dtype=bool)
    is_appended[n_rows:] = True
    plan = make_folds(y_eval, cfg.cv_k, cfg.cv_stratified, cfg.seed)
    t_prep = time.perf_counter()

    jobs = [(f, plan.train_indices(f), plan.test_indices(f)) for f in range(plan.k)]

    def run(job):
        f, train, test = job
        return _run_fold(f, train, test, X_eval, y_eval, cfg, label_map, feature_names,
                         is_appended, 1 if threads > 1 else threads)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            folds = list(pool.map(run, jobs))
    else:
        folds = [run(j) for j in jobs]
    if cfg.leakage == "strict" and cfg.pca:
        # the chain width is the same in every fold
        d_in = X.shape[1] + (_meta_width(cfg, C) if cfg.sfe else 0)
        rr = cfg.pca_k / d_in

    cm = sum(f.confusion for f in folds)
    aggregate = metric_block(cm)
    mean_over = {"accuracy": float(np.mean([f.metrics["accuracy"] for f in folds]))}
    for avg in AVERAGES:
        mean_over[avg] = {key: float(np.mean([f.metrics[avg][key] for f in folds]))
                          for key in ("precision", "recall", "f1")}
    pcp = per_class_prf(cm)
    warnings = [f"class {label_map.code_to_class[c]!r} was never predicted; precision set to 0"
                for c in range(C) if pcp["zero_precision"][c]]
    warnings += [f"class {label_map.code_to_class[c]!r} has no evaluated rows; recall set to 0"
                 for c in range(C) if pcp["zero_recall"][c]]

    # ROC/AUC over the pooled out-of-fold probabilities
    order = np.concatenate([f.test_indices for f in folds])
    proba = np.concatenate([f.proba for f in folds])
    y_oof = y_eval[order]
    pooled_auc = _fold_auc(y_oof, proba, C)
    roc = {}
    if C == 2:
        roc[label_map.code_to_class[1]] = roc_curve(y_oof == 1, proba[:, 1])
    else:
        for c in range(C):
            if 0 < (y_oof == c).sum() < len(y_oof):
                roc[label_map.code_to_class[c]] = roc_curve(y_oof == c, proba[:, c])

    audit = {"appended_rows": int(sum(f.n_appended for f in folds)) if cfg.leakage == "strict"
             else n_appended,
             "appended_rows_in_test": int(sum(f.appended_in_test for f in folds)),
             "test_rows_with_copy_in_train": _leaked_test_rows(plan, X_eval)}
    t_end = time.perf_counter()
    timings = {"prepare": (t_prep - t_start) * 1e3, "total": (t_end - t_start) * 1e3,
               "folds": [{"fit": f.fit_ms, "predict": f.predict_ms} for f in folds]}
    return EvaluationReport(
        cfg.to_dict(), list(label_map.code_to_class), n_rows, len(y_eval), n_appended,
        folds, cm, aggregate, mean_over, roc, pooled_auc,
        {k: pcp[k].tolist() for k in ("precision", "recall", "f1", "support")},
        warnings, rr, audit, timings)


def _meta_width(cfg: PipelineConfig, n_classes: int) -> int:
    s = cfg.sfe_settings().resolved(n_classes)
    hard, soft = 2, s.k_kmeans + s.k_gmm
    return {"hard": hard, "soft": soft, "both": hard + soft}[s.embed_mode]


def _leaked_test_rows(plan: FoldPlan, X_eval: np.ndarray) -> int:
    """Test rows whose exact feature vector also sits in that fold's training rows."""
    rows = np.ascontiguousarray(X_eval)
    view = rows.view(np.dtype((np.void, rows.dtype.itemsize * rows.shape[1]))).ravel()
    _, group = np.unique(view, return_inverse=True)
    group = group.ravel()
    leaked = 0
    for f in range(plan.k):
        in_test = plan.assignments == f
        train_groups = np.zeros(group.max() + 1, dtype=bool)
        train_groups[group[~in_test]] = True
        leaked += int(train_groups[group[in_test]].sum())
    return leaked
