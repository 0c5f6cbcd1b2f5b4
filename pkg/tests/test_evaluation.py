from fractions import Fraction

import numpy as np
import pytest

from oracles import pairwise_auc
from sfe_ids.errors import ConfigError, DataError
from sfe_ids.evaluation import (accuracy, auc, confusion_matrix, cross_validate, make_folds,
                                multiclass_auc, per_class_prf, precision_recall_f1, roc_curve)
from sfe_ids.pipeline import PipelineConfig
from sfe_ids.transform import LabelMap


# -- metrics -----------------------------------------------------------------------

def test_confusion_matrix_layout():
    cm = confusion_matrix([1, 1, 0, 0], [1, 0, 0, 0], 2)
    assert cm.tolist() == [[2, 0], [1, 1]]
    assert accuracy(cm) == 0.75
    with pytest.raises(DataError):
        confusion_matrix([0, 2], [0, 0], 2)
    with pytest.raises(DataError):
        confusion_matrix([0], [0, 1], 2)


def test_binary_metrics_known_values():
    cm = np.array([[8, 2], [1, 9]])
    assert accuracy(cm) == pytest.approx(0.85)
    m = per_class_prf(cm)
    assert m["precision"][1] == pytest.approx(9 / 11)
    assert m["recall"][1] == pytest.approx(0.9)
    f1 = 2 * (9 / 11) * 0.9 / (9 / 11 + 0.9)
    assert m["f1"][1] == pytest.approx(f1)


def test_averaging_modes():
    cm = np.array([[5, 1, 0], [2, 3, 1], [0, 0, 4]])
    m = per_class_prf(cm)
    p, r, f = precision_recall_f1(cm, "macro")
    assert p == pytest.approx(m["precision"].mean()) and f == pytest.approx(m["f1"].mean())
    p, r, f = precision_recall_f1(cm, "micro")
    assert p == pytest.approx(12 / 16) and r == pytest.approx(12 / 16)
    p, r, f = precision_recall_f1(cm, "weighted")
    w = cm.sum(axis=1) / cm.sum()
    assert r == pytest.approx((m["recall"] * w).sum())
    with pytest.raises(ConfigError):
        precision_recall_f1(cm, "harmonic")


def test_never_predicted_class_scores_zero():
    cm = np.array([[5, 0, 0], [2, 0, 0], [0, 0, 0]])
    m = per_class_prf(cm)
    assert m["precision"][1] == 0 and m["zero_precision"][1]
    assert m["zero_recall"][2]
    # class 2 never occurs in either labels or predictions, so macro skips it
    p, r, f = precision_recall_f1(cm, "macro")
    assert r == pytest.approx((1.0 + 0.0) / 2)


def test_roc_endpoints_and_monotone():
    rng = np.random.default_rng(0)
    y = rng.integers(0, 2, 100)
    s = rng.random(100) + 0.3 * y
    pts = roc_curve(y, s)
    assert pts[0] == (0.0, 0.0) and pts[-1] == (1.0, 1.0)
    f, t = zip(*pts)
    assert all(b >= a for a, b in zip(f, f[1:])) and all(b >= a for a, b in zip(t, t[1:]))


def test_auc_against_pairwise_oracle():
    rng = np.random.default_rng(1)
    for _ in range(50):
        n = int(rng.integers(2, 40))
        y = rng.integers(0, 2, n)
        y[0], y[1] = 0, 1
        s = rng.integers(0, 5, n).astype(float)  # many ties
        assert auc(y, s) == float(pairwise_auc(y, s))


def test_auc_edge_cases():
    assert auc([0, 0, 1, 1], [0.1, 0.2, 0.8, 0.9]) == 1.0
    assert auc([0, 0, 1, 1], [0.9, 0.8, 0.2, 0.1]) == 0.0
    assert auc([0, 1], [0.5, 0.5]) == 0.5
    with pytest.raises(DataError):
        auc([1, 1], [0.2, 0.3])
    with pytest.raises(DataError):
        auc([0, 1], [np.nan, 0.3])


def test_multiclass_auc():
    y = np.array([0, 1, 2, 0, 1, 2])
    proba = np.eye(3)[y]
    out = multiclass_auc(y, proba)
    assert out["macro"] == 1.0 and set(out["per_class"]) == {0, 1, 2}
    out = multiclass_auc(np.array([0, 1, 0, 1]), np.eye(3)[[0, 1, 0, 1]], 3)
    assert out["per_class"][2] is None and out["macro"] == 1.0
    with pytest.raises(DataError):
        multiclass_auc(np.zeros(4, dtype=int), np.eye(3)[[0] * 4])


# -- folds -------------------------------------------------------------------------

def test_folds_partition_rows():
    y = np.array([0] * 53 + [1] * 17 + [2] * 7)
    plan = make_folds(y, 10, stratified=True, seed=3)
    sizes = plan.sizes()
    assert sizes.sum() == len(y) and sizes.max() - sizes.min() <= 1
    for c in range(3):
        per = np.bincount(plan.assignments[y == c], minlength=10)
        assert per.max() - per.min() <= 1
    seen = np.concatenate([plan.test_indices(f) for f in range(10)])
    assert sorted(seen.tolist()) == list(range(len(y)))
    for f in range(10):
        assert len(plan.train_indices(f)) + len(plan.test_indices(f)) == len(y)
    plain = make_folds(y, 10, stratified=False, seed=3)
    assert np.bincount(plain.assignments).max() - np.bincount(plain.assignments).min() <= 1
    assert np.array_equal(make_folds(y, 10, seed=3).assignments, plan.assignments)
    with pytest.raises(ConfigError):
        make_folds(y, 1)
    with pytest.raises(DataError):
        make_folds(y[:3], 5)


# -- cross-validation ----------------------------------------------------------------

def small_problem(n=300, seed=0):
    rng = np.random.default_rng(seed)
    y = np.where(rng.random(n) < 0.8, 0, np.where(rng.random(n) < 0.7, 1, 2))
    X = rng.normal(size=(n, 5)) + y[:, None] * 2.0
    return X, y, LabelMap(("n", "a", "b")), [f"f{i}" for i in range(5)]


FAST = dict(model="rf", model_params={"n_trees": 10}, cv_k=5, pca_k=4)


def test_cv_faithful_report():
    X, y, lm, names = small_problem()
    cfg = PipelineConfig(leakage="faithful", **FAST)
    rep = cross_validate(X, y, cfg, lm, names)
    n_eval = rep.n_rows_evaluated
    assert n_eval == 3 * np.bincount(y).max()
    assert rep.n_appended == n_eval - len(y)
    assert sum(f.n_test for f in rep.folds) == n_eval
    for f in rep.folds:
        assert f.n_train + f.n_test == n_eval
        assert abs(f.n_train - 0.8 * n_eval) <= 1 * 3
    assert np.array_equal(rep.confusion, sum(f.confusion for f in rep.folds))
    assert rep.accuracy == pytest.approx(np.trace(rep.confusion) / n_eval)
    assert rep.audit["appended_rows"] == rep.n_appended
    # faithful folds see copies of test rows in training
    assert rep.audit["test_rows_with_copy_in_train"] > 0
    assert rep.reduction_ratio == pytest.approx(4 / (5 + 2))
    d = rep.to_dict()
    assert d["metadata"]["leakage_mode"] == "faithful" and "timings_ms" not in d


def test_cv_strict_has_no_leak():
    X, y, lm, names = small_problem()
    cfg = PipelineConfig(leakage="strict", **FAST)
    rep = cross_validate(X, y, cfg, lm, names)
    assert rep.n_rows_evaluated == len(y)
    assert rep.audit["appended_rows_in_test"] == 0
    assert rep.audit["appended_rows"] > 0
    assert rep.audit["test_rows_with_copy_in_train"] == 0
    assert rep.accuracy > 0.8


def test_cv_deterministic():
    X, y, lm, names = small_problem()
    cfg = PipelineConfig(leakage="strict", **FAST)
    a = cross_validate(X, y, cfg, lm, names).to_dict()
    b = cross_validate(X, y, cfg, lm, names, threads=3).to_dict()
    assert a == b


def test_cv_binary_auc_and_roc():
    rng = np.random.default_rng(2)
    y = (rng.random(200) < 0.3).astype(int)
    X = rng.normal(size=(200, 3)) + y[:, None]
    rep = cross_validate(X, y, PipelineConfig(sfe=False, pca=False, **dict(FAST, pca_k=2)),
                         LabelMap(("n", "a")), ["x", "y", "z"])
    assert list(rep.roc) == ["a"]
    assert 0.5 < rep.auc["macro"] <= 1.0


def test_cv_pca_too_wide():
    X, y, lm, names = small_problem()
    with pytest.raises(ConfigError):
        cross_validate(X, y, PipelineConfig(sfe=False, **dict(FAST, pca_k=9)), lm, names)


def test_pairwise_oracle_sanity():
    assert pairwise_auc([0, 1], [0.1, 0.9]) == Fraction(1)
    assert pairwise_auc([0, 1], [0.5, 0.5]) == Fraction(1, 2)
