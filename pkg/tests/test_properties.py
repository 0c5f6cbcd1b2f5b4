import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from oracles import best_split_bruteforce, pairwise_auc
from sfe_ids.evaluation import auc, confusion_matrix, make_folds, precision_recall_f1
from sfe_ids.models import TreeParams, dt_fit, gini, tree_predict
from sfe_ids.pca import jacobi_eigh
from sfe_ids.resample import random_oversample

small = settings(max_examples=60, deadline=None)


@small
@given(st.lists(st.integers(0, 50), min_size=2, max_size=6).filter(lambda c: sum(c) > 0))
def test_gini_bounds(counts):
    g = gini(counts)
    assert 0 <= g <= 1 - 1 / len(counts) + 1e-12


@small
@given(st.integers(2, 40).flatmap(lambda n: st.tuples(
    arrays(np.int8, n, elements=st.integers(0, 1)),
    arrays(np.int8, n, elements=st.integers(0, 4)))))
def test_auc_matches_pairwise(data):
    y, s = data
    if 0 < y.sum() < len(y):
        assert auc(y, s.astype(float)) == float(pairwise_auc(y, s))


@small
@given(st.integers(4, 30).flatmap(lambda n: st.tuples(
    arrays(np.int8, (n, 2), elements=st.integers(0, 3)),
    arrays(np.int8, n, elements=st.integers(0, 2)))))
def test_root_split_is_optimal(data):
    X, y = data
    X = X.astype(np.float32)
    y = y.astype(np.int64)
    if len(np.unique(y)) < 2:
        return
    want = best_split_bruteforce(X, y, 3)
    tree = dt_fit(X, y, TreeParams(max_depth=1), n_classes=3)
    if want is not None:
        assert tree.feature[0] == want[0]


@small
@given(st.integers(5, 60), st.integers(0, 1000))
def test_unlimited_tree_fits_distinct_rows(n, seed):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, 3))
    y = rng.integers(0, 3, n)
    assert (tree_predict(dt_fit(X, y), X) == y).all()


@small
@given(st.integers(1, 6), st.integers(0, 10_000))
def test_jacobi_reconstructs(d, seed):
    M = np.random.default_rng(seed).normal(size=(d, d))
    A = M + M.T
    vals, vecs = jacobi_eigh(A)
    assert np.allclose(vecs @ np.diag(vals) @ vecs.T, A, atol=1e-9 * max(1, np.abs(A).max()))


@small
@given(st.lists(st.integers(0, 3), min_size=2, max_size=80), st.integers(0, 99))
def test_oversample_balances(labels, seed):
    y = np.asarray(labels)
    X = np.arange(len(y), dtype=float)[:, None]
    X2, y2, plan = random_oversample(X, y, seed)
    counts = np.bincount(y2)
    present = counts[counts > 0]
    assert (present == present.max()).all()
    # appended rows are copies of originals of the same class
    assert np.array_equal(X2[:len(y)], X)
    src = X2[len(y):, 0].astype(int)
    assert np.array_equal(y[src], y2[len(y):])


@small
@given(st.lists(st.integers(0, 2), min_size=10, max_size=100), st.integers(2, 5),
       st.integers(0, 50))
def test_folds_cover_each_row_once(labels, k, seed):
    plan = make_folds(np.asarray(labels), k, seed=seed)
    sizes = plan.sizes()
    assert sizes.sum() == len(labels) and sizes.max() - sizes.min() <= 1


@small
@given(st.lists(st.tuples(st.integers(0, 2), st.integers(0, 2)), min_size=1, max_size=60))
def test_micro_precision_equals_accuracy_single_label(pairs):
    t, p = map(np.asarray, zip(*pairs))
    cm = confusion_matrix(t, p, 3)
    mp, mr, _ = precision_recall_f1(cm, "micro")
    assert abs(mp - (t == p).mean()) < 1e-12 and abs(mr - mp) < 1e-12
