"""Independent reference implementations used only by the tests.

None of these share code with the package: eigenvalues come from Householder
tridiagonalization plus Sturm-sequence bisection, AUC from the O(n^2) pair
count, splits from exhaustive enumeration with pure-Python impurity sums.
"""
from __future__ import annotations

import itertools
from fractions import Fraction

import numpy as np


def householder_tridiagonal(A) -> tuple[np.ndarray, np.ndarray]:
    """Diagonal and off-diagonal of a tridiagonal matrix similar to symmetric A."""
    A = np.array(A, dtype=np.float64)
    n = A.shape[0]
    for k in range(n - 2):
        x = A[k + 1:, k].copy()
        alpha = np.linalg.norm(x)
        if alpha == 0.0:
            continue
        if x[0] > 0:
            alpha = -alpha
        v = x.copy()
        v[0] -= alpha
        vn = np.linalg.norm(v)
        if vn == 0.0:
            continue
        v /= vn
        H = np.eye(n)
        H[k + 1:, k + 1:] -= 2.0 * np.outer(v, v)
        A = H @ A @ H
    return np.diag(A).copy(), np.diag(A, 1).copy()


def _sturm_count(diag, off, x) -> int:
    """Number of eigenvalues strictly below x (LDL^T sign count)."""
    count = 0
    q = diag[0] - x
    if q < 0:
        count += 1
    for i in range(1, len(diag)):
        if q == 0.0:
            q = 1e-300
        q = diag[i] - x - off[i - 1] ** 2 / q
        if q < 0:
            count += 1
    return count


def eigvals_bisection(A, tol: float = 1e-13) -> np.ndarray:
    """All eigenvalues of symmetric A in ascending order."""
    diag, off = householder_tridiagonal(A)
    n = len(diag)
    if n == 1:
        return diag.copy()
    # Gershgorin bounds
    radius = np.abs(np.r_[off, 0.0]) + np.abs(np.r_[0.0, off])
    lo = float((diag - radius).min()) - 1.0
    hi = float((diag + radius).max()) + 1.0
    scale = max(1.0, abs(lo), abs(hi))
    out = []
    for j in range(n):
        a, b = lo, hi
        while b - a > tol * scale:
            mid = 0.5 * (a + b)
            if _sturm_count(diag, off, mid) > j:
                b = mid
            else:
                a = mid
        out.append(0.5 * (a + b))
    return np.array(out)


def pairwise_auc(y, scores) -> float:
    """P(score+ > score-) + 1/2 P(tie), exactly, over all positive/negative pairs."""
    y = np.asarray(y).astype(bool)
    s = np.asarray(scores, dtype=np.float64)
    pos = s[y]
    neg = s[~y]
    twice = 0
    for p in pos:
        for q in neg:
            if p > q:
                twice += 2
            elif p == q:
                twice += 1
    return float(Fraction(twice, 2 * len(pos) * len(neg)))


def gini_fraction(counts) -> Fraction:
    total = sum(counts)
    return 1 - sum(Fraction(c, total) ** 2 for c in counts)


def best_split_bruteforce(X, y, n_classes):
    """Exhaustive best (feature, threshold) by exact weighted Gini decrease.

    Returns (feature, lower value, upper value, decrease) for the first best
    candidate in (feature, threshold) order, or None when no split exists.
    """
    X = np.asarray(X, dtype=np.float32)
    n = len(y)
    parent = [int((y == c).sum()) for c in range(n_classes)]
    best = None
    for f in range(X.shape[1]):
        values = sorted(set(X[:, f].tolist()))
        for a, b in zip(values[:-1], values[1:]):
            left = X[:, f] <= a
            cl = [int(((y == c) & left).sum()) for c in range(n_classes)]
            cr = [p - q for p, q in zip(parent, cl)]
            nl, nr = sum(cl), sum(cr)
            dec = gini_fraction(parent) - (Fraction(nl, n) * gini_fraction(cl)
                                           + Fraction(nr, n) * gini_fraction(cr))
            if best is None or dec > best[3]:
                best = (f, a, b, dec)
    return best


def depth2_xor_solvable(X, y) -> bool:
    """True when some depth-2 axis-aligned tree classifies every point."""
    X = np.asarray(X)
    cands = []
    for f in range(X.shape[1]):
        vals = sorted(set(X[:, f].tolist()))
        cands += [(f, (a + b) / 2) for a, b in zip(vals[:-1], vals[1:])]
    for root, lsplit, rsplit in itertools.product(cands, repeat=3):
        ok = True
        for side, sub in ((X[:, root[0]] <= root[1], lsplit), (X[:, root[0]] > root[1], rsplit)):
            for leaf in (X[:, sub[0]] <= sub[1], X[:, sub[0]] > sub[1]):
                m = side & leaf
                if m.any() and len(set(y[m].tolist())) > 1:
                    ok = False
        if ok:
            return True
    return False
