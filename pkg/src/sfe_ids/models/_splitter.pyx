# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
# distutils: language = c++
"""Compiled split search and tree traversal.

Must stay numerically identical to ``_splitter_py``: same candidate order,
same accumulation order, same tie rules (first strictly better wins).
"""
import numpy as np

from libc.stdlib cimport malloc, free
from libc.string cimport memset
from libcpp.algorithm cimport sort
from libcpp.pair cimport pair
from libcpp.vector cimport vector

ctypedef Py_ssize_t intp


cdef inline float _midpoint(float a, float b) noexcept nogil:
    cdef double m = (<double>a + <double>b) * 0.5
    cdef float t = <float>m
    if t >= b:
        t = a
    return t


cdef inline double _class_score(long long *cL, long long *cR, intp nL, intp nR,
                                int n_classes, int criterion,
                                const double *xlogx) noexcept nogil:
    cdef long long sqL = 0, sqR = 0
    cdef double sL = 0.0, sR = 0.0
    cdef int c
    if criterion == 0:
        for c in range(n_classes):
            sqL += cL[c] * cL[c]
            sqR += cR[c] * cR[c]
        return <double>sqL / <double>nL + <double>sqR / <double>nR
    for c in range(n_classes):
        sL = sL + xlogx[cL[c]]
    sL = sL - xlogx[nL]
    for c in range(n_classes):
        sR = sR + xlogx[cR[c]]
    sR = sR - xlogx[nR]
    return sL + sR


def best_split_class(const float[:, ::1] X, const int[::1] y, const intp[::1] idx,
                     const intp[::1] features, int n_classes, int criterion,
                     int min_leaf, const double[::1] xlogx):
    """Exact greedy search over midpoints of consecutive distinct values.

    Returns ``(feature, threshold, score)``; feature is -1 when no split
    respects ``min_leaf``.  ``score`` is the child-side proxy that the
    caller compares against the parent's.
    """
    cdef intp n = idx.shape[0]
    cdef intp nf = features.shape[0]
    cdef intp i, fi, f, nL, nR
    cdef int k, c
    cdef double score, best = -np.inf
    cdef intp best_f = -1
    cdef float best_t = 0.0
    cdef vector[pair[float, intp]] buf
    cdef long long *cL = <long long *>malloc(n_classes * sizeof(long long))
    cdef long long *cR = <long long *>malloc(n_classes * sizeof(long long))
    cdef long long *tot = <long long *>malloc(n_classes * sizeof(long long))
    if cL == NULL or cR == NULL or tot == NULL:
        free(cL); free(cR); free(tot)
        raise MemoryError()
    try:
        with nogil:
            buf.resize(n)
            memset(tot, 0, n_classes * sizeof(long long))
            for i in range(n):
                tot[y[idx[i]]] += 1
            for fi in range(nf):
                f = features[fi]
                for i in range(n):
                    buf[i].first = X[idx[i], f]
                    buf[i].second = i
                sort(buf.begin(), buf.end())
                if not buf[0].first < buf[n - 1].first:
                    continue
                memset(cL, 0, n_classes * sizeof(long long))
                for c in range(n_classes):
                    cR[c] = tot[c]
                for i in range(n - 1):
                    k = y[idx[buf[i].second]]
                    cL[k] += 1
                    cR[k] -= 1
                    nL = i + 1
                    nR = n - nL
                    if nR < min_leaf:
                        break
                    if nL < min_leaf or not buf[i].first < buf[i + 1].first:
                        continue
                    score = _class_score(cL, cR, nL, nR, n_classes, criterion, &xlogx[0])
                    if score > best:
                        best = score
                        best_f = f
                        best_t = _midpoint(buf[i].first, buf[i + 1].first)
    finally:
        free(cL); free(cR); free(tot)
    return best_f, best_t, best


def random_split_class(const float[:, ::1] X, const int[::1] y, const intp[::1] idx,
                       const intp[::1] features, const double[::1] u, int n_classes,
                       int criterion, int min_leaf, const double[::1] xlogx):
    """One uniform cut-point per candidate feature; best of those."""
    cdef intp n = idx.shape[0]
    cdef intp nf = features.shape[0]
    cdef intp i, fi, f, nL, nR
    cdef int c, k
    cdef float v, mn, mx, t
    cdef double score, best = -np.inf
    cdef intp best_f = -1
    cdef float best_t = 0.0
    cdef long long *cL = <long long *>malloc(n_classes * sizeof(long long))
    cdef long long *cR = <long long *>malloc(n_classes * sizeof(long long))
    if cL == NULL or cR == NULL:
        free(cL); free(cR)
        raise MemoryError()
    try:
        with nogil:
            for fi in range(nf):
                f = features[fi]
                mn = X[idx[0], f]
                mx = mn
                for i in range(1, n):
                    v = X[idx[i], f]
                    if v < mn:
                        mn = v
                    if v > mx:
                        mx = v
                if not mn < mx:
                    continue
                t = <float>(<double>mn + u[fi] * (<double>mx - <double>mn))
                if t >= mx:
                    t = mn
                memset(cL, 0, n_classes * sizeof(long long))
                memset(cR, 0, n_classes * sizeof(long long))
                nL = 0
                for i in range(n):
                    k = y[idx[i]]
                    if X[idx[i], f] <= t:
                        cL[k] += 1
                        nL += 1
                    else:
                        cR[k] += 1
                nR = n - nL
                if nL < min_leaf or nR < min_leaf:
                    continue
                score = _class_score(cL, cR, nL, nR, n_classes, criterion, &xlogx[0])
                if score > best:
                    best = score
                    best_f = f
                    best_t = t
    finally:
        free(cL); free(cR)
    return best_f, best_t, best


def best_split_reg(const float[:, ::1] X, const double[::1] g, const double[::1] h,
                   const intp[::1] idx, const intp[::1] features, double lam,
                   int min_leaf, double G, double H):
    """Second-order structure-score search for boosting.

    ``score = GL^2/(HL+lam) + GR^2/(HR+lam)`` with ``GR = G - GL``; the caller
    subtracts the parent term and applies the 1/2 factor and gamma.
    """
    cdef intp n = idx.shape[0]
    cdef intp nf = features.shape[0]
    cdef intp i, fi, f, nL, nR, r
    cdef double GL, HL, GR, HR, score, best = -np.inf
    cdef intp best_f = -1
    cdef float best_t = 0.0
    cdef vector[pair[float, intp]] buf
    with nogil:
        buf.resize(n)
        for fi in range(nf):
            f = features[fi]
            for i in range(n):
                buf[i].first = X[idx[i], f]
                buf[i].second = i
            sort(buf.begin(), buf.end())
            if not buf[0].first < buf[n - 1].first:
                continue
            GL = 0.0
            HL = 0.0
            for i in range(n - 1):
                r = idx[buf[i].second]
                GL = GL + g[r]
                HL = HL + h[r]
                nL = i + 1
                nR = n - nL
                if nR < min_leaf:
                    break
                if nL < min_leaf or not buf[i].first < buf[i + 1].first:
                    continue
                GR = G - GL
                HR = H - HL
                if not (HL + lam > 0.0 and HR + lam > 0.0):
                    continue
                score = GL * GL / (HL + lam) + GR * GR / (HR + lam)
                if score > best:
                    best = score
                    best_f = f
                    best_t = _midpoint(buf[i].first, buf[i + 1].first)
    return best_f, best_t, best


def apply_tree(const float[:, ::1] X, const int[::1] feature, const float[::1] threshold,
               const int[::1] left, const int[::1] right):
    """Leaf index reached by each row (``x[f] <= t`` goes left)."""
    cdef intp n = X.shape[0]
    cdef intp i
    cdef int node
    out = np.empty(n, dtype=np.intp)
    cdef intp[::1] res = out
    with nogil:
        for i in range(n):
            node = 0
            while feature[node] >= 0:
                if X[i, feature[node]] <= threshold[node]:
                    node = left[node]
                else:
                    node = right[node]
            res[i] = node
    return out
