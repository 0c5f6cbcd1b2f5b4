"""Pure-numpy split search and tree traversal.

Mirrors the compiled kernels operation for operation so both backends grow
identical trees: stable sort order, sequential accumulation, first strictly
better candidate wins.
"""
import numpy as np


def _midpoints(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    t = ((a.astype(np.float64) + b.astype(np.float64)) * 0.5).astype(np.float32)
    return np.where(t >= b, a, t)


def _class_scores(cL, cR, nL, nR, criterion, xlogx):
    if criterion == 0:
        sqL = (cL * cL).sum(axis=1)
        sqR = (cR * cR).sum(axis=1)
        return sqL / nL + sqR / nR
    sL = np.zeros(len(nL))
    for c in range(cL.shape[1]):
        sL = sL + xlogx[cL[:, c]]
    sL = sL - xlogx[nL]
    sR = np.zeros(len(nR))
    for c in range(cR.shape[1]):
        sR = sR + xlogx[cR[:, c]]
    sR = sR - xlogx[nR]
    return sL + sR


def _candidates(vs: np.ndarray, n: int, min_leaf: int) -> np.ndarray:
    pos = np.flatnonzero(vs[:-1] < vs[1:])
    nL = pos + 1
    return pos[(nL >= min_leaf) & (n - nL >= min_leaf)]


def best_split_class(X, y, idx, features, n_classes, criterion, min_leaf, xlogx):
    n = len(idx)
    yn = y[idx]
    tot = np.bincount(yn, minlength=n_classes).astype(np.int64)
    best, best_f, best_t = -np.inf, -1, np.float32(0.0)
    eye = np.eye(n_classes, dtype=np.int64)
    for f in features:
        v = X[idx, f]
        order = np.argsort(v, kind="stable")
        vs = v[order]
        if not vs[0] < vs[-1]:
            continue
        pos = _candidates(vs, n, min_leaf)
        if pos.size == 0:
            continue
        cL = np.cumsum(eye[yn[order]], axis=0)[pos]
        cR = tot - cL
        nL = pos + 1
        scores = _class_scores(cL, cR, nL, n - nL, criterion, xlogx)
        j = int(np.argmax(scores))
        if scores[j] > best:
            best = float(scores[j])
            best_f = int(f)
            best_t = _midpoints(vs[pos[j]:pos[j] + 1], vs[pos[j] + 1:pos[j] + 2])[0]
    return best_f, float(best_t), best


def random_split_class(X, y, idx, features, u, n_classes, criterion, min_leaf, xlogx):
    n = len(idx)
    yn = y[idx]
    best, best_f, best_t = -np.inf, -1, np.float32(0.0)
    for fi, f in enumerate(features):
        v = X[idx, f]
        mn, mx = v.min(), v.max()
        if not mn < mx:
            continue
        t = np.float32(float(mn) + float(u[fi]) * (float(mx) - float(mn)))
        if t >= mx:
            t = mn
        go_left = v <= t
        nL = int(go_left.sum())
        nR = n - nL
        if nL < min_leaf or nR < min_leaf:
            continue
        cL = np.bincount(yn[go_left], minlength=n_classes).astype(np.int64)[None, :]
        cR = np.bincount(yn[~go_left], minlength=n_classes).astype(np.int64)[None, :]
        score = _class_scores(cL, cR, np.array([nL]), np.array([nR]), criterion, xlogx)[0]
        if score > best:
            best, best_f, best_t = float(score), int(f), t
    return best_f, float(best_t), best


def best_split_reg(X, g, h, idx, features, lam, min_leaf, G, H):
    n = len(idx)
    best, best_f, best_t = -np.inf, -1, np.float32(0.0)
    gn, hn = g[idx], h[idx]
    for f in features:
        v = X[idx, f]
        order = np.argsort(v, kind="stable")
        vs = v[order]
        if not vs[0] < vs[-1]:
            continue
        pos = _candidates(vs, n, min_leaf)
        if pos.size == 0:
            continue
        GL = np.cumsum(gn[order])[pos]
        HL = np.cumsum(hn[order])[pos]
        GR = G - GL
        HR = H - HL
        ok = (HL + lam > 0.0) & (HR + lam > 0.0)
        if not ok.any():
            continue
        with np.errstate(divide="ignore", invalid="ignore"):
            scores = GL * GL / (HL + lam) + GR * GR / (HR + lam)
        scores = np.where(ok, scores, -np.inf)
        j = int(np.argmax(scores))
        if scores[j] > best:
            best = float(scores[j])
            best_f = int(f)
            best_t = _midpoints(vs[pos[j]:pos[j] + 1], vs[pos[j] + 1:pos[j] + 2])[0]
    return best_f, float(best_t), best


def apply_tree(X, feature, threshold, left, right):
    n = X.shape[0]
    node = np.zeros(n, dtype=np.intp)
    active = np.flatnonzero(feature[node] >= 0)
    while active.size:
        nd = node[active]
        go_left = X[active, feature[nd]] <= threshold[nd]
        node[active] = np.where(go_left, left[nd], right[nd])
        active = active[feature[node[active]] >= 0]
    return node
