"""Stacking feature embedding: clustering outputs appended as meta-features.

A K-Means model and a diagonal-covariance Gaussian mixture are fit on the
(standardized) training features.  Their outputs, either hard cluster indices
or soft scores, are z-scored against the fitting data and concatenated to the
right of the original columns.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from . import _rng
from .errors import ConfigError, DataError
from .transform import ScalerParams, apply_scaler, fit_scaler

log = logging.getLogger(__name__)

_ROW_CHUNK = 8192
EMBED_MODES = ("hard", "soft", "both")


def _check_X(X) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise DataError("expected a 2-D feature matrix")
    if not np.isfinite(X).all():
        raise DataError("feature matrix contains non-finite values")
    return X


def sq_distances(X: np.ndarray, C: np.ndarray) -> np.ndarray:
    """Exact squared Euclidean distances, (n, k), computed in row chunks."""
    out = np.empty((X.shape[0], C.shape[0]))
    for s in range(0, X.shape[0], _ROW_CHUNK):
        diff = X[s:s + _ROW_CHUNK, None, :] - C[None, :, :]
        out[s:s + _ROW_CHUNK] = np.einsum("nkd,nkd->nk", diff, diff)
    return out


# ---------------------------------------------------------------- K-Means

@dataclass
class KMeansModel:
    centroids: np.ndarray
    inertia: float
    iterations_run: int
    inertia_trace: list[float] = field(default_factory=list)

    @property
    def k(self) -> int:
        return self.centroids.shape[0]

    def to_dict(self) -> dict:
        return {"centroids": self.centroids.tolist(), "inertia": self.inertia,
                "iterations_run": self.iterations_run}

    @classmethod
    def from_dict(cls, data: dict) -> "KMeansModel":
        return cls(np.asarray(data["centroids"], dtype=np.float64),
                   float(data["inertia"]), int(data["iterations_run"]))


def _kmeanspp(X: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    """Greedy k-means++: best of several D^2-weighted candidates per centre."""
    n = X.shape[0]
    trials = 2 + int(np.log(k))
    centers = np.empty((k, X.shape[1]))
    centers[0] = X[rng.integers(n)]
    closest = sq_distances(X, centers[:1])[:, 0]
    for c in range(1, k):
        total = closest.sum()
        if total <= 0:
            # every point sits on a centre already; duplicates are unavoidable
            centers[c] = X[rng.integers(n)]
            continue
        cum = np.cumsum(closest)
        picks = np.searchsorted(cum, rng.random(trials) * cum[-1], side="right")
        picks = np.minimum(picks, n - 1)
        cand = sq_distances(X, X[picks])
        pots = np.minimum(closest[:, None], cand).sum(axis=0)
        best = int(np.argmin(pots))
        centers[c] = X[picks[best]]
        closest = np.minimum(closest, cand[:, best])
    return centers


def kmeans_fit(X, k: int, seed: int = 0, max_iter: int = 300, tol: float = 1e-4) -> KMeansModel:
    """Lloyd iterations from a seeded k-means++ start.

    Stops when no centroid moves by ``tol`` or more (Euclidean) or after
    ``max_iter`` iterations.  A cluster that loses all its points is moved
    onto the point farthest from its assigned centroid.
    """
    X = _check_X(X)
    n = X.shape[0]
    if k < 1:
        raise ConfigError("k must be >= 1")
    if k > n:
        raise DataError(f"k={k} exceeds the number of points ({n})")
    rng = _rng.stream(seed, _rng.KMEANS, k)
    centers = _kmeanspp(X, k, rng)
    trace = []
    it = 0
    for it in range(1, max_iter + 1):
        d2 = sq_distances(X, centers)
        labels = np.argmin(d2, axis=1)
        best = d2[np.arange(n), labels]
        trace.append(float(best.sum()))
        counts = np.bincount(labels, minlength=k)
        new = np.stack([np.bincount(labels, weights=X[:, j], minlength=k)
                        for j in range(X.shape[1])], axis=1)
        nonempty = counts > 0
        new[nonempty] /= counts[nonempty, None]
        for c in np.flatnonzero(~nonempty):
            far = int(np.argmax(best))
            new[c] = X[far]
            best[far] = 0.0
        shift = np.sqrt(((new - centers) ** 2).sum(axis=1)).max()
        centers = new
        if shift < tol:
            break
    d2 = sq_distances(X, centers)
    inertia = float(d2.min(axis=1).sum())
    return KMeansModel(centers, inertia, it, trace)


def kmeans_assign(m: KMeansModel, X) -> tuple[np.ndarray, np.ndarray]:
    """Nearest-centroid labels (ties go to the lower index) and distances."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != m.centroids.shape[1]:
        raise DataError("dimension mismatch between data and centroids")
    d = np.sqrt(sq_distances(X, m.centroids))
    return np.argmin(d, axis=1), d


# ---------------------------------------------------------------- GMM

_LOG2PI = np.log(2.0 * np.pi)


@dataclass
class GmmModel:
    weights: np.ndarray
    means: np.ndarray
    variances: np.ndarray
    cov_floor: float
    log_likelihood_trace: list[float] = field(default_factory=list)

    @property
    def k(self) -> int:
        return len(self.weights)

    def to_dict(self) -> dict:
        return {"weights": self.weights.tolist(), "means": self.means.tolist(),
                "variances": self.variances.tolist(), "cov_floor": self.cov_floor,
                "log_likelihood_trace": list(self.log_likelihood_trace)}

    @classmethod
    def from_dict(cls, data: dict) -> "GmmModel":
        return cls(np.asarray(data["weights"], dtype=np.float64),
                   np.asarray(data["means"], dtype=np.float64),
                   np.asarray(data["variances"], dtype=np.float64),
                   float(data["cov_floor"]),
                   list(data.get("log_likelihood_trace", [])))


def _log_joint(X, weights, means, variances) -> np.ndarray:
    """log(w_j) + log N(x_i | mu_j, diag(var_j)) as an (n, k) matrix."""
    prec = 1.0 / variances
    out = np.empty((X.shape[0], len(weights)))
    const = np.log(weights) - 0.5 * (X.shape[1] * _LOG2PI + np.log(variances).sum(axis=1))
    for s in range(0, X.shape[0], _ROW_CHUNK):
        diff = X[s:s + _ROW_CHUNK, None, :] - means[None]
        out[s:s + _ROW_CHUNK] = const - 0.5 * np.einsum("nkd,kd->nk", diff * diff, prec)
    return out


def _logsumexp_rows(a: np.ndarray) -> np.ndarray:
    top = a.max(axis=1, keepdims=True)
    return (top + np.log(np.exp(a - top).sum(axis=1, keepdims=True)))[:, 0]


def gmm_fit(X, k: int, seed: int = 0, max_iter: int = 300, tol: float = 1e-4,
            cov_floor: float = 1e-6, init: KMeansModel | None = None) -> GmmModel:
    """EM for a diagonal Gaussian mixture, started from a K-Means solution.

    ``tol`` applies to the change in mean per-sample log-likelihood.
    Variances are clipped from below at ``cov_floor``.  ``init`` reuses an
    already fitted K-Means model with the same ``k``.
    """
    X = _check_X(X)
    n, d = X.shape
    if k > n:
        raise DataError(f"k={k} exceeds the number of points ({n})")
    km = init if init is not None and init.k == k else kmeans_fit(X, k, seed, max_iter, tol)
    labels, _ = kmeans_assign(km, X)
    resp = np.zeros((n, k))
    resp[np.arange(n), labels] = 1.0
    weights, means, variances = _m_step(X, resp, cov_floor)
    trace: list[float] = []
    for _ in range(max_iter):
        lj = _log_joint(X, weights, means, variances)
        lse = _logsumexp_rows(lj)
        ll = float(lse.mean())
        trace.append(ll)
        resp = np.exp(lj - lse[:, None])
        weights, means, variances = _m_step(X, resp, cov_floor)
        if len(trace) > 1 and trace[-1] - trace[-2] < tol:
            break
    return GmmModel(weights, means, variances, cov_floor, trace)


def _m_step(X, resp, cov_floor):
    nk = resp.sum(axis=0) + 10 * np.finfo(float).eps
    weights = nk / nk.sum()
    means = (resp.T @ X) / nk[:, None]
    variances = np.empty_like(means)
    for j in range(len(nk)):
        diff = X - means[j]
        variances[j] = (resp[:, j] @ (diff * diff)) / nk[j]
    return weights, means, np.maximum(variances, cov_floor)


def gmm_responsibilities(m: GmmModel, X) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != m.means.shape[1]:
        raise DataError("dimension mismatch between data and mixture")
    lj = _log_joint(X, m.weights, m.means, m.variances)
    return np.exp(lj - _logsumexp_rows(lj)[:, None])


def gmm_log_likelihood(m: GmmModel, X) -> float:
    X = np.asarray(X, dtype=np.float64)
    return float(_logsumexp_rows(_log_joint(X, m.weights, m.means, m.variances)).mean())


# ---------------------------------------------------------------- embedding

@dataclass
class SfeConfig:
    k_kmeans: int = 0  # 0: use the number of target classes
    k_gmm: int = 0
    embed_mode: str = "hard"
    seed: int = 0
    max_iter: int = 300
    tol: float = 1e-4
    cov_floor: float = 1e-6

    def __post_init__(self):
        if self.embed_mode not in EMBED_MODES:
            raise ConfigError(f"embed_mode must be one of {EMBED_MODES}")
        if self.tol <= 0:
            raise ConfigError("tol must be positive")
        if self.k_kmeans < 0 or self.k_gmm < 0:
            raise ConfigError("cluster counts must be >= 1 (or 0 for the class count)")

    def resolved(self, n_classes: int) -> "SfeConfig":
        return SfeConfig(self.k_kmeans or n_classes, self.k_gmm or n_classes,
                         self.embed_mode, self.seed, self.max_iter, self.tol,
                         self.cov_floor)


@dataclass
class SfeModels:
    kmeans: KMeansModel
    gmm: GmmModel
    embed_mode: str
    meta_scaler: ScalerParams | None = None

    @property
    def d_in(self) -> int:
        return self.kmeans.centroids.shape[1]

    @property
    def n_meta(self) -> int:
        hard = 2
        soft = self.kmeans.k + self.gmm.k
        return {"hard": hard, "soft": soft, "both": hard + soft}[self.embed_mode]

    def to_dict(self) -> dict:
        return {"kmeans": self.kmeans.to_dict(), "gmm": self.gmm.to_dict(),
                "embed_mode": self.embed_mode,
                "meta_scaler": self.meta_scaler.to_dict()}

    @classmethod
    def from_dict(cls, data: dict) -> "SfeModels":
        return cls(KMeansModel.from_dict(data["kmeans"]), GmmModel.from_dict(data["gmm"]),
                   data["embed_mode"], ScalerParams.from_dict(data["meta_scaler"]))


def _meta_features(models: SfeModels, X: np.ndarray, mode: str) -> np.ndarray:
    km_labels, km_dist = kmeans_assign(models.kmeans, X)
    resp = gmm_responsibilities(models.gmm, X)
    cols = []
    if mode in ("hard", "both"):
        cols.append(km_labels[:, None].astype(np.float64))
        cols.append(np.argmax(resp, axis=1)[:, None].astype(np.float64))
    if mode in ("soft", "both"):
        cols.append(-km_dist)
        cols.append(resp)
    return np.hstack(cols)


def sfe_fit(X, cfg: SfeConfig) -> SfeModels:
    if cfg.k_kmeans < 1 or cfg.k_gmm < 1:
        raise ConfigError("resolve cluster counts before fitting (SfeConfig.resolved)")
    X = _check_X(X)
    km = kmeans_fit(X, cfg.k_kmeans, cfg.seed, cfg.max_iter, cfg.tol)
    gmm = gmm_fit(X, cfg.k_gmm, cfg.seed, cfg.max_iter, cfg.tol, cfg.cov_floor, init=km)
    models = SfeModels(km, gmm, cfg.embed_mode)
    models.meta_scaler = fit_scaler(_meta_features(models, X, cfg.embed_mode))
    return models


def sfe_embed(models: SfeModels, X, embed_mode: str | None = None) -> np.ndarray:
    """Original columns followed by the standardized meta-features."""
    mode = embed_mode or models.embed_mode
    if mode != models.embed_mode:
        raise ConfigError(f"models were fit for embed_mode={models.embed_mode!r}")
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != models.d_in:
        raise DataError(f"SFE expects {models.d_in} columns, got {X.shape[-1]}")
    meta = apply_scaler(models.meta_scaler, _meta_features(models, X, mode))
    return np.hstack([X, meta])
