"""Principal component analysis via the covariance matrix.

The input is centered, each feature rescaled to unit variance, the covariance
``C = X^T X / n`` formed, and its eigenpairs found with cyclic Jacobi
rotations.  The top-k eigenvectors, sorted by eigenvalue, form the projection.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DataError, InvariantError


def jacobi_eigh(A, tol: float = 1e-10, max_sweeps: int = 100) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues and eigenvectors of a symmetric matrix.

    Sweeps over all (p, q) pairs in row order until the off-diagonal
    Frobenius norm drops below ``tol * max(1, ||A||_F)``.  Returns
    ``(values, vectors)`` in the order they sit on the diagonal; columns of
    ``vectors`` are the eigenvectors.
    """
    A = np.array(A, dtype=np.float64)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DataError("jacobi_eigh needs a square matrix")
    if not np.allclose(A, A.T, rtol=0, atol=1e-12 * max(1.0, np.abs(A).max())):
        raise DataError("jacobi_eigh needs a symmetric matrix")
    A = 0.5 * (A + A.T)
    d = A.shape[0]
    V = np.eye(d)
    limit = tol * max(1.0, float(np.linalg.norm(A)))
    for _ in range(max_sweeps):
        off = float(np.linalg.norm(A - np.diag(np.diag(A))))
        if off < limit:
            return np.diag(A).copy(), V
        for p in range(d - 1):
            for q in range(p + 1, d):
                apq = A[p, q]
                if apq == 0.0:
                    continue
                theta = float(A[q, q] - A[p, p]) / (2.0 * float(apq))
                if abs(theta) > 1e150:
                    t = 0.5 / theta
                else:
                    t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                colp = A[:, p].copy()
                colq = A[:, q]
                A[:, p] = c * colp - s * colq
                A[:, q] = s * colp + c * colq
                rowp = A[p, :].copy()
                rowq = A[q, :]
                A[p, :] = c * rowp - s * rowq
                A[q, :] = s * rowp + c * rowq
                A[p, q] = A[q, p] = 0.0
                vp = V[:, p].copy()
                vq = V[:, q]
                V[:, p] = c * vp - s * vq
                V[:, q] = s * vp + c * vq
    raise InvariantError(f"Jacobi did not converge in {max_sweeps} sweeps")


@dataclass(frozen=True)
class PcaModel:
    mean: np.ndarray
    scale: np.ndarray
    components: np.ndarray  # (d_in, k_out), orthonormal columns
    eigenvalues: np.ndarray  # (k_out,), non-increasing
    total_variance: float

    @property
    def d_in(self) -> int:
        return self.components.shape[0]

    @property
    def k_out(self) -> int:
        return self.components.shape[1]

    def to_dict(self) -> dict:
        return {"mean": self.mean.tolist(), "scale": self.scale.tolist(),
                "components": self.components.tolist(),
                "eigenvalues": self.eigenvalues.tolist(),
                "total_variance": self.total_variance}

    @classmethod
    def from_dict(cls, data: dict) -> "PcaModel":
        arr = lambda key: np.asarray(data[key], dtype=np.float64)  # noqa: E731
        comps = arr("components")
        if comps.ndim == 1:
            comps = comps.reshape(-1, 1)
        return cls(arr("mean"), arr("scale"), comps, arr("eigenvalues"),
                   float(data["total_variance"]))


def _fix_signs(W: np.ndarray) -> np.ndarray:
    idx = np.argmax(np.abs(W), axis=0)
    signs = np.sign(W[idx, np.arange(W.shape[1])])
    signs[signs == 0] = 1.0
    return W * signs


def pca_fit(X, k: int) -> PcaModel:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise DataError("expected a 2-D feature matrix")
    n, d = X.shape
    if n < 2:
        raise DataError("PCA needs at least two rows")
    if not 1 <= k <= d:
        raise ConfigError(f"PCA k={k} must lie in [1, {d}]")
    mean = X.mean(axis=0)
    Xc = X - mean
    scale = np.sqrt((Xc * Xc).mean(axis=0))
    scale[scale == 0] = 1.0
    Xs = Xc / scale
    cov = (Xs.T @ Xs) / n
    cov = 0.5 * (cov + cov.T)
    values, vectors = jacobi_eigh(cov)
    order = np.argsort(-values, kind="stable")[:k]
    W = _fix_signs(vectors[:, order])
    return PcaModel(mean, scale, W, values[order], float(np.trace(cov)))


def pca_transform(m: PcaModel, X) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != m.d_in:
        raise DataError(f"PCA expects {m.d_in} columns, got {X.shape[-1]}")
    return ((X - m.mean) / m.scale) @ m.components


def explained_variance_ratio(m: PcaModel) -> np.ndarray:
    if m.total_variance <= 0:
        return np.zeros(m.k_out)
    return np.clip(m.eigenvalues / m.total_variance, 0.0, 1.0)


def reduction_ratio(m: PcaModel) -> float:
    return m.k_out / m.d_in
