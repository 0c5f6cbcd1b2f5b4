"""Gaussian-blob datasets with controllable class imbalance."""
from __future__ import annotations

from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np
import pandas as pd

from . import _rng
from .errors import ConfigError


@dataclass(frozen=True)
class BlobSpec:
    n_rows: int = 5000
    n_features: int = 20
    ratios: tuple[float, ...] = (100.0, 10.0, 1.0)
    separation: float = 5.0  # distance between every pair of class centres
    cluster_std: float = 1.0
    seed: int = 0
    label_column: str = "label"

    def __post_init__(self):
        if len(self.ratios) < 2:
            raise ConfigError("a synthetic dataset needs at least two classes")
        if any(r <= 0 for r in self.ratios):
            raise ConfigError("class ratios must be positive")
        if self.n_features < 1:
            raise ConfigError("n_features must be >= 1")
        if self.cluster_std <= 0 or self.separation < 0:
            raise ConfigError("cluster_std must be positive and separation non-negative")
        if len(self.ratios) > self.n_features + 1:
            raise ConfigError("equidistant centres need n_features >= n_classes - 1")
        if self.n_rows < len(self.ratios):
            raise ConfigError("n_rows must leave at least one row per class")

    def to_dict(self) -> dict:
        return asdict(self)


def class_counts(n_rows: int, ratios) -> np.ndarray:
    """Split ``n_rows`` by ``ratios`` with largest-remainder rounding (ties to the
    lower class index); every class keeps at least one row."""
    r = np.asarray(ratios, dtype=np.float64)
    exact = n_rows * r / r.sum()
    counts = np.floor(exact).astype(np.int64)
    counts = np.maximum(counts, 1)
    short = n_rows - counts.sum()
    if short > 0:
        order = np.argsort(-(exact - np.floor(exact)), kind="stable")
        counts[order[:short]] += 1
    elif short < 0:
        order = np.argsort(-counts, kind="stable")
        counts[order[:-short]] -= 1
    return counts


def class_names(n_classes: int) -> list[str]:
    return [f"class{c}" for c in range(n_classes)]


def simplex_centers(n_classes: int, d: int, separation: float, seed: int) -> np.ndarray:
    """Centres of a regular simplex (all pairwise distances equal ``separation``),
    centred on the origin and turned by a seeded random rotation."""
    if n_classes > d + 1:
        raise ConfigError("equidistant centres need d >= n_classes - 1")
    E = np.zeros((n_classes, max(d, n_classes)))
    E[:, :n_classes] = np.eye(n_classes) * (separation / np.sqrt(2.0))
    E -= E.mean(axis=0)
    # the centred simplex spans n_classes - 1 dimensions, so it fits in d
    basis, _ = np.linalg.qr(E.T)
    local = E @ basis[:, :n_classes - 1]
    q, r = np.linalg.qr(_rng.stream(seed, _rng.SYNTH, 0).normal(size=(d, d)))
    q *= np.sign(np.diag(r))
    return local @ q[:n_classes - 1]


def make_blobs(spec: BlobSpec) -> tuple[np.ndarray, np.ndarray]:
    """Features (n, d) and integer labels, rows shuffled."""
    C = len(spec.ratios)
    counts = class_counts(spec.n_rows, spec.ratios)
    centers = simplex_centers(C, spec.n_features, spec.separation, spec.seed)
    parts, labels = [], []
    for c in range(C):
        noise = _rng.stream(spec.seed, _rng.SYNTH, 1, c).normal(
            0.0, spec.cluster_std, size=(counts[c], spec.n_features))
        parts.append(centers[c] + noise)
        labels.append(np.full(counts[c], c, dtype=np.int64))
    X = np.vstack(parts)
    y = np.concatenate(labels)
    perm = _rng.stream(spec.seed, _rng.SYNTH, 2).permutation(len(y))
    return X[perm], y[perm]


def feature_names(d: int) -> list[str]:
    width = max(2, len(str(d - 1)))
    return [f"f{i:0{width}d}" for i in range(d)]


def write_blobs(spec: BlobSpec, path: str | Path) -> dict:
    """Write the dataset as CSV (features then label); returns the class counts."""
    X, y = make_blobs(spec)
    names = class_names(len(spec.ratios))
    df = pd.DataFrame(X, columns=feature_names(spec.n_features))
    df[spec.label_column] = [names[c] for c in y]
    df.to_csv(path, index=False, float_format="%.6f", lineterminator="\n")
    return {names[c]: int(n) for c, n in enumerate(np.bincount(y, minlength=len(names)))}
