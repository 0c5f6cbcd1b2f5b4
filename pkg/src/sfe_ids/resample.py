"""Random oversampling of minority classes up to the majority count."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _rng
from .errors import DataError


@dataclass
class ResamplePlan:
    seed: int
    per_class_target: dict[int, int]
    source_indices: np.ndarray = field(default_factory=lambda: np.empty(0, np.int64))

    @property
    def n_appended(self) -> int:
        return len(self.source_indices)

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "per_class_target": {str(k): v for k, v in self.per_class_target.items()},
            "n_appended": self.n_appended,
        }


def random_oversample(X, y, seed: int):
    """Balance classes by appending uniform with-replacement copies.

    The first ``len(y)`` rows of the output are the input rows in their
    original order.  Copies for class ``c`` are drawn from a stream keyed by
    ``(seed, c)`` and appended class by class in ascending code order.

    Returns ``(X_out, y_out, plan)``.
    """
    X = np.asarray(X)
    y = np.asarray(y)
    if len(y) == 0:
        raise DataError("cannot oversample an empty dataset")
    if X.shape[0] != len(y):
        raise DataError(f"X has {X.shape[0]} rows but y has {len(y)} labels")
    classes, counts = np.unique(y, return_counts=True)
    target = int(counts.max())
    sources = []
    for c, cnt in zip(classes, counts):
        need = target - int(cnt)
        if need == 0:
            continue
        members = np.flatnonzero(y == c)
        draw = _rng.stream(seed, _rng.RESAMPLE, int(c)).integers(0, cnt, size=need)
        sources.append(members[draw])
    src = np.concatenate(sources) if sources else np.empty(0, dtype=np.int64)
    src = src.astype(np.int64)
    plan = ResamplePlan(
        seed=int(seed),
        per_class_target={int(c): target for c in classes},
        source_indices=src,
    )
    if src.size == 0:
        return X.copy(), y.copy(), plan
    return np.concatenate([X, X[src]]), np.concatenate([y, y[src]]), plan
