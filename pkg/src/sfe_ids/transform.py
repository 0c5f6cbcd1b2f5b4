"""Z-score standardization and frequency-ordered label encoding."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataError
from .ingest import class_histogram


@dataclass(frozen=True)
class ScalerParams:
    means: np.ndarray
    stds: np.ndarray  # population std (divide by n)

    @property
    def d(self) -> int:
        return len(self.means)

    def to_dict(self) -> dict:
        return {"means": self.means.tolist(), "stds": self.stds.tolist()}

    @classmethod
    def from_dict(cls, data: dict) -> "ScalerParams":
        return cls(np.asarray(data["means"], dtype=np.float64),
                   np.asarray(data["stds"], dtype=np.float64))


def fit_scaler(X) -> ScalerParams:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] == 0:
        raise DataError("cannot fit a scaler on an empty matrix")
    means = X.mean(axis=0)
    stds = np.sqrt(((X - means) ** 2).mean(axis=0))
    return ScalerParams(means, stds)


def apply_scaler(p: ScalerParams, X) -> np.ndarray:
    """(X - mean) / std per column; columns with std 0 become all zeros."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != p.d:
        raise DataError(f"scaler expects {p.d} columns, got {X.shape[-1]}")
    safe = np.where(p.stds > 0, p.stds, 1.0)
    out = (X - p.means) / safe
    out[:, p.stds == 0] = 0.0
    return out


@dataclass(frozen=True)
class LabelMap:
    code_to_class: tuple[str, ...]

    @property
    def class_to_code(self) -> dict[str, int]:
        return {c: i for i, c in enumerate(self.code_to_class)}

    @property
    def n_classes(self) -> int:
        return len(self.code_to_class)

    def to_dict(self) -> dict:
        return {"classes": list(self.code_to_class)}

    @classmethod
    def from_dict(cls, data: dict) -> "LabelMap":
        return cls(tuple(data["classes"]))


def fit_label_encoder(labels) -> LabelMap:
    """Codes 0..C-1 by descending class frequency, ties by name."""
    return LabelMap(tuple(class_histogram(list(labels))))


def encode_labels(m: LabelMap, labels) -> np.ndarray:
    lookup = m.class_to_code
    out = np.empty(len(labels), dtype=np.int32)
    for i, lab in enumerate(labels):
        try:
            out[i] = lookup[lab]
        except KeyError:
            raise DataError(f"label {lab!r} was not seen when the encoder was fit") from None
    return out


def decode_labels(m: LabelMap, codes) -> list[str]:
    codes = np.asarray(codes)
    if codes.size and (codes.min() < 0 or codes.max() >= m.n_classes):
        raise DataError(f"label code out of range [0, {m.n_classes - 1}]")
    return [m.code_to_class[int(c)] for c in codes]
