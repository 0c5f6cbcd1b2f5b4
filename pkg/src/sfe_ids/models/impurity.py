"""Node impurity measures."""
import numpy as np

from ..errors import DataError


def _probs(class_counts) -> np.ndarray:
    counts = np.asarray(class_counts, dtype=np.float64)
    if counts.ndim != 1 or (counts < 0).any():
        raise DataError("class counts must be a non-negative vector")
    total = counts.sum()
    if total <= 0:
        raise DataError("class counts sum to zero")
    return counts / total


def gini(class_counts) -> float:
    p = _probs(class_counts)
    return float(1.0 - (p * p).sum())


def entropy(class_counts) -> float:
    """Shannon entropy in bits; empty classes contribute nothing."""
    p = _probs(class_counts)
    p = p[p > 0]
    return float(-(p * np.log2(p)).sum()) + 0.0


def info_gain(parent_counts, children_counts) -> float:
    """Parent entropy minus the size-weighted entropy of the children."""
    parent = np.asarray(parent_counts, dtype=np.float64)
    total = parent.sum()
    if total <= 0:
        raise DataError("empty parent node")
    weighted = 0.0
    for child in children_counts:
        child = np.asarray(child, dtype=np.float64)
        size = child.sum()
        if size > 0:
            weighted += size / total * entropy(child)
    return entropy(parent) - weighted
