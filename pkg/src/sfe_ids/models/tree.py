"""Decision trees stored as flat node arrays.

Node ``i`` is a split when ``feature[i] >= 0`` (rows with
``x[feature] <= threshold`` go to ``left[i]``) and a leaf otherwise.  For
classifiers ``value[i]`` holds the class counts that reached the node; for
boosting trees it holds the leaf weight.  Thresholds are float32 and trees
always route float32 copies of the input.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .. import _rng
from ..errors import ConfigError, DataError
from ._backend import get_kernels

CRITERIA = {"gini": 0, "entropy": 1}
SPLITTERS = ("best", "random")
_MIN_GAIN_REL = 1e-12


@dataclass(frozen=True)
class TreeParams:
    criterion: str = "gini"
    max_depth: int | None = None
    min_samples_split: int = 2
    min_samples_leaf: int = 1
    max_features: str | float | int = "all"  # all | sqrt | log2 | fraction | count
    splitter: str = "best"
    seed: int = 0

    def __post_init__(self):
        if self.criterion not in CRITERIA:
            raise ConfigError(f"criterion must be one of {sorted(CRITERIA)}")
        if self.splitter not in SPLITTERS:
            raise ConfigError(f"splitter must be one of {SPLITTERS}")
        if self.min_samples_split < 2:
            raise ConfigError("min_samples_split must be >= 2")
        if self.min_samples_leaf < 1:
            raise ConfigError("min_samples_leaf must be >= 1")
        if self.max_depth is not None and self.max_depth < 0:
            raise ConfigError("max_depth must be >= 0")
        if isinstance(self.max_features, str):
            if self.max_features not in ("all", "sqrt", "log2"):
                raise ConfigError(f"bad max_features {self.max_features!r}")
        elif isinstance(self.max_features, float) and not 0 < self.max_features <= 1:
            raise ConfigError("fractional max_features must lie in (0, 1]")

    def n_candidates(self, d: int) -> int:
        mf = self.max_features
        if mf == "all":
            m = d
        elif mf == "sqrt":
            m = int(math.sqrt(d))
        elif mf == "log2":
            m = int(math.log2(d)) if d > 1 else 1
        elif isinstance(mf, float):
            m = int(mf * d)
        else:
            m = int(mf)
        return min(d, max(1, m))

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class Tree:
    feature: np.ndarray  # int32, -1 at leaves
    threshold: np.ndarray  # float32
    left: np.ndarray  # int32
    right: np.ndarray  # int32
    value: np.ndarray  # float64 (n_nodes, C) counts, or (n_nodes, 1) weights
    gain: np.ndarray | None = field(default=None, repr=False)

    @property
    def n_nodes(self) -> int:
        return len(self.feature)

    @property
    def n_leaves(self) -> int:
        return int((self.feature < 0).sum())

    def depth(self) -> int:
        depth = np.zeros(self.n_nodes, dtype=int)
        for i in range(self.n_nodes):
            if self.feature[i] >= 0:
                depth[self.left[i]] = depth[self.right[i]] = depth[i] + 1
        return int(depth.max())

    def is_leaf(self, node: int) -> bool:
        return self.feature[node] < 0

    def probabilities(self, node: int) -> np.ndarray:
        counts = self.value[node]
        return counts / counts.sum()

    def prediction(self, node: int) -> int:
        return int(np.argmax(self.value[node]))

    def to_dict(self, counts: bool = True) -> dict:
        value = self.value.astype(np.int64).tolist() if counts else self.value[:, 0].tolist()
        return {
            "feature": self.feature.tolist(),
            "threshold": [float(t) for t in self.threshold],
            "left": self.left.tolist(),
            "right": self.right.tolist(),
            "value": value,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Tree":
        value = np.asarray(data["value"], dtype=np.float64)
        if value.ndim == 1:
            value = value[:, None]
        return cls(
            np.asarray(data["feature"], dtype=np.int32),
            np.asarray(data["threshold"], dtype=np.float32),
            np.asarray(data["left"], dtype=np.int32),
            np.asarray(data["right"], dtype=np.int32),
            value,
        )


class _Builder:
    """Growable node arrays."""

    def __init__(self, width: int):
        self.feature: list[int] = []
        self.threshold: list[float] = []
        self.left: list[int] = []
        self.right: list[int] = []
        self.value: list[np.ndarray] = []
        self.gain: list[float] = []
        self.width = width

    def add(self) -> int:
        self.feature.append(-1)
        self.threshold.append(0.0)
        self.left.append(-1)
        self.right.append(-1)
        self.value.append(np.zeros(self.width))
        self.gain.append(np.nan)
        return len(self.feature) - 1

    def finish(self) -> Tree:
        return Tree(
            np.asarray(self.feature, dtype=np.int32),
            np.asarray(self.threshold, dtype=np.float32),
            np.asarray(self.left, dtype=np.int32),
            np.asarray(self.right, dtype=np.int32),
            np.vstack(self.value),
            np.asarray(self.gain, dtype=np.float64),
        )


def as_float32(X) -> np.ndarray:
    X = np.asarray(X)
    if X.ndim != 2:
        raise DataError("expected a 2-D feature matrix")
    return np.ascontiguousarray(X, dtype=np.float32)


def xlogx_table(n: int) -> np.ndarray:
    i = np.arange(n + 1, dtype=np.float64)
    out = np.zeros(n + 1)
    out[1:] = i[1:] * np.log(i[1:])
    return out


def _check_xy(X, y):
    X32 = as_float32(X)
    y = np.ascontiguousarray(y, dtype=np.int32)
    if X32.shape[0] == 0:
        raise DataError("cannot fit a tree on empty data")
    if X32.shape[0] != len(y):
        raise DataError(f"X has {X32.shape[0]} rows but y has {len(y)} labels")
    if y.min() < 0:
        raise DataError("class codes must be non-negative")
    if not np.isfinite(X32).all():
        raise DataError("feature matrix contains non-finite values")
    return X32, y


def grow_classifier(X32: np.ndarray, y: np.ndarray, n_classes: int, params: TreeParams,
                    sample_idx: np.ndarray, rng: np.random.Generator | None,
                    backend: str | None = None) -> Tree:
    """Grow one classification tree over the rows ``sample_idx`` (may repeat)."""
    kern = get_kernels(backend)
    crit = CRITERIA[params.criterion]
    d = X32.shape[1]
    m = params.n_candidates(d)
    random_split = params.splitter == "random"
    if (m < d or random_split) and rng is None:
        raise ConfigError("a random stream is required for feature sampling or random cuts")
    xlogx = xlogx_table(len(sample_idx))
    all_features = np.arange(d, dtype=np.intp)
    b = _Builder(n_classes)
    stack = [(b.add(), np.ascontiguousarray(sample_idx, dtype=np.intp), 0)]
    while stack:
        node, idx, depth = stack.pop()
        counts = np.bincount(y[idx], minlength=n_classes).astype(np.float64)
        b.value[node] = counts
        n = len(idx)
        if (n < params.min_samples_split
                or (params.max_depth is not None and depth >= params.max_depth)
                or np.count_nonzero(counts) <= 1):
            continue
        icounts = counts.astype(np.int64)
        if crit == 0:
            parent = float((icounts * icounts).sum()) / n
        else:
            parent = float(xlogx[icounts].sum() - xlogx[n])
        if m >= d:
            chunks = [all_features]
        else:
            perm = rng.permutation(d)
            chunks = [np.sort(perm[s:s + m]).astype(np.intp) for s in range(0, d, m)]
        chosen = None
        fallback = None
        for feats in chunks:
            if random_split:
                u = rng.random(len(feats))
                f, t, score = kern.random_split_class(
                    X32, y, idx, feats, u, n_classes, crit, params.min_samples_leaf, xlogx)
            else:
                f, t, score = kern.best_split_class(
                    X32, y, idx, feats, n_classes, crit, params.min_samples_leaf, xlogx)
            if f < 0:
                continue
            gain = score - parent
            if gain > _MIN_GAIN_REL * max(1.0, abs(parent)):
                chosen = (f, t, gain)
                break
            if fallback is None:
                fallback = (f, t, gain)
        # a zero-gain split is still taken when nothing better exists (XOR-like nodes)
        chosen = chosen or fallback
        if chosen is None:
            continue
        f, t, gain = chosen
        t32 = np.float32(t)
        mask = X32[idx, f] <= t32
        left = b.add()
        right = b.add()
        b.feature[node] = int(f)
        b.threshold[node] = float(t32)
        b.left[node] = left
        b.right[node] = right
        b.gain[node] = gain / n if crit == 0 else gain / (n * math.log(2))
        stack.append((right, idx[~mask], depth + 1))
        stack.append((left, idx[mask], depth + 1))
    return b.finish()


def dt_fit(X, y, params: TreeParams | None = None, n_classes: int | None = None,
           backend: str | None = None) -> Tree:
    """Fit a single CART-style decision tree on all rows."""
    params = params or TreeParams()
    X32, y = _check_xy(X, y)
    C = n_classes or int(y.max()) + 1
    rng = _rng.stream(params.seed, _rng.TREE, 0)
    return grow_classifier(X32, y, C, params, np.arange(len(y), dtype=np.intp), rng, backend)


def apply(tree: Tree, X, backend: str | None = None) -> np.ndarray:
    X32 = as_float32(X)
    if tree.n_nodes and tree.feature.max() >= X32.shape[1]:
        raise DataError("input has fewer columns than the tree was trained on")
    return get_kernels(backend).apply_tree(X32, tree.feature, tree.threshold,
                                           tree.left, tree.right)


def tree_predict_proba(tree: Tree, X, n_features: int | None = None) -> np.ndarray:
    X32 = as_float32(X)
    if n_features is not None and X32.shape[1] != n_features:
        raise DataError(f"expected {n_features} features, got {X32.shape[1]}")
    counts = tree.value[apply(tree, X32)]
    return counts / counts.sum(axis=1, keepdims=True)


def tree_predict(tree: Tree, X, n_features: int | None = None) -> np.ndarray:
    return np.argmax(tree_predict_proba(tree, X, n_features), axis=1)
