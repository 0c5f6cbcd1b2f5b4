"""CSV loading and the Step-1 cleaning rules.

Benchmark CSVs (UNSW-NB15, CIC-IDS2017/2018) are numeric apart from the label
and a handful of identifier columns.  Cleaning drops rows carrying missing or
infinite values, merges near-duplicate class names, removes exact duplicate
rows (first occurrence kept) and stores every feature as float32.
"""
from __future__ import annotations

import configparser
import csv
import logging
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np
import pandas as pd

from . import _rng
from .errors import ConfigError, DataError

log = logging.getLogger(__name__)

MISSING_TOKENS = frozenset({"", "nan"})
_CHUNK_ROWS = 200_000


@dataclass
class RawTable:
    column_names: list[str]
    columns: list[np.ndarray]  # float64, int64 or object (text)
    row_count: int

    def column(self, name: str) -> np.ndarray:
        return self.columns[self.column_names.index(name)]

    def kind(self, name: str) -> str:
        dt = self.column(name).dtype
        if dt == object:
            return "text"
        return "integer" if np.issubdtype(dt, np.integer) else "numeric"


@dataclass
class CleanTable:
    column_names: list[str]
    target_column: str
    features: np.ndarray  # (n, d) float32, label column excluded
    label_column: list[str]
    provenance: dict = field(default_factory=dict)

    @property
    def feature_names(self) -> list[str]:
        return [c for c in self.column_names if c != self.target_column]

    @property
    def n_rows(self) -> int:
        return self.features.shape[0]


@dataclass
class DatasetProfile:
    name: str
    target_column: str
    merge_map: dict[str, str] = field(default_factory=dict)
    expected_classes: list[str] | None = None
    drop_columns: list[str] = field(default_factory=list)
    # when set, every class except this one is relabelled ``positive_label``
    binary_negative: str | None = None
    positive_label: str = "Attack"
    # CIC-IDS2017 ships "Fwd Header Length" twice; later copies become "name.1", ...
    rename_duplicate_columns: bool = False

    def __post_init__(self):
        for merged in set(self.merge_map.values()):
            target = self.merge_map.get(merged, merged)
            if target != merged:
                raise ConfigError(
                    f"profile {self.name!r}: merge map is not idempotent "
                    f"({merged!r} -> {target!r})"
                )

    def map_label(self, label: str) -> str:
        label = self.merge_map.get(label, label)
        if self.binary_negative is not None:
            return label if label == self.binary_negative else self.positive_label
        return label


def _split_list(value: str) -> list[str]:
    return [v.strip() for v in value.replace("\n", ",").split(",") if v.strip()]


def load_profile(ref: str | Path) -> DatasetProfile:
    """Load a profile from a path, or by name from the bundled profiles."""
    parser = configparser.ConfigParser(delimiters=("=",), interpolation=None)
    parser.optionxform = str
    path = Path(ref)
    if path.is_file():
        parser.read(path, encoding="utf-8")
    else:
        name = str(ref).lower()
        bundled = resources.files("sfe_ids").joinpath("profiles", f"{name}.ini")
        if not bundled.is_file():
            raise ConfigError(f"unknown dataset profile {ref!r}")
        parser.read_string(bundled.read_text(encoding="utf-8"))
    if not parser.has_section("profile"):
        raise ConfigError(f"profile {ref!r} lacks a [profile] section")
    sec = parser["profile"]
    try:
        target = sec["target_column"].strip()
    except KeyError:
        raise ConfigError(f"profile {ref!r} lacks target_column") from None
    merge = dict(parser["merge"]) if parser.has_section("merge") else {}
    merge = {k.strip(): v.strip() for k, v in merge.items()}
    expected = sec.get("expected_classes")
    return DatasetProfile(
        name=sec.get("name", str(ref)).strip(),
        target_column=target,
        merge_map=merge,
        expected_classes=_split_list(expected) if expected else None,
        drop_columns=_split_list(sec.get("drop_columns", "")),
        binary_negative=(sec.get("binary_negative") or "").strip() or None,
        positive_label=sec.get("positive_label", "Attack").strip(),
        rename_duplicate_columns=sec.getboolean("rename_duplicate_columns", fallback=False),
    )


def _parse_column(values: list[str]) -> np.ndarray | None:
    """Numeric array for a list of cells, or None when any cell is text."""
    s = pd.Series(values, dtype=object).str.strip()
    missing = s.str.lower().isin(MISSING_TOKENS).to_numpy()
    num = pd.to_numeric(s.where(~missing, "nan"), errors="coerce")
    if (num.isna().to_numpy() & ~missing).any():
        return None
    return num.to_numpy()


def _as_text(arr: np.ndarray) -> np.ndarray:
    if arr.dtype == object:
        return arr
    if np.issubdtype(arr.dtype, np.integer):
        return np.array([str(v) for v in arr], dtype=object)
    return np.array(["" if np.isnan(v) else repr(float(v)) for v in arr], dtype=object)


def load_csv(path: str | Path, has_header: bool = True) -> RawTable:
    """Read an RFC 4180 CSV into typed columns.

    Numeric-looking columns become int64 (all integers, nothing missing) or
    float64; ``inf``/``Infinity`` parse as infinities and empty or ``NaN``
    cells become NaN.  Any other column is kept as text.  A row whose field
    count differs from the header raises :class:`DataError` naming the row
    (0-based, header excluded).
    """
    path = Path(path)
    try:
        fh = open(path, newline="", encoding="utf-8", errors="replace")
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    with fh:
        reader = csv.reader(fh)
        try:
            first = next(reader)
        except StopIteration:
            raise DataError(f"{path} is empty") from None
        if has_header:
            names, rows = list(first), []
        else:
            names, rows = [f"c{i}" for i in range(len(first))], [first]
        width = len(names)
        parts: list[list[np.ndarray]] = [[] for _ in range(width)]
        row_count = 0

        def flush(chunk):
            for i, rec in enumerate(chunk):
                if len(rec) != width:
                    raise DataError(
                        f"{path}: data row {row_count + i} has {len(rec)} "
                        f"fields, expected {width}"
                    )
            cols = list(zip(*chunk)) if chunk else [()] * width
            for j in range(width):
                arr = _parse_column(list(cols[j]))
                parts[j].append(
                    arr if arr is not None else np.array(cols[j], dtype=object)
                )

        for record in reader:
            rows.append(record)
            if len(rows) >= _CHUNK_ROWS:
                flush(rows)
                row_count += len(rows)
                rows = []
        if rows:
            flush(rows)
            row_count += len(rows)

    columns = []
    for chunks in parts:
        if not chunks:
            columns.append(np.empty(0, dtype=np.float64))
        elif any(c.dtype == object for c in chunks):
            columns.append(np.concatenate([_as_text(c) for c in chunks]))
        elif all(np.issubdtype(c.dtype, np.integer) for c in chunks):
            columns.append(np.concatenate(chunks).astype(np.int64))
        else:
            columns.append(np.concatenate([c.astype(np.float64) for c in chunks]))
    return RawTable(column_names=names, columns=columns, row_count=row_count)


def _label_strings(col: np.ndarray) -> np.ndarray:
    if col.dtype == object:
        return np.array([str(v).strip() for v in col], dtype=object)
    # numeric labels (e.g. the 0/1 "label" column of UNSW-NB15)
    out = np.empty(len(col), dtype=object)
    for i, v in enumerate(col):
        v = float(v)
        out[i] = "" if not np.isfinite(v) else (str(int(v)) if v.is_integer() else repr(v))
    return out


def _rename_duplicates(names: list[str]) -> tuple[list[str], dict[str, str]]:
    seen: dict[str, int] = {}
    out, renamed = [], {}
    taken = set(names)
    for n in names:
        if n in seen:
            k = seen[n]
            while f"{n}.{k}" in taken:
                k += 1
            new = f"{n}.{k}"
            seen[n] = k + 1
            taken.add(new)
            renamed[new] = n
            out.append(new)
        else:
            seen[n] = 1
            out.append(n)
    return out, renamed


def clean(raw: RawTable, profile: DatasetProfile) -> CleanTable:
    names = [n.strip() for n in raw.column_names]
    renamed = {}
    if profile.rename_duplicate_columns:
        names, renamed = _rename_duplicates(names)
    if len(set(names)) != len(names):
        dupes = sorted({n for n in names if names.count(n) > 1})
        raise DataError(f"duplicate column names after trimming: {dupes}")
    if profile.target_column not in names:
        raise DataError(f"target column {profile.target_column!r} not found")
    drop = set(profile.drop_columns) - {profile.target_column}
    keep = [i for i, n in enumerate(names) if n not in drop]
    target_idx = names.index(profile.target_column)
    feature_idx = [i for i in keep if i != target_idx]

    bad = [names[i] for i in feature_idx if raw.columns[i].dtype == object]
    if bad:
        raise DataError(f"non-numeric feature columns: {bad}")
    if not feature_idx:
        raise DataError("no feature columns left after dropping")

    n = raw.row_count
    X = np.empty((n, len(feature_idx)), dtype=np.float64)
    for out_j, j in enumerate(feature_idx):
        X[:, out_j] = raw.columns[j]
    labels = _label_strings(raw.columns[target_idx])

    with np.errstate(over="ignore", invalid="ignore"):
        X32 = X.astype(np.float32)
    # values beyond float32 range become inf on downcast and go with the rest
    finite = np.isfinite(X32).all(axis=1) & (labels != "")
    rows_dropped_nan_inf = int(n - finite.sum())
    X32 = X32[finite]
    labels = labels[finite]

    merged_counts: dict[str, int] = {}
    mapped = np.empty(len(labels), dtype=object)
    for i, lab in enumerate(labels):
        new = profile.map_label(lab)
        if new != lab:
            key = f"{lab} -> {new}"
            merged_counts[key] = merged_counts.get(key, 0) + 1
        mapped[i] = new

    frame = pd.DataFrame(X32.view(np.uint32))
    frame["__label"] = mapped
    dup = frame.duplicated(keep="first").to_numpy()
    rows_dropped_duplicate = int(dup.sum())
    X32 = np.ascontiguousarray(X32[~dup])
    mapped = mapped[~dup]
    if X32.shape[0] == 0:
        raise DataError("no rows survive cleaning")

    column_names = [names[i] for i in keep]
    provenance = {
        "profile": profile.name,
        "rows_in": n,
        "rows_out": int(X32.shape[0]),
        "rows_dropped_nan_inf": rows_dropped_nan_inf,
        "rows_dropped_duplicate": rows_dropped_duplicate,
        "columns_dropped": sorted(drop & set(names)),
        "classes_merged": dict(sorted(merged_counts.items())),
    }
    if renamed:
        provenance["columns_renamed"] = renamed
    return CleanTable(
        column_names=column_names,
        target_column=profile.target_column,
        features=X32,
        label_column=list(mapped),
        provenance=provenance,
    )


def split_xy(table: CleanTable) -> tuple[np.ndarray, list[str]]:
    if table.features.shape[1] < 1:
        raise DataError("table has no feature columns")
    return table.features, list(table.label_column)


def class_histogram(labels) -> dict[str, int]:
    """Class counts, largest first; equal counts ordered by name."""
    if len(labels) == 0:
        raise DataError("empty label list")
    counts: dict[str, int] = {}
    for lab in labels:
        counts[lab] = counts.get(lab, 0) + 1
    return dict(sorted(counts.items(), key=lambda kv: (-kv[1], kv[0])))


def stratified_subsample(labels, n_rows: int, seed: int) -> np.ndarray:
    """Row indices of a class-proportional sample of ``n_rows`` rows.

    Every class keeps at least one row.  Returned indices are sorted so the
    sample preserves file order.
    """
    labels = np.asarray(labels, dtype=object)
    n = len(labels)
    if n_rows >= n:
        return np.arange(n)
    hist = class_histogram(list(labels))
    quotas = {c: max(1, int(round(cnt * n_rows / n))) for c, cnt in hist.items()}
    rng = _rng.stream(seed, _rng.SAMPLE)
    picked = []
    for c in hist:
        idx = np.flatnonzero(labels == c)
        take = min(quotas[c], len(idx))
        picked.append(rng.choice(idx, size=take, replace=False))
    return np.sort(np.concatenate(picked))


def subset(table: CleanTable, rows: np.ndarray) -> CleanTable:
    return CleanTable(
        column_names=list(table.column_names),
        target_column=table.target_column,
        features=np.ascontiguousarray(table.features[rows]),
        label_column=[table.label_column[i] for i in rows],
        provenance=dict(table.provenance, rows_out=int(len(rows))),
    )


def write_clean_csv(table: CleanTable, path: str | Path) -> None:
    """Write features (float32, shortest round-trip form) plus the label column."""
    frame = pd.DataFrame(table.features, columns=table.feature_names)
    frame[table.target_column] = table.label_column
    frame.to_csv(path, index=False, lineterminator="\n")


def read_clean_csv(path: str | Path, target_column: str) -> CleanTable:
    """Load a file previously written by :func:`write_clean_csv`."""
    raw = load_csv(path)
    profile = DatasetProfile(name=Path(path).stem, target_column=target_column)
    table = clean(raw, profile)
    return table
