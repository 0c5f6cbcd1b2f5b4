"""Locating and loading the public benchmark CSVs.

The files are not bundled.  Point ``SFE_IDS_DATA_DIR`` (or ``data_dir``) at a
directory holding them; subdirectories are searched.
"""
from __future__ import annotations

import logging
import os
from pathlib import Path

import numpy as np
import pandas as pd

from .errors import DataError
from .ingest import (CleanTable, DatasetProfile, clean, load_csv, load_profile,
                     stratified_subsample, subset)

log = logging.getLogger(__name__)

# glob patterns per dataset family
PATTERNS = {
    "unsw-nb15": ["UNSW_NB15_training-set.csv", "UNSW_NB15_testing-set.csv"],
    "cic-ids2017": ["*.pcap_ISCX.csv"],
}


def data_dir(explicit: str | Path | None = None) -> Path | None:
    value = explicit or os.environ.get("SFE_IDS_DATA_DIR")
    return Path(value) if value else None


def find_files(family: str, root: str | Path | None = None) -> list[Path]:
    """Benchmark CSVs for ``family`` under ``root``; empty when absent."""
    base = data_dir(root)
    if base is None or not base.is_dir():
        return []
    found: set[Path] = set()
    for pattern in PATTERNS[family]:
        found.update(p for p in base.rglob(pattern) if p.is_file())
    return sorted(found)


def concat_tables(tables: list[CleanTable]) -> CleanTable:
    """Stack cleaned tables and drop duplicates that span files (first kept)."""
    if not tables:
        raise DataError("no tables to concatenate")
    names = tables[0].feature_names
    for t in tables[1:]:
        if t.feature_names != names:
            raise DataError("benchmark files disagree on their columns")
    X = np.vstack([t.features for t in tables])
    labels = [lab for t in tables for lab in t.label_column]
    frame = pd.DataFrame(X.view(np.uint32))
    frame["__label"] = labels
    keep = ~frame.duplicated(keep="first").to_numpy()
    prov = {"files": [t.provenance for t in tables],
            "rows_dropped_cross_file_duplicate": int((~keep).sum()),
            "rows_out": int(keep.sum())}
    return CleanTable(list(tables[0].column_names), tables[0].target_column,
                      np.ascontiguousarray(X[keep]),
                      [lab for lab, k in zip(labels, keep) if k], prov)


def load_benchmark(files: list[Path], profile: DatasetProfile | str,
                   sample_rows: int | None = None, seed: int = 0) -> CleanTable:
    if isinstance(profile, str):
        profile = load_profile(profile)
    tables = []
    for f in files:
        log.info("loading %s", f)
        tables.append(clean(load_csv(f), profile))
    table = concat_tables(tables)
    if sample_rows and sample_rows < table.n_rows:
        table = subset(table, stratified_subsample(table.label_column, sample_rows, seed))
    return table
