import numpy as np
import pytest

from sfe_ids.errors import ConfigError, DataError
from sfe_ids.ingest import (DatasetProfile, class_histogram, clean, load_csv, load_profile,
                            read_clean_csv, split_xy, stratified_subsample, write_clean_csv)


def write(tmp_path, text, name="data.csv"):
    p = tmp_path / name
    p.write_text(text, encoding="utf-8")
    return p


PLAIN = DatasetProfile(name="t", target_column="label")


def test_load_csv_reads_header_and_rows(tmp_path):
    raw = load_csv(write(tmp_path, "a, b ,label\n1,2,x\n3,4,y\n5,6,x\n"))
    assert raw.row_count == 3
    assert [n.strip() for n in raw.column_names] == ["a", "b", "label"]
    assert raw.kind("a") == "integer"
    assert raw.kind("label") == "text"


def test_load_csv_parses_special_tokens(tmp_path):
    raw = load_csv(write(tmp_path, "a,b\ninf,1\n-INF,NaN\nInfinity,\n2.5,nan\n"))
    a = raw.column("a")
    assert a[0] == np.inf and a[1] == -np.inf and a[2] == np.inf and a[3] == 2.5
    assert np.isnan(raw.column("b")[1:]).all()


def test_load_csv_ragged_row_names_index(tmp_path):
    with pytest.raises(DataError, match="row 1"):
        load_csv(write(tmp_path, "a,b,c\n1,2,3\n4,5\n"))


def test_load_csv_missing_file(tmp_path):
    with pytest.raises(DataError):
        load_csv(tmp_path / "nope.csv")


def test_load_csv_without_header(tmp_path):
    raw = load_csv(write(tmp_path, "1,2\n3,4\n"), has_header=False)
    assert raw.row_count == 2 and len(raw.column_names) == 2


def test_clean_drops_nonfinite_rows(tmp_path):
    raw = load_csv(write(tmp_path, "a,b,label\n1,2,x\n-inf,3,y\n4,5,y\n"))
    t = clean(raw, PLAIN)
    assert t.n_rows == 2
    assert t.provenance["rows_dropped_nan_inf"] == 1
    assert np.isfinite(t.features).all()


def test_clean_keeps_first_duplicate(tmp_path):
    raw = load_csv(write(tmp_path, "a,b,label\n1,2,x\n3,4,y\n1,2,x\n1,2,y\n"))
    t = clean(raw, PLAIN)
    assert t.provenance["rows_dropped_duplicate"] == 1
    assert t.label_column == ["x", "y", "y"]
    assert t.features.tolist() == [[1, 2], [3, 4], [1, 2]]


def test_clean_trims_names_and_downcasts(tmp_path):
    raw = load_csv(write(tmp_path, " a , b ,label \n1.1,2,x\n"))
    t = clean(raw, PLAIN)
    assert t.feature_names == ["a", "b"]
    assert t.features.dtype == np.float32


def test_clean_merges_web_attacks():
    profile = load_profile("cic-ids2017")
    names = ["Web Attack – Brute Force", "Web Attack – XSS",
             "Web Attack – Sql Injection", "BENIGN"]
    from sfe_ids.ingest import RawTable
    raw = RawTable([" Destination Port", "Label"],
                   [np.arange(4, dtype=np.int64), np.array(names, dtype=object)], 4)
    t = clean(raw, profile)
    assert t.label_column == ["Web Attack"] * 3 + ["BENIGN"]
    assert sum(t.provenance["classes_merged"].values()) == 3


def test_clean_binary_profile_relabels():
    profile = load_profile("cic-ids2017-binary")
    assert profile.map_label("DDoS") == "ATTACK"
    assert profile.map_label("BENIGN") == "BENIGN"
    unsw = load_profile("unsw-nb15-binary")
    assert unsw.map_label("0") == "Normal" and unsw.map_label("1") == "Attack"


def test_clean_errors(tmp_path):
    raw = load_csv(write(tmp_path, "a,b\n1,2\n"))
    with pytest.raises(DataError, match="label"):
        clean(raw, PLAIN)
    raw = load_csv(write(tmp_path, "a,proto,label\n1,tcp,x\n", "t2.csv"))
    with pytest.raises(DataError, match="proto"):
        clean(raw, PLAIN)
    raw = load_csv(write(tmp_path, "a,label\ninf,x\n", "t3.csv"))
    with pytest.raises(DataError, match="zero rows|no rows"):
        clean(raw, PLAIN)


def test_clean_duplicate_columns(tmp_path):
    raw = load_csv(write(tmp_path, "a,a ,label\n1,2,x\n"))
    with pytest.raises(DataError, match="duplicate"):
        clean(raw, PLAIN)
    renaming = DatasetProfile(name="t", target_column="label", rename_duplicate_columns=True)
    t = clean(raw, renaming)
    assert t.feature_names == ["a", "a.1"]


def test_clean_drops_profile_columns(tmp_path):
    raw = load_csv(write(tmp_path, "id,proto,x,label\n1,tcp,0.5,n\n2,udp,0.7,n\n"))
    profile = DatasetProfile(name="t", target_column="label", drop_columns=["id", "proto"])
    t = clean(raw, profile)
    assert t.feature_names == ["x"]
    assert t.provenance["columns_dropped"] == ["id", "proto"]


def test_clean_idempotent_and_accounting(tmp_path):
    rng = np.random.default_rng(0)
    rows = ["a,b,label"]
    for i in range(200):
        a = rng.choice(["1", "2", "nan", "inf", "3.5"])
        rows.append(f"{a},{rng.integers(0, 3)},{rng.choice(['x', 'y'])}")
    raw = load_csv(write(tmp_path, "\n".join(rows) + "\n"))
    t = clean(raw, PLAIN)
    p = t.provenance
    assert t.n_rows + p["rows_dropped_nan_inf"] + p["rows_dropped_duplicate"] == 200
    out = tmp_path / "clean.csv"
    write_clean_csv(t, out)
    again = read_clean_csv(out, "label")
    assert again.features.tobytes() == t.features.tobytes()
    assert again.label_column == t.label_column
    assert again.provenance["rows_dropped_duplicate"] == 0


def test_downcast_within_single_precision(tmp_path):
    vals = [1.0 / 3, 123456.789, -2.5e-7, 6.02e23]
    raw = load_csv(write(tmp_path, "v,label\n" + "".join(f"{v!r},x{i}\n" for i, v in enumerate(vals))))
    t = clean(raw, PLAIN)
    for got, want in zip(t.features[:, 0].astype(np.float64), vals):
        assert abs(got - want) <= 2.0 ** -23 * abs(want)


def test_split_xy_preserves_order(tmp_path):
    raw = load_csv(write(tmp_path, "a,label,b,c\n1,x,2,3\n"))
    X, labels = split_xy(clean(raw, PLAIN))
    assert X.tolist() == [[1, 2, 3]] and labels == ["x"]


def test_class_histogram():
    assert list(class_histogram(["B", "A", "B", "A"]).items()) == [("A", 2), ("B", 2)]
    assert class_histogram(["z"] * 3) == {"z": 3}
    h = class_histogram(["n"] * 5 + ["g"] * 3 + ["w"])
    assert list(h) == ["n", "g", "w"] and sum(h.values()) == 9
    with pytest.raises(DataError):
        class_histogram([])


def test_stratified_subsample_keeps_every_class():
    labels = ["a"] * 900 + ["b"] * 95 + ["c"] * 5
    idx = stratified_subsample(labels, 100, seed=1)
    picked = [labels[i] for i in idx]
    assert picked.count("a") == 90 and picked.count("b") == 10 and picked.count("c") == 1
    assert list(idx) == sorted(idx)
    assert np.array_equal(idx, stratified_subsample(labels, 100, seed=1))


def test_profiles():
    for name in ("unsw-nb15", "unsw-nb15-binary", "cic-ids2017", "cic-ids2017-binary",
                 "cic-ids2018", "synthetic"):
        assert load_profile(name).target_column
    with pytest.raises(ConfigError):
        load_profile("no-such-profile")
    with pytest.raises(ConfigError, match="idempotent"):
        DatasetProfile(name="bad", target_column="y", merge_map={"a": "b", "b": "c"})


def test_profile_from_file(tmp_path):
    p = write(tmp_path, "[profile]\nname = mine\ntarget_column = cls\n[merge]\nx y = z\n",
              "p.ini")
    prof = load_profile(p)
    assert prof.name == "mine" and prof.merge_map == {"x y": "z"}
