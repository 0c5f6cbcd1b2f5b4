import json
import os
import subprocess
import sys

import pandas as pd
import pytest

from sfe_ids.cli import main


@pytest.fixture
def blobs(tmp_path):
    raw = tmp_path / "raw.csv"
    assert main(["synth", "--out", str(raw), "--rows", "300", "--features", "6",
                 "--ratios", "5:3:2", "--separation", "6", "--seed", "1"]) == 0
    return raw


def test_prep_train_predict_round_trip(tmp_path, blobs, capsys):
    clean = tmp_path / "clean.csv"
    assert main(["prep", "--input", str(blobs), "--out", str(clean)]) == 0
    prov = json.loads((tmp_path / "clean.csv.provenance.json").read_text())
    assert prov["rows_out"] == 300
    ini = tmp_path / "plain.ini"
    ini.write_text("[oversample]\nenabled = false\n[sfe]\nenabled = false\n"
                   "[pca]\nenabled = false\n[model]\nkind = dt\n")
    art = tmp_path / "art"
    assert main(["train", "--config", str(ini), "--input", str(clean), "--out", str(art),
                 "--threads", "1"]) == 0
    report = json.loads((art / "train_report.json").read_text())
    assert report["stages"] == ["scaler"] and report["d_out"] == 6
    # reorder the columns; predict aligns them by name
    frame = pd.read_csv(clean)
    frame = frame[list(reversed(frame.columns))]
    shuffled = tmp_path / "shuffled.csv"
    frame.to_csv(shuffled, index=False)
    preds = tmp_path / "pred.csv"
    assert main(["predict", "--model-file", str(art / "model.json"), "--chain",
                 str(art / "chain.json"), "--input", str(shuffled), "--out", str(preds)]) == 0
    out = pd.read_csv(preds)
    assert list(out.columns) == ["row", "predicted", "p_class0", "p_class1", "p_class2"]
    # an unlimited tree memorizes its training rows
    assert (out["predicted"] == frame["label"]).all()


def test_eval_writes_report_and_sidecar(tmp_path, blobs, capsys):
    ini = tmp_path / "fast.ini"
    ini.write_text("[model]\nkind = rf\nn_trees = 5\n[cv]\nk = 3\n[pca]\nk = 4\n")
    out = tmp_path / "report.json"
    assert main(["eval", "--config", str(ini), "--input", str(blobs), "--out", str(out),
                 "--leakage", "strict", "--threads", "1"]) == 0
    rep = json.loads(out.read_text())
    assert rep["metadata"]["leakage_mode"] == "strict"
    assert len(rep["folds"]) == 3
    assert (tmp_path / "report.timings.json").exists()
    text = capsys.readouterr().out
    assert "macro" in text and "weighted" in text


def test_exit_codes(tmp_path, blobs):
    out = str(tmp_path / "x")
    assert main(["prep", "--input", str(tmp_path / "missing.csv"), "--out", out]) == 3
    bad = tmp_path / "bad.ini"
    bad.write_text("[nope]\na = 1\n")
    assert main(["eval", "--config", str(bad), "--input", str(blobs), "--out", out]) == 2
    assert main(["synth", "--out", out, "--ratios", "1"]) == 2
    assert main(["synth", "--out", out, "--ratios", "a:b"]) == 2
    assert main(["eval", "--input", str(blobs), "--out", out, "--threads", "-2"]) == 2
    with pytest.raises(SystemExit):
        main(["train"])


def test_predict_column_mismatch(tmp_path, blobs):
    art = tmp_path / "art"
    ini = tmp_path / "c.ini"
    ini.write_text("[model]\nkind = dt\n[pca]\nk = 3\n")
    assert main(["train", "--config", str(ini), "--input", str(blobs), "--out", str(art)]) == 0
    frame = pd.read_csv(blobs).drop(columns=["f02"])
    partial = tmp_path / "partial.csv"
    frame.to_csv(partial, index=False)
    code = main(["predict", "--model-file", str(art / "model.json"), "--chain",
                 str(art / "chain.json"), "--input", str(partial), "--out", str(tmp_path / "p")])
    assert code == 3


def test_module_entry_point(tmp_path):
    env = dict(os.environ, IDS_LOG="error")
    res = subprocess.run([sys.executable, "-m", "sfe_ids", "--version"], capture_output=True,
                         text=True, env=env)
    assert res.returncode == 0 and "sfe-ids" in res.stdout
