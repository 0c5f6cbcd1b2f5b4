"""Command-line entry point: prep, train, eval, predict, synth."""
from __future__ import annotations

import argparse
import logging
import os
import sys
import time
from pathlib import Path

import numpy as np
import pandas as pd

from . import __version__
from .errors import ConfigError, DataError, IdsError
from .evaluation import cross_validate
from .ingest import (clean, load_csv, load_profile, read_clean_csv, stratified_subsample,
                     subset, write_clean_csv)
from .models import MODEL_KINDS, BACKEND, fit_model, predict_proba
from .models.serialize import dumps, load_model, save_model
from .pipeline import FittedTransformChain, PipelineConfig, fit_transforms, load_config
from .synth import BlobSpec, write_blobs
from .transform import decode_labels, encode_labels, fit_label_encoder

log = logging.getLogger("sfe_ids")

LOG_LEVELS = {"error": logging.ERROR, "warn": logging.WARNING, "warning": logging.WARNING,
              "info": logging.INFO, "debug": logging.DEBUG}


def _setup_logging() -> None:
    level = LOG_LEVELS.get(os.environ.get("IDS_LOG", "warn").lower(), logging.WARNING)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s",
                        stream=sys.stderr)


def _write_json(path: Path, obj: dict) -> None:
    path.write_text(dumps(obj) + "\n", encoding="utf-8")


def _config_from_args(args) -> PipelineConfig:
    cfg = load_config(args.config)
    changes = {}
    if getattr(args, "seed", None) is not None:
        changes["seed"] = args.seed
    if getattr(args, "leakage", None):
        changes["leakage"] = args.leakage
    if getattr(args, "model", None) and args.model != cfg.model:
        changes["model"] = args.model
        changes["model_params"] = {}
    return cfg.replace(**changes) if changes else cfg


def _threads(args) -> int:
    return args.threads if args.threads else (os.cpu_count() or 1)


def _load_table(path, cfg: PipelineConfig):
    profile = load_profile(cfg.profile)
    table = read_clean_csv(path, profile.target_column)
    if cfg.sample_rows and cfg.sample_rows < table.n_rows:
        table = subset(table, stratified_subsample(table.label_column, cfg.sample_rows, cfg.seed))
    return profile, table


# -- commands -----------------------------------------------------------------

def cmd_prep(args) -> int:
    cfg = _config_from_args(args)
    profile = load_profile(args.profile or cfg.profile)
    table = clean(load_csv(args.input), profile)
    if cfg.sample_rows and cfg.sample_rows < table.n_rows:
        rows = stratified_subsample(table.label_column, cfg.sample_rows, cfg.seed)
        table = subset(table, rows)
        table.provenance["sampled_rows"] = int(len(rows))
    out = Path(args.out)
    write_clean_csv(table, out)
    _write_json(out.with_name(out.name + ".provenance.json"), table.provenance)
    print(f"wrote {table.n_rows} rows x {table.features.shape[1]} features to {out}")
    return 0


def cmd_train(args) -> int:
    cfg = _config_from_args(args)
    profile, table = _load_table(args.input, cfg)
    label_map = fit_label_encoder(table.label_column)
    y = encode_labels(label_map, table.label_column)
    t0 = time.perf_counter()
    prep = fit_transforms(table.features, y, cfg, label_map, table.feature_names)
    prep.chain.fingerprint["target_column"] = profile.target_column
    t1 = time.perf_counter()
    model = fit_model(cfg.model, prep.X, prep.y, label_map.n_classes, cfg.model_params,
                      seed=cfg.seed, threads=_threads(args))
    t2 = time.perf_counter()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    prep.chain.save(out / "chain.json")
    save_model(model, list(label_map.code_to_class), out / "model.json")
    report = {"format": "sfe-ids-train-report", "schema_version": 1,
              "config": cfg.to_dict(), "stages": prep.chain.stage_names(),
              "reduction_ratio": prep.chain.reduction_ratio(),
              "n_rows": table.n_rows, "n_train_rows": int(len(prep.y)),
              "n_appended": prep.plan.n_appended if prep.plan else 0,
              "d_in": prep.chain.d_in, "d_out": prep.chain.d_out,
              "class_names": list(label_map.code_to_class)}
    _write_json(out / "train_report.json", report)
    _write_json(out / "train_timings.json",
                {"transforms_ms": (t1 - t0) * 1e3, "model_ms": (t2 - t1) * 1e3,
                 "backend": BACKEND})
    print(f"trained {cfg.model} on {len(prep.y)} rows; artifacts in {out}")
    return 0


def _summary_table(rows: list[tuple[str, dict]]) -> str:
    head = f"{'model':<6} {'accuracy':>9} {'precision':>10} {'recall':>8} {'f1':>8}  averaging"
    lines = [head, "-" * len(head)]
    for name, agg in rows:
        for avg in ("macro", "weighted"):
            m = agg[avg]
            lines.append(f"{name:<6} {agg['accuracy'] * 100:>8.2f}% {m['precision'] * 100:>9.2f}%"
                         f" {m['recall'] * 100:>7.2f}% {m['f1'] * 100:>7.2f}%  {avg}")
    return "\n".join(lines)


def cmd_eval(args) -> int:
    cfg = _config_from_args(args)
    _, table = _load_table(args.input, cfg)
    label_map = fit_label_encoder(table.label_column)
    y = encode_labels(label_map, table.label_column)
    report = cross_validate(table.features, y, cfg, label_map, table.feature_names,
                            threads=_threads(args))
    out = Path(args.out)
    _write_json(out, report.to_dict())
    timings = dict(report.timings, backend=BACKEND)
    _write_json(out.with_name(out.stem + ".timings.json"), timings)
    print(_summary_table([(cfg.model.upper(), report.aggregate)]))
    print(f"leakage mode: {cfg.leakage}; report written to {out}")
    for w in report.warnings:
        log.warning(w)
    return 0


def cmd_predict(args) -> int:
    chain = FittedTransformChain.load(args.chain)
    model, class_names = load_model(args.model_file)
    if class_names != list(chain.label_map.code_to_class):
        raise DataError("model and chain were trained with different class lists")
    if model.n_features != chain.d_out:
        raise DataError(f"model expects {model.n_features} inputs but the chain emits {chain.d_out}")
    raw = load_csv(args.input)
    names = [c.strip() for c in raw.column_names]
    target = chain.fingerprint.get("target_column")
    feature_cols = [c for c in names if c != target]
    chain.check_columns(feature_cols)
    X = np.empty((raw.row_count, len(feature_cols)), dtype=np.float32)
    for j, name in enumerate(chain.feature_names):
        col = raw.columns[names.index(name)]
        if raw.kind(raw.column_names[names.index(name)]) == "text":
            raise DataError(f"column {name!r} is not numeric")
        X[:, j] = col.astype(np.float32)
    if not np.isfinite(X).all():
        bad = int(np.flatnonzero(~np.isfinite(X).all(axis=1))[0])
        raise DataError(f"row {bad} has a missing or infinite value")
    proba = predict_proba(model, chain.apply(X))
    pred = decode_labels(chain.label_map, np.argmax(proba, axis=1))
    frame = pd.DataFrame({"row": np.arange(len(pred)), "predicted": pred})
    for c, name in enumerate(class_names):
        frame[f"p_{name}"] = proba[:, c]
    frame.to_csv(args.out, index=False, lineterminator="\n")
    print(f"wrote {len(pred)} predictions to {args.out}")
    return 0


def _parse_ratios(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(v) for v in text.replace(",", ":").split(":") if v.strip())
    except ValueError as exc:
        raise ConfigError(f"bad ratio list {text!r}") from exc


def cmd_synth(args) -> int:
    spec = BlobSpec(n_rows=args.rows, n_features=args.features, ratios=_parse_ratios(args.ratios),
                    separation=args.separation, cluster_std=args.cluster_std,
                    seed=args.seed if args.seed is not None else 0)
    counts = write_blobs(spec, args.out)
    print(f"wrote {spec.n_rows} rows to {args.out}: {counts}")
    return 0


# -- argument parsing -----------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="sfe-ids", description=__doc__)
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, need_input=True):
        sp.add_argument("--config", help="INI pipeline config")
        if need_input:
            sp.add_argument("--input", required=True, help="input CSV")
        sp.add_argument("--out", required=True)
        sp.add_argument("--seed", type=int)
        sp.add_argument("--threads", type=int, default=0,
                        help="worker threads (default: all cores); results do not depend on it")

    sp = sub.add_parser("prep", help="clean a raw benchmark CSV")
    common(sp)
    sp.add_argument("--profile", help="dataset profile name or path (overrides the config)")
    sp.set_defaults(func=cmd_prep)

    for name, func, text in (("train", cmd_train, "fit transforms and a model"),
                             ("eval", cmd_eval, "k-fold cross-validation report")):
        sp = sub.add_parser(name, help=text)
        common(sp)
        sp.add_argument("--leakage", choices=("faithful", "strict"))
        sp.add_argument("--model", choices=MODEL_KINDS)
        sp.set_defaults(func=func)

    sp = sub.add_parser("predict", help="apply a saved chain and model to a CSV")
    common(sp)
    sp.add_argument("--model-file", required=True)
    sp.add_argument("--chain", required=True)
    sp.set_defaults(func=cmd_predict)

    sp = sub.add_parser("synth", help="write a Gaussian-blob dataset")
    common(sp, need_input=False)
    sp.add_argument("--rows", type=int, default=5000)
    sp.add_argument("--features", type=int, default=20)
    sp.add_argument("--ratios", default="100:10:1", help="class ratios, e.g. 100:10:1")
    sp.add_argument("--separation", type=float, default=5.0,
                    help="distance between class centres (in cluster_std units when std=1)")
    sp.add_argument("--cluster-std", type=float, default=1.0)
    sp.set_defaults(func=cmd_synth)
    return p


def main(argv: list[str] | None = None) -> int:
    _setup_logging()
    args = build_parser().parse_args(argv)
    if getattr(args, "threads", 0) and args.threads < 0:
        print("error: --threads must be positive", file=sys.stderr)
        return ConfigError.exit_code
    try:
        return args.func(args)
    except IdsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except MemoryError:
        print("error: out of memory", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
