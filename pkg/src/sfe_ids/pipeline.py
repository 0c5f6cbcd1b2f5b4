"""Pipeline configuration and the fitted transform chain.

Training order: standardize, oversample, cluster meta-features, PCA, model.
Oversampling only reshapes the training rows, so the persisted chain holds the
three stages that also apply at prediction time: scaler, SFE, PCA.
"""
from __future__ import annotations

import configparser
import hashlib
import json
import logging
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigError, DataError, InvariantError
from .models import DEFAULTS, MODEL_KINDS, resolve_params
from .pca import PcaModel, pca_fit, pca_transform, reduction_ratio
from .resample import ResamplePlan, random_oversample
from .sfe import SfeConfig, SfeModels, sfe_embed, sfe_fit
from .transform import LabelMap, ScalerParams, apply_scaler, fit_scaler

log = logging.getLogger(__name__)

CHAIN_FORMAT = "sfe-ids-chain"
CHAIN_SCHEMA_VERSION = 1
LEAKAGE_MODES = ("faithful", "strict")


@dataclass
class PipelineConfig:
    profile: str = "synthetic"
    seed: int = 0
    leakage: str = "faithful"
    oversample: bool = True
    sfe: bool = True
    sfe_config: SfeConfig = field(default_factory=SfeConfig)
    pca: bool = True
    pca_k: int = 10
    model: str = "rf"
    model_params: dict = field(default_factory=dict)
    cv_k: int = 10
    cv_stratified: bool = True
    sample_rows: int | None = None

    def __post_init__(self):
        if self.leakage not in LEAKAGE_MODES:
            raise ConfigError(f"leakage must be one of {LEAKAGE_MODES}")
        if self.model not in MODEL_KINDS:
            raise ConfigError(f"model must be one of {MODEL_KINDS}")
        resolve_params(self.model, self.model_params)
        if self.cv_k < 2:
            raise ConfigError("cv k must be >= 2")
        if self.pca and self.pca_k < 1:
            raise ConfigError("pca k must be >= 1")
        if self.sample_rows is not None and self.sample_rows < 1:
            raise ConfigError("sample rows must be >= 1")

    def with_seed(self, seed: int) -> "PipelineConfig":
        d = self._fields()
        d["seed"] = int(seed)
        return PipelineConfig(**d)

    def replace(self, **changes) -> "PipelineConfig":
        d = self._fields()
        d.update(changes)
        return PipelineConfig(**d)

    def _fields(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}

    def sfe_settings(self) -> SfeConfig:
        c = self.sfe_config
        return SfeConfig(c.k_kmeans, c.k_gmm, c.embed_mode, self.seed, c.max_iter, c.tol,
                         c.cov_floor)

    def to_dict(self) -> dict:
        """Every setting in effect, defaults included."""
        return {
            "profile": self.profile, "seed": self.seed, "leakage": self.leakage,
            "oversample": self.oversample,
            "sfe": {"enabled": self.sfe, **asdict(self.sfe_settings())},
            "pca": {"enabled": self.pca, "k": self.pca_k},
            "model": {"kind": self.model, **resolve_params(self.model, self.model_params)},
            "cv": {"k": self.cv_k, "stratified": self.cv_stratified},
            "sample_rows": self.sample_rows,
        }


def _parse_value(text: str):
    low = text.strip().lower()
    if low in ("none", "null", ""):
        return None
    if low in ("true", "yes", "on"):
        return True
    if low in ("false", "no", "off"):
        return False
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            pass
    return text.strip()


_KNOWN = {
    "pipeline": {"profile", "seed", "leakage"},
    "oversample": {"enabled"},
    "sfe": {"enabled", "k_kmeans", "k_gmm", "embed_mode", "max_iter", "tol", "cov_floor"},
    "pca": {"enabled", "k"},
    "cv": {"k", "stratified"},
    "sample": {"rows"},
}


def load_config(path: str | Path | None) -> PipelineConfig:
    """Read an INI config; missing keys keep their defaults."""
    if path is None:
        return PipelineConfig()
    cp = configparser.ConfigParser(interpolation=None)
    try:
        with open(path, encoding="utf-8") as fh:
            cp.read_file(fh)
    except (OSError, configparser.Error) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    for section in cp.sections():
        if section == "model":
            continue
        if section not in _KNOWN:
            raise ConfigError(f"unknown config section [{section}]")
        extra = set(cp[section]) - _KNOWN[section]
        if extra:
            raise ConfigError(f"unknown keys in [{section}]: {sorted(extra)}")
    get = lambda sec, key, default: (  # noqa: E731
        _parse_value(cp[sec][key]) if cp.has_option(sec, key) else default)
    defaults = PipelineConfig()
    sfe_default = defaults.sfe_config
    model_params = {}
    kind = defaults.model
    if cp.has_section("model"):
        for key, raw in cp["model"].items():
            if key == "kind":
                kind = raw.strip()
            else:
                model_params[key] = _parse_value(raw)
    try:
        return PipelineConfig(
            profile=str(get("pipeline", "profile", defaults.profile)),
            seed=int(get("pipeline", "seed", defaults.seed)),
            leakage=str(get("pipeline", "leakage", defaults.leakage)),
            oversample=bool(get("oversample", "enabled", True)),
            sfe=bool(get("sfe", "enabled", True)),
            sfe_config=SfeConfig(
                k_kmeans=int(get("sfe", "k_kmeans", sfe_default.k_kmeans)),
                k_gmm=int(get("sfe", "k_gmm", sfe_default.k_gmm)),
                embed_mode=str(get("sfe", "embed_mode", sfe_default.embed_mode)),
                max_iter=int(get("sfe", "max_iter", sfe_default.max_iter)),
                tol=float(get("sfe", "tol", sfe_default.tol)),
                cov_floor=float(get("sfe", "cov_floor", sfe_default.cov_floor)),
            ),
            pca=bool(get("pca", "enabled", True)),
            pca_k=int(get("pca", "k", defaults.pca_k)),
            model=kind,
            model_params=model_params,
            cv_k=int(get("cv", "k", defaults.cv_k)),
            cv_stratified=bool(get("cv", "stratified", True)),
            sample_rows=get("sample", "rows", None),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad value in {path}: {exc}") from exc


def data_fingerprint(X: np.ndarray, feature_names: list[str]) -> dict:
    X32 = np.ascontiguousarray(X, dtype=np.float32)
    h = hashlib.sha256()
    h.update(np.asarray(X32.shape, dtype=np.int64).tobytes())
    h.update(X32.tobytes())
    return {"rows": int(X32.shape[0]), "columns": list(feature_names),
            "sha256": h.hexdigest()}


@dataclass
class FittedTransformChain:
    feature_names: list[str]
    scaler: ScalerParams
    sfe: SfeModels | None
    pca: PcaModel | None
    label_map: LabelMap
    fingerprint: dict

    @property
    def d_in(self) -> int:
        return self.scaler.d

    @property
    def d_out(self) -> int:
        if self.pca is not None:
            return self.pca.k_out
        if self.sfe is not None:
            return self.sfe.d_in + self.sfe.n_meta
        return self.scaler.d

    def stage_names(self) -> list[str]:
        return ["scaler"] + (["sfe"] if self.sfe else []) + (["pca"] if self.pca else [])

    def validate(self) -> None:
        width = self.scaler.d
        if len(self.feature_names) != width:
            raise InvariantError("chain column names do not match the scaler width")
        if self.sfe is not None:
            if self.sfe.d_in != width:
                raise InvariantError(f"SFE expects {self.sfe.d_in} columns, scaler gives {width}")
            width += self.sfe.n_meta
        if self.pca is not None and self.pca.d_in != width:
            raise InvariantError(f"PCA expects {self.pca.d_in} columns, previous stage gives {width}")

    def check_columns(self, names: list[str]) -> None:
        missing = [c for c in self.feature_names if c not in names]
        extra = [c for c in names if c not in self.feature_names]
        if missing or extra:
            raise DataError(f"column mismatch: missing {missing}, extra {extra}")

    def apply(self, X) -> np.ndarray:
        X = np.asarray(X)
        if X.ndim != 2 or X.shape[1] != self.d_in:
            raise DataError(f"chain expects {self.d_in} columns, got {X.shape[-1]}")
        Z = apply_scaler(self.scaler, X)
        if self.sfe is not None:
            Z = sfe_embed(self.sfe, Z)
        if self.pca is not None:
            Z = pca_transform(self.pca, Z)
        return Z

    def reduction_ratio(self) -> float | None:
        return reduction_ratio(self.pca) if self.pca is not None else None

    def to_dict(self) -> dict:
        stages = [{"stage": "scaler", **self.scaler.to_dict()}]
        if self.sfe is not None:
            stages.append({"stage": "sfe", **self.sfe.to_dict()})
        if self.pca is not None:
            stages.append({"stage": "pca", **self.pca.to_dict()})
        return {"format": CHAIN_FORMAT, "schema_version": CHAIN_SCHEMA_VERSION,
                "feature_names": self.feature_names, "fingerprint": self.fingerprint,
                "label_map": self.label_map.to_dict(), "stages": stages}

    @classmethod
    def from_dict(cls, data: dict) -> "FittedTransformChain":
        if data.get("format") != CHAIN_FORMAT:
            raise DataError(f"not a chain file (format {data.get('format')!r})")
        if data.get("schema_version") != CHAIN_SCHEMA_VERSION:
            raise DataError(f"unsupported chain schema version {data.get('schema_version')!r}")
        stages = {s["stage"]: s for s in data["stages"]}
        chain = cls(
            list(data["feature_names"]),
            ScalerParams.from_dict(stages["scaler"]),
            SfeModels.from_dict(stages["sfe"]) if "sfe" in stages else None,
            PcaModel.from_dict(stages["pca"]) if "pca" in stages else None,
            LabelMap.from_dict(data["label_map"]),
            data["fingerprint"],
        )
        chain.validate()
        return chain

    def save(self, path) -> None:
        text = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"), allow_nan=False)
        Path(path).write_text(text + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path) -> "FittedTransformChain":
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise DataError(f"cannot read chain file {path}: {exc}") from exc
        return cls.from_dict(data)


@dataclass
class PreparedTraining:
    """Output of fitting the transform stages on one training set."""
    chain: FittedTransformChain
    X: np.ndarray  # transformed training rows (oversampled when enabled)
    y: np.ndarray
    plan: ResamplePlan | None


def fit_transforms(X, y, cfg: PipelineConfig, label_map: LabelMap,
                   feature_names: list[str]) -> PreparedTraining:
    """Standardize, oversample, fit SFE and PCA on ``(X, y)``."""
    X = np.asarray(X)
    y = np.asarray(y)
    scaler = fit_scaler(X)
    Z = apply_scaler(scaler, X)
    plan = None
    if cfg.oversample:
        Z, y, plan = random_oversample(Z, y, cfg.seed)
        log.debug("oversampled %d rows", plan.n_appended)
    sfe_models = None
    if cfg.sfe:
        sfe_models = sfe_fit(Z, cfg.sfe_settings().resolved(label_map.n_classes))
        Z = sfe_embed(sfe_models, Z)
    pca_model = None
    if cfg.pca:
        if cfg.pca_k > Z.shape[1]:
            raise ConfigError(f"pca k={cfg.pca_k} exceeds the {Z.shape[1]} available columns")
        pca_model = pca_fit(Z, cfg.pca_k)
        Z = pca_transform(pca_model, Z)
    chain = FittedTransformChain(list(feature_names), scaler, sfe_models, pca_model,
                                 label_map, data_fingerprint(X, feature_names))
    chain.validate()
    return PreparedTraining(chain, Z, y, plan)


def config_defaults_doc() -> dict:
    """Model hyperparameter defaults, echoed into reports."""
    return {k: dict(v) for k, v in DEFAULTS.items()}
