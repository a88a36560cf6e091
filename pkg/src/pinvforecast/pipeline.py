"""Two-phase workflow: fit a model on a training span, then forecast.

Configuration precedence is command-line flags, then a JSON config file,
then the defaults on :class:`RunConfig`. Every summary written here echoes the
fully resolved configuration.
"""

from __future__ import annotations

import dataclasses
import json
import logging
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .design import Scaling, build_design_matrix, enumerate_monomials, total_coefficients
from .embedding import EmbeddingConfig, FNNResult, Series, delay_embed, fnn_dimension
from .errors import ConfigError, DataError, UsageError
from .forecast import ForecastConfig, ForecastResult, horizon_bound, predict
from .generators import MackeyGlassConfig, ecg_surrogate, mackey_glass
from .inference import DEFAULT_SVD_TOL, FittedModel, fisher_diagnostics, fit_coefficients
from .ingest import SignalFile, read_signal, write_json, write_result, write_rolling_mse, write_series

log = logging.getLogger(__name__)

MODEL_SCHEMA = "pinvforecast.model/1"
OUTPUT_ENV = "PINVFORECAST_OUTPUT_DIR"


@dataclass
class RunConfig:
    input: str | None = None
    rate_hz: float | None = None
    channel: int | str | None = None
    d: int | str = "auto"
    lag: int = 1
    np: int = 3
    M: int | None = None
    T: int = 1
    mode: str = "direct"
    m_p: int | None = None
    svd_tol: float = DEFAULT_SVD_TOL
    standardize: bool = False
    eps: float | None = None
    c_weight: float = 1.0
    window: int | None = None
    precision: int = 9
    out_dir: str | None = None
    seed: int = 0
    d_max: int = 10
    r_tol: float = 15.0
    a_tol: float = 2.0
    fnn_threshold: float = 0.01

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


CONFIG_KEYS = frozenset(f.name for f in dataclasses.fields(RunConfig))


def resolve_config(file_values: dict | None = None, flag_values: dict | None = None) -> RunConfig:
    """Merge config-file and flag values over the defaults; ``None`` flags do not override."""
    merged: dict = {}
    for source, values in (("config file", file_values or {}), ("flags", flag_values or {})):
        unknown = set(values) - CONFIG_KEYS
        if unknown:
            raise ConfigError(f"unknown {source} keys: {sorted(unknown)}")
        merged.update({k: v for k, v in values.items() if v is not None})
    cfg = RunConfig(**merged)
    if isinstance(cfg.d, str):
        if cfg.d.isdigit():
            cfg.d = int(cfg.d)
        elif cfg.d != "auto":
            raise ConfigError(f"d must be a positive integer or 'auto', got {cfg.d!r}")
    if cfg.mode not in ("direct", "iterated"):
        raise ConfigError(f"mode must be 'direct' or 'iterated', got {cfg.mode!r}")
    return cfg


def read_config_file(path) -> dict:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"config file {path} must hold a JSON object")
    return data


def output_dir(cfg: RunConfig) -> Path:
    return Path(cfg.out_dir or os.environ.get(OUTPUT_ENV) or ".")


def load_input(cfg: RunConfig, fallback_rate_hz: float | None = None) -> Series:
    if not cfg.input:
        raise UsageError("no input signal file given")
    series, _ = read_signal(SignalFile(cfg.input, cfg.rate_hz, cfg.channel, fallback_rate_hz))
    return series


@dataclass
class FitOutcome:
    model: FittedModel
    dm: object
    diagnostics: object
    fnn: FNNResult | None = None
    config: dict = field(default_factory=dict)


def fit_series(series: Series, cfg: RunConfig) -> FitOutcome:
    """Embed, build the design matrix and fit; ``d='auto'`` runs the FNN scan first."""
    if cfg.M is None:
        raise UsageError("training size M is required")
    fnn = None
    d = cfg.d
    if d == "auto":
        fnn = fnn_dimension(series, cfg.d_max, cfg.lag, cfg.r_tol, cfg.a_tol, cfg.fnn_threshold)
        d = fnn.d
        log.info("FNN selected d=%d (saturated=%s)", d, fnn.saturated)
    emb = EmbeddingConfig(int(d), cfg.lag)
    basis = enumerate_monomials(emb.d, cfg.np)
    dm = build_design_matrix(delay_embed(series, emb), series, cfg.T, cfg.M, basis, cfg.standardize)
    model = fit_coefficients(dm, cfg.svd_tol)
    diag = fisher_diagnostics(dm, model, cfg.c_weight, cfg.eps)
    resolved = cfg.to_dict() | {"d": emb.d}
    return FitOutcome(model=model, dm=dm, diagnostics=diag, fnn=fnn, config=resolved)


def model_payload(outcome: FitOutcome, source: dict | None = None) -> dict:
    m = outcome.model
    diag = outcome.diagnostics
    return {
        "schema": MODEL_SCHEMA,
        "version": __version__,
        "embedding": {"d": m.embedding.d, "lag": m.embedding.lag},
        "degree": m.basis.degree,
        "n_coefficients": m.n_coefficients,
        "terms": [list(t) for t in m.basis.terms],
        "T": m.T,
        "a_mean": m.a_mean,
        "sigma2": m.sigma2,
        "rss": m.rss,
        "rank": m.rank,
        "svd_tol": m.svd_tol,
        "cutoff": m.cutoff,
        "n_train": m.n_train,
        "train_end": m.train_end,
        "scaling": None if m.scaling is None else {"mean": m.scaling.mean, "scale": m.scaling.scale},
        "diagnostics": {
            "w_rank": outcome.dm.sigma_meta.rank,
            "w_s_max": outcome.dm.sigma_meta.s_max,
            "w_s_min": outcome.dm.sigma_meta.s_min,
            "fim_condition": diag.fim_condition,
            "empirical_fim": diag.empirical_fim,
            "empirical_fim_eps": diag.eps,
            "guard_count": diag.guard_count,
            "c_weight": outcome.config.get("c_weight", 1.0),
        },
        "fnn": None if outcome.fnn is None else dataclasses.asdict(outcome.fnn),
        "config": outcome.config,
        "source": source or {},
    }


def save_model(outcome: FitOutcome, path, source: dict | None = None) -> Path:
    return write_json(path, model_payload(outcome, source))


def load_model(path) -> FittedModel:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise DataError(f"cannot read model file {path}: {exc}") from exc
    if data.get("schema") != MODEL_SCHEMA:
        raise ConfigError(f"{path}: unsupported model schema {data.get('schema')!r}, expected {MODEL_SCHEMA}")
    emb = EmbeddingConfig(data["embedding"]["d"], data["embedding"]["lag"])
    basis = enumerate_monomials(emb.d, data["degree"])
    if [list(t) for t in basis.terms] != data["terms"]:
        raise ConfigError(f"{path}: stored term list does not match the canonical ordering")
    a = np.array(data["a_mean"], dtype=np.float64)
    if a.size != total_coefficients(emb.d, data["degree"]):
        raise ConfigError(f"{path}: {a.size} coefficients stored, expected {len(basis)}")
    a.setflags(write=False)
    scaling = None
    if data.get("scaling"):
        scaling = Scaling(np.array(data["scaling"]["mean"]), np.array(data["scaling"]["scale"]))
    return FittedModel(
        a_mean=a,
        sigma2=float(data["sigma2"]),
        basis=basis,
        embedding=emb,
        T=int(data["T"]),
        rank=int(data["rank"]),
        svd_tol=float(data["svd_tol"]),
        cutoff=float(data["cutoff"]),
        n_train=int(data["n_train"]),
        train_end=int(data["train_end"]),
        rss=float(data["rss"]),
        scaling=scaling,
    )


def forecast_summary(series: Series, model: FittedModel, result: ForecastResult) -> dict:
    """Scores normalized by the series variance, over all points and over post-training points."""
    var = float(np.var(series.values))
    truth, pred = result.scored()
    idx = result.target_indices[np.isfinite(result.aligned_truth)]
    new = idx >= model.train_end
    mse_new = float(np.mean((truth[new] - pred[new]) ** 2)) if new.any() else float("nan")
    return {
        "series": {"name": series.name, "n_samples": len(series), "dt": series.dt, "variance": var},
        "model": {"n_coefficients": model.n_coefficients, "rank": model.rank, "sigma2": model.sigma2,
                  "T": model.T, "d": model.embedding.d, "lag": model.embedding.lag,
                  "degree": model.basis.degree, "n_train": model.n_train, "train_end": model.train_end},
        "horizon_bound": horizon_bound(len(series), model.T, model.embedding.d),
        "mse_new": mse_new,
        "nmse": result.mse / var if var > 0 else float("nan"),
        "nmse_new": mse_new / var if var > 0 else float("nan"),
    }


def run_forecast(series: Series, model: FittedModel, cfg: RunConfig, stem: str, extra: dict | None = None) -> dict:
    """Forecast and write ``<stem>_predictions.csv``, its summary, and ``<stem>_rolling_mse.csv``."""
    result = predict(series, model, ForecastConfig(T=model.T, mode=cfg.mode, m_p=cfg.m_p))
    window = cfg.window or max(1, int(round(1.0 / series.dt)))
    out = output_dir(cfg)
    summary = forecast_summary(series, model, result)
    summary["config"] = cfg.to_dict() | {
        "d": model.embedding.d, "lag": model.embedding.lag, "np": model.basis.degree, "T": model.T,
        "window": window, "out_dir": str(out),
    }
    if extra:
        summary.update(extra)
    table, summary_path = write_result(result, out / f"{stem}_predictions.csv", cfg.precision, summary)
    trace = write_rolling_mse(result, out / f"{stem}_rolling_mse.csv", window, cfg.precision)
    return {"result": result, "predictions": table, "summary": summary_path, "rolling_mse": trace,
            "m_p": result.m_p, "mse": result.mse, "nmse_new": summary["nmse_new"]}


@dataclass(frozen=True)
class Recipe:
    """One named benchmark configuration."""

    name: str
    source: str
    d: int
    np: int
    T: int
    M: int | None
    rate_hz: float | None = None
    expected_file: str | None = None
    surrogate_seed: int = 0


RECIPES = {
    "mg-t1": Recipe("mg-t1", "mackey-glass", d=5, np=3, T=1, M=300),
    "mg-t5": Recipe("mg-t5", "mackey-glass", d=5, np=3, T=5, M=300),
    "mit207-t1": Recipe("mit207-t1", "ecg", 4, 3, 1, 18_000, 360.0, "mit207_mlii.csv", 207),
    "mit207-t5": Recipe("mit207-t5", "ecg", 4, 3, 5, 18_000, 360.0, "mit207_mlii.csv", 207),
    "cu02-t1": Recipe("cu02-t1", "ecg", 4, 3, 1, 30_000, 250.0, "cu02.csv", 2),
    "cu02-t5": Recipe("cu02-t5", "ecg", 4, 3, 5, 30_000, 250.0, "cu02.csv", 2),
}

SURROGATE_SAMPLES = 10_000
SURROGATE_TRAIN_FRACTION = 6  # training span is 1/6 of the record


def reproduce(name: str, input_path: str | None = None, surrogate: bool = False,
              out_dir: str | None = None, overrides: dict | None = None) -> dict:
    """Run a named configuration end to end and write its model, predictions and traces."""
    if name not in RECIPES:
        raise UsageError(f"unknown recipe {name!r}; choose from {', '.join(RECIPES)}")
    r = RECIPES[name]
    base = {"d": r.d, "np": r.np, "T": r.T, "M": r.M, "out_dir": out_dir, "seed": r.surrogate_seed}
    cfg = resolve_config(base, overrides)
    out = output_dir(cfg)
    source: dict
    if r.source == "mackey-glass":
        mg = MackeyGlassConfig()
        series = mackey_glass(mg)
        write_series(series, out / f"{name}_series.txt")
        source = {"kind": "mackey-glass", **dataclasses.asdict(mg)}
    elif surrogate:
        series = ecg_surrogate(SURROGATE_SAMPLES, r.rate_hz, seed=cfg.seed)
        if (overrides or {}).get("M") is None:
            cfg.M = len(series) // SURROGATE_TRAIN_FRACTION
        write_series(series, out / f"{name}_series.txt")
        source = {"kind": "ecg-surrogate", "n": SURROGATE_SAMPLES, "rate_hz": r.rate_hz, "seed": cfg.seed}
    else:
        path = Path(input_path or cfg.input or r.expected_file)
        if not path.exists():
            raise DataError(
                f"recipe {name} needs a delimited-text export of the ECG record at {path} "
                f"(expected file name {r.expected_file!r}, {r.rate_hz:g} Hz); "
                "pass --input PATH or use --surrogate"
            )
        cfg.input = str(path)
        series = load_input(cfg, fallback_rate_hz=r.rate_hz)
        # raw exported values, no unit conversion
        source = {"kind": "file", "path": str(path), "rate_hz": 1.0 / series.dt, "scaling": "raw"}
    outcome = fit_series(series, cfg)
    save_model(outcome, out / f"{name}_model.json", source)
    files = run_forecast(series, outcome.model, cfg, name, {"recipe": name, "source": source})
    files["model"] = out / f"{name}_model.json"
    files["n_coefficients"] = outcome.model.n_coefficients
    files["M"] = cfg.M
    return files
