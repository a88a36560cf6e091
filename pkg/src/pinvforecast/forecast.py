"""Prediction phase: apply a fitted ansatz over a horizon and score it.

Predictions are indexed by the delay vector they are built from. The ``j``-th
prediction uses the vector anchored at ``n_j = (d-1)*lag + j`` and estimates
``v(n_j + T)``; it is compared against the observed sample at that same
absolute index.

``direct`` mode reads every delay vector from the observed signal. ``iterated``
mode reads observed samples only before the observed prefix (by default the
end of the training span) and feeds its own predictions back afterwards.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .design import evaluate_monomials
from .embedding import Series
from .errors import ConfigError, DimensionError, NumericalError
from .inference import FittedModel

MODES = ("direct", "iterated")


def horizon_bound(n_samples: int, T: int, d: int) -> int:
    """Default number of predicted points, ``n_samples - max(T, d)``."""
    if n_samples <= max(T, d):
        raise DimensionError(f"n_samples={n_samples} leaves nothing to predict for T={T}, d={d}")
    return n_samples - max(T, d)


def mse(truth, predicted) -> float:
    truth = np.asarray(truth, dtype=np.float64)
    predicted = np.asarray(predicted, dtype=np.float64)
    if truth.shape != predicted.shape or truth.ndim != 1 or truth.size == 0:
        raise DimensionError(f"mse needs equal non-empty 1-D inputs, got {truth.shape} and {predicted.shape}")
    err = truth - predicted
    return float(np.mean(err * err))


def rolling_mse(truth, predicted, window: int) -> np.ndarray:
    """Mean squared error over each length-``window`` run of consecutive points."""
    truth = np.asarray(truth, dtype=np.float64)
    predicted = np.asarray(predicted, dtype=np.float64)
    mse(truth, predicted)  # shape checks
    if not 1 <= window <= truth.size:
        raise DimensionError(f"window must lie in [1, {truth.size}], got {window}")
    sq = (truth - predicted) ** 2
    return np.lib.stride_tricks.sliding_window_view(sq, window).mean(axis=1)


@dataclass(frozen=True)
class ForecastConfig:
    """``T=None`` and ``m_p=None`` fall back to the model horizon and :func:`horizon_bound`."""

    T: int | None = None
    mode: str = "direct"
    m_p: int | None = None
    observed_prefix: int | None = None

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.T is not None and self.T < 1:
            raise ConfigError(f"T must be >= 1, got {self.T}")
        if self.m_p is not None and self.m_p < 1:
            raise ConfigError(f"m_p must be >= 1, got {self.m_p}")


@dataclass(frozen=True)
class ForecastResult:
    """Predicted values with their aligned truth.

    Entries of ``aligned_truth`` (and ``pointwise_sq_error``) are NaN where the
    target index lies past the end of the observed series; ``mse`` averages
    the ``n_scored`` finite entries.
    """

    predicted: np.ndarray
    aligned_truth: np.ndarray
    pointwise_sq_error: np.ndarray
    mse: float
    target_indices: np.ndarray
    n_scored: int
    dt: float
    config: dict

    @property
    def m_p(self) -> int:
        return self.predicted.size

    def scored(self) -> tuple[np.ndarray, np.ndarray]:
        """Truth and prediction restricted to points with observed truth."""
        ok = np.isfinite(self.aligned_truth)
        return self.aligned_truth[ok], self.predicted[ok]


def _check_model(series: Series, model: FittedModel, fc: ForecastConfig) -> int:
    if model.basis is None or model.embedding is None:
        raise ConfigError("model carries no basis/embedding; it cannot drive a forecast")
    if model.basis.d != model.embedding.d:
        raise ConfigError(f"basis dimension {model.basis.d} does not match embedding d={model.embedding.d}")
    if model.a_mean.size != len(model.basis):
        raise ConfigError(f"model has {model.a_mean.size} coefficients but basis has {len(model.basis)} terms")
    T = model.T if fc.T is None else fc.T
    if T != model.T:
        raise ConfigError(f"model was fitted for T={model.T}, forecast requested T={T}")
    if len(series) <= model.embedding.span:
        raise DimensionError(f"series of length {len(series)} is too short for the model's embedding")
    return T


def _evaluate(rows: np.ndarray, model: FittedModel) -> np.ndarray:
    if model.scaling is not None:
        rows = model.scaling.apply(rows)
    with np.errstate(over="ignore", invalid="ignore"):
        return evaluate_monomials(rows, model.basis) @ model.a_mean


def predict(series: Series, model: FittedModel, fc: ForecastConfig = ForecastConfig()) -> ForecastResult:
    T = _check_model(series, model, fc)
    cfg = model.embedding
    values = series.values
    n = values.size
    m_p = fc.m_p if fc.m_p is not None else horizon_bound(n, T, cfg.d)
    start = cfg.span
    base = start + np.arange(m_p)
    targets = base + T
    offsets = np.arange(cfg.d) * cfg.lag

    if fc.mode == "direct":
        if base[-1] > n - 1:
            raise DimensionError(
                f"direct mode can predict at most {n - start} points from {n} samples; "
                f"requested m_p={m_p} (use iterated mode to go further)"
            )
        predicted = _evaluate(values[base[:, None] - offsets[None, :]], model)
        prefix = n
    else:
        prefix = model.train_end if fc.observed_prefix is None else fc.observed_prefix
        prefix = int(min(max(prefix, start + T), n))
        buf = np.full(max(n, int(targets[-1]) + 1), np.nan)
        buf[:prefix] = values[:prefix]
        predicted = np.empty(m_p)
        # open-loop block: targets still inside the observed prefix
        k = int(np.searchsorted(targets, prefix))
        if k:
            predicted[:k] = _evaluate(values[base[:k, None] - offsets[None, :]], model)
        for j in range(k, m_p):
            nxt = _evaluate(buf[base[j] - offsets][None, :], model)[0]
            if not np.isfinite(nxt):
                raise NumericalError(f"iterated forecast diverged at sample {int(targets[j])} (prediction {j})")
            predicted[j] = nxt
            buf[targets[j]] = nxt

    inside = targets < n
    truth = np.full(m_p, np.nan)
    truth[inside] = values[targets[inside]]
    sq = (truth - predicted) ** 2
    n_scored = int(inside.sum())
    score = float(np.mean(sq[inside])) if n_scored else float("nan")
    echo = asdict(fc) | {"T": T, "m_p": m_p, "observed_prefix": prefix, "d": cfg.d, "lag": cfg.lag}
    for arr in (predicted, truth, sq, targets):
        arr.setflags(write=False)
    return ForecastResult(
        predicted=predicted,
        aligned_truth=truth,
        pointwise_sq_error=sq,
        mse=score,
        target_indices=targets,
        n_scored=n_scored,
        dt=series.dt,
        config=echo,
    )
