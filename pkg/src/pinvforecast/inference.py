"""Modeling phase: coefficient estimation and Fisher-information diagnostics.

Coefficients are the minimum-norm least-squares solution of ``W a = v_T``
computed from a singular-value decomposition. Both textbook pseudo-inverse
forms, ``W^T (W W^T)^-1`` (full row rank) and ``(W^T W)^-1 W^T`` (full column
rank), are special cases of the SVD route, which also survives rank
deficiency.

For the Gaussian coefficient model the Fisher matrix is ``W^T W / sigma2`` and
the Cramer-Rao bound is attained, so the estimator covariance is
``sigma2 * (W^T W)^+``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .design import DEFAULT_RANK_TOL, DesignMatrix, MonomialBasis, Scaling
from .embedding import EmbeddingConfig
from .errors import DataError, DimensionError, DomainError

DEFAULT_SVD_TOL = DEFAULT_RANK_TOL


def _cutoff(s: np.ndarray, shape: tuple[int, int], svd_tol: float) -> float:
    if s.size == 0:
        return 0.0
    if svd_tol < 0:
        raise DomainError(f"svd_tol must be >= 0, got {svd_tol}")
    rel = svd_tol if svd_tol > 0 else max(shape) * np.finfo(np.float64).eps
    return rel * s[0]


def pseudo_inverse(w, svd_tol: float = DEFAULT_SVD_TOL) -> np.ndarray:
    """Moore-Penrose pseudo-inverse; singular values at or below ``svd_tol * s_max`` are dropped.

    ``svd_tol=0`` selects the LAPACK-style default ``max(M, N) * eps``.
    """
    w = np.asarray(w, dtype=np.float64)
    u, s, vt = np.linalg.svd(w, full_matrices=False)
    cut = _cutoff(s, w.shape, svd_tol)
    keep = s > cut
    inv = np.zeros_like(s)
    inv[keep] = 1.0 / s[keep]
    return (vt.T * inv) @ u.T


@dataclass(frozen=True)
class FittedModel:
    """Working hypothesis produced by the modeling phase.

    ``train_end`` is one past the last sample index touched by training
    (last target index + 1); iterated forecasting treats samples before it
    as the observed prefix.
    """

    a_mean: np.ndarray
    sigma2: float
    basis: MonomialBasis | None
    embedding: EmbeddingConfig | None
    T: int
    rank: int
    svd_tol: float
    cutoff: float = 0.0
    n_train: int = 0
    train_end: int = 0
    rss: float = 0.0
    scaling: Scaling | None = field(default=None, repr=False)

    @property
    def n_coefficients(self) -> int:
        return self.a_mean.size


def fit_coefficients(dm: DesignMatrix, svd_tol: float = DEFAULT_SVD_TOL) -> FittedModel:
    """Solve ``dm.w @ a = dm.targets`` in the minimum-norm least-squares sense.

    The residual variance is ``RSS / max(M - rank, 1)``.
    """
    w, y = dm.w, dm.targets
    if w.size == 0 or y.size == 0:
        raise DimensionError(f"cannot fit an empty design matrix (shape {w.shape})")
    if not (np.all(np.isfinite(w)) and np.all(np.isfinite(y))):
        raise DataError("design matrix or targets contain non-finite values")
    u, s, vt = np.linalg.svd(w, full_matrices=False)
    cut = _cutoff(s, w.shape, svd_tol)
    keep = s > cut
    rank = int(keep.sum())
    coeffs = (u[:, keep].T @ y) / s[keep]
    a_mean = vt[keep].T @ coeffs
    resid = y - w @ a_mean
    rss = float(resid @ resid)
    m = w.shape[0]
    sigma2 = rss / max(m - rank, 1)
    a_mean.setflags(write=False)
    train_end = 0
    if dm.base_indices is not None and dm.base_indices.size:
        train_end = int(dm.base_indices[-1]) + dm.horizon + 1
    return FittedModel(
        a_mean=a_mean,
        sigma2=sigma2,
        basis=dm.basis,
        embedding=dm.embedding,
        T=dm.horizon,
        rank=rank,
        svd_tol=float(svd_tol),
        cutoff=float(cut),
        n_train=m,
        train_end=train_end,
        rss=rss,
        scaling=dm.scaling,
    )


def _check_sigma2(sigma2: float) -> float:
    if not (np.isfinite(sigma2) and sigma2 > 0):
        raise DomainError(f"sigma2 must be a positive finite number, got {sigma2!r}")
    return float(sigma2)


def _gram(dm: DesignMatrix | np.ndarray) -> np.ndarray:
    w = dm.w if isinstance(dm, DesignMatrix) else np.asarray(dm, dtype=np.float64)
    g = w.T @ w
    return 0.5 * (g + g.T)


def fisher_information_matrix(dm: DesignMatrix | np.ndarray, sigma2: float) -> np.ndarray:
    """``W^T W / sigma2``, symmetrized."""
    return _gram(dm) / _check_sigma2(sigma2)


def coefficient_covariance(dm: DesignMatrix | np.ndarray, sigma2: float) -> np.ndarray:
    """Cramer-Rao covariance ``sigma2 * (W^T W)^+``."""
    sigma2 = _check_sigma2(sigma2)
    cov = sigma2 * np.linalg.pinv(_gram(dm), hermitian=True)
    return 0.5 * (cov + cov.T)


def log_density(a, dm: DesignMatrix, sigma2: float) -> float:
    """Gaussian log-density of a coefficient vector.

    ``-(N_c/2) ln(2 pi sigma2) - ||v_T - W a||^2 / (2 sigma2)``. The exponent
    carries a minus sign; with a plus sign the density would not normalize.
    """
    sigma2 = _check_sigma2(sigma2)
    a = np.asarray(a, dtype=np.float64)
    n_c = dm.w.shape[1]
    if a.shape != (n_c,):
        raise DimensionError(f"coefficient vector has shape {a.shape}, expected ({n_c},)")
    r = dm.targets - dm.w @ a
    return -0.5 * n_c * math.log(2.0 * math.pi * sigma2) - float(r @ r) / (2.0 * sigma2)


@dataclass(frozen=True)
class EmpiricalFIM:
    value: float
    guard_count: int
    eps: float

    def __float__(self) -> float:
        return self.value


def _weights(targets: np.ndarray, c_weights) -> np.ndarray:
    if c_weights is None:
        return np.ones_like(targets)
    c = np.asarray(c_weights, dtype=np.float64)
    if c.ndim == 0:
        return np.full_like(targets, float(c))
    if c.shape != targets.shape:
        raise DimensionError(f"c_weights has shape {c.shape}, targets {targets.shape}")
    return c


def default_eps(targets) -> float:
    """``1e-9 * max|v|``, or ``1e-9`` when every target is zero."""
    peak = float(np.max(np.abs(targets))) if np.size(targets) else 0.0
    return 1e-9 * peak if peak > 0 else 1e-9


def empirical_fim(targets, c_weights=None, eps: float | None = None) -> EmpiricalFIM:
    """Data-only Fisher information ``sum_k C_k / |v_k|``.

    Targets with ``|v_k| < eps`` are replaced by ``eps`` and counted in
    ``guard_count``. ``C_k`` defaults to 1.
    """
    v = np.asarray(targets, dtype=np.float64)
    c = _weights(v, c_weights)
    eps = default_eps(v) if eps is None else float(eps)
    if not eps > 0:
        raise DomainError(f"eps must be > 0, got {eps}")
    mag = np.abs(v)
    guarded = mag < eps
    mag = np.where(guarded, eps, mag)
    return EmpiricalFIM(value=float(np.sum(c / mag)), guard_count=int(guarded.sum()), eps=eps)


def _check_away_from_zero(v: np.ndarray, eps: float | None) -> None:
    eps = default_eps(v) if eps is None else eps
    bad = np.flatnonzero(np.abs(v) < eps)
    if bad.size:
        raise DomainError(f"target {int(bad[0])} is within {eps:g} of zero")


def empirical_fim_gradient(targets, c_weights=None, eps: float | None = None) -> np.ndarray:
    """Partial derivatives ``-C_k |v_k|^-1 / v_k``; negative for positive targets."""
    v = np.asarray(targets, dtype=np.float64)
    _check_away_from_zero(v, eps)
    return -_weights(v, c_weights) / np.abs(v) / v


def empirical_fim_hessian_diag(targets, c_weights=None, eps: float | None = None) -> np.ndarray:
    """Diagonal of the (diagonal) Hessian, ``2 C_k |v_k|^-3``."""
    v = np.asarray(targets, dtype=np.float64)
    _check_away_from_zero(v, eps)
    return 2.0 * _weights(v, c_weights) / np.abs(v) ** 3


@dataclass(frozen=True)
class FisherDiagnostics:
    fim: np.ndarray | None
    covariance: np.ndarray | None
    empirical_fim: float
    c_weights: np.ndarray
    guard_count: int
    eps: float
    fim_condition: float


def fisher_diagnostics(dm: DesignMatrix, model: FittedModel, c_weights=None, eps: float | None = None) -> FisherDiagnostics:
    """Bundle the Fisher matrix, Cramer-Rao covariance and empirical FIM for a fit.

    When the fit is exact (``sigma2 == 0``) the matrices are undefined and left
    as ``None``; the condition number of ``W^T W`` does not depend on
    ``sigma2`` and is always reported.
    """
    c = _weights(np.asarray(dm.targets, dtype=np.float64), c_weights)
    emp = empirical_fim(dm.targets, c, eps)
    meta = dm.sigma_meta
    cond = meta.condition**2 if meta.s_min > 0 else math.inf
    fim = cov = None
    if model.sigma2 > 0:
        fim = fisher_information_matrix(dm, model.sigma2)
        cov = coefficient_covariance(dm, model.sigma2)
    return FisherDiagnostics(
        fim=fim,
        covariance=cov,
        empirical_fim=emp.value,
        c_weights=c,
        guard_count=emp.guard_count,
        eps=emp.eps,
        fim_condition=cond,
    )


def score_outer_product(scores) -> tuple[np.ndarray, np.ndarray]:
    """Monte-Carlo Fisher matrix from per-sample score vectors.

    Parameters
    ----------
    scores : array_like, shape (n_samples, k)
        Gradient of the log-density with respect to each coordinate, one row
        per draw.

    Returns
    -------
    fisher : ndarray, shape (k, k)
        Mean of the score outer products.
    stderr : ndarray, shape (k, k)
        Standard error of each entry of ``fisher``.
    """
    s = np.asarray(scores, dtype=np.float64)
    n = s.shape[0]
    prods = s[:, :, None] * s[:, None, :]
    return prods.mean(axis=0), prods.std(axis=0, ddof=1) / math.sqrt(n)
