"""Polynomial ansatz terms and the design matrix built from delay vectors.

A term is a non-decreasing tuple of 1-based coordinate indices; ``()`` is the
constant, ``(1, 1, 2)`` is ``v_1 * v_1 * v_2``. Terms are ordered by degree,
then lexicographically, which is exactly the order of
``itertools.combinations_with_replacement``.

The coefficient count includes the constant term:
``total_coefficients(d, np) = 1 + sum_k count_terms(d, k)``. Summing only the
degree >= 1 terms undercounts by one (55 instead of 56 for d=5, np=3).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .embedding import DelayMatrix, EmbeddingConfig, Series
from .errors import DataError, DimensionError, NumericalError

INT64_MAX = 2**63 - 1

DEFAULT_RANK_TOL = 1e-12


def count_terms(d: int, k: int) -> int:
    """Number of degree-``k`` monomials in ``d`` variables, ``C(d+k-1, k)``."""
    if d < 1 or k < 1:
        raise DimensionError(f"count_terms needs d >= 1 and k >= 1, got d={d}, k={k}")
    n = math.comb(d + k - 1, k)
    if n > INT64_MAX:
        raise NumericalError(f"count_terms({d}, {k}) overflows a 64-bit integer")
    return n


def total_coefficients(d: int, np_: int) -> int:
    """Length of the coefficient vector for an ansatz of degree ``np_``, constant included."""
    if d < 1 or np_ < 0:
        raise DimensionError(f"total_coefficients needs d >= 1 and np >= 0, got d={d}, np={np_}")
    total = 1 + sum(count_terms(d, k) for k in range(1, np_ + 1))
    if total > INT64_MAX:
        raise NumericalError(f"total_coefficients({d}, {np_}) overflows a 64-bit integer")
    return total


@dataclass(frozen=True)
class MonomialBasis:
    d: int
    degree: int
    terms: tuple[tuple[int, ...], ...]

    def __len__(self) -> int:
        return len(self.terms)

    def labels(self) -> list[str]:
        return ["1" if not t else "*".join(f"v{i}" for i in t) for t in self.terms]


def enumerate_monomials(d: int, np_: int) -> MonomialBasis:
    total_coefficients(d, np_)  # validates arguments
    terms = [()]
    for k in range(1, np_ + 1):
        terms.extend(itertools.combinations_with_replacement(range(1, d + 1), k))
    return MonomialBasis(d=d, degree=np_, terms=tuple(terms))


def evaluate_monomials(rows: np.ndarray, basis: MonomialBasis) -> np.ndarray:
    """Evaluate every basis term on each row of ``rows`` (shape ``(m, d)``).

    Products are accumulated left to right in tuple order.
    """
    rows = np.asarray(rows, dtype=np.float64)
    if rows.ndim != 2 or rows.shape[1] != basis.d:
        raise DimensionError(f"rows must have shape (m, {basis.d}), got {rows.shape}")
    out = np.empty((rows.shape[0], len(basis)))
    for j, term in enumerate(basis.terms):
        col = np.ones(rows.shape[0])
        for i in term:
            col = col * rows[:, i - 1]
        out[:, j] = col
    return out


@dataclass(frozen=True)
class Conditioning:
    rank: int
    s_max: float
    s_min: float
    rank_tol: float

    @property
    def condition(self) -> float:
        return self.s_max / self.s_min if self.s_min > 0 else math.inf


def conditioning(w: np.ndarray, rank_tol: float = DEFAULT_RANK_TOL) -> Conditioning:
    s = np.linalg.svd(w, compute_uv=False)
    if s.size == 0:
        return Conditioning(0, 0.0, 0.0, rank_tol)
    rank = int(np.sum(s > rank_tol * s[0])) if s[0] > 0 else 0
    return Conditioning(rank=rank, s_max=float(s[0]), s_min=float(s[-1]), rank_tol=rank_tol)


@dataclass(frozen=True)
class Scaling:
    """Per-coordinate z-score applied to delay vectors before expansion."""

    mean: np.ndarray
    scale: np.ndarray

    def apply(self, rows: np.ndarray) -> np.ndarray:
        return (rows - self.mean) / self.scale

    @classmethod
    def fit(cls, rows: np.ndarray) -> "Scaling":
        mean = rows.mean(axis=0)
        scale = rows.std(axis=0)
        scale = np.where(scale > 0, scale, 1.0)
        return cls(mean=mean, scale=scale)


@dataclass(frozen=True)
class DesignMatrix:
    """Training system ``w @ a = targets``.

    ``base_indices[n]`` is the sample index the ``n``-th delay vector is
    anchored at; ``targets[n] = v(base_indices[n] + horizon)``.
    """

    w: np.ndarray
    targets: np.ndarray
    basis: MonomialBasis | None
    sigma_meta: Conditioning
    base_indices: np.ndarray | None = None
    horizon: int = 1
    embedding: EmbeddingConfig | None = None
    scaling: Scaling | None = field(default=None, repr=False)

    @property
    def shape(self) -> tuple[int, int]:
        return self.w.shape

    @classmethod
    def from_arrays(cls, w, targets) -> "DesignMatrix":
        """Wrap an arbitrary matrix/right-hand side, e.g. for solver checks."""
        w = np.array(w, dtype=np.float64)
        targets = np.array(targets, dtype=np.float64)
        if w.ndim != 2 or targets.shape != (w.shape[0],):
            raise DimensionError(f"incompatible shapes w{w.shape}, targets{targets.shape}")
        return cls(w=w, targets=targets, basis=None, sigma_meta=conditioning(w) if w.size else Conditioning(0, 0.0, 0.0, DEFAULT_RANK_TOL))


def max_training_rows(delays: DelayMatrix, n_samples: int, horizon: int) -> int:
    return int(np.sum(delays.base_indices + horizon <= n_samples - 1))


def build_design_matrix(
    delays: DelayMatrix,
    series: Series,
    T: int,
    M: int,
    basis: MonomialBasis,
    standardize: bool = False,
) -> DesignMatrix:
    """Assemble the first ``M`` (delay vector, ``T``-ahead target) pairs in time order."""
    if T < 1:
        raise DimensionError(f"horizon T must be >= 1, got {T}")
    if M < 1:
        raise DimensionError(f"training size M must be >= 1, got {M}")
    if delays.rows.shape[1] != basis.d:
        raise DimensionError(f"delay vectors have {delays.rows.shape[1]} components, basis expects {basis.d}")
    feasible = max_training_rows(delays, len(series), T)
    if M > feasible:
        raise DimensionError(f"M={M} training rows requested but at most {feasible} are available for T={T}")
    rows = delays.rows[:M]
    base = delays.base_indices[:M]
    scaling = Scaling.fit(rows) if standardize else None
    if scaling is not None:
        rows = scaling.apply(rows)
    w = evaluate_monomials(rows, basis)
    if not np.all(np.isfinite(w)):
        raise DataError("design matrix has non-finite entries")
    targets = np.array(series.values[base + T])
    for arr in (w, targets):
        arr.setflags(write=False)
    return DesignMatrix(
        w=w,
        targets=targets,
        basis=basis,
        sigma_meta=conditioning(w),
        base_indices=np.array(base),
        horizon=T,
        embedding=delays.config,
        scaling=scaling,
    )
