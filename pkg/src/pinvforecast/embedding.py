"""Time-delay reconstruction of a scalar series.

Indexing is 0-based everywhere. A delay vector anchored at sample ``n`` is
ordered most-recent-first::

    [v(n), v(n - lag), ..., v(n - (d-1)*lag)]

so component ``i`` (0-based) of the row anchored at ``n`` is ``v(n - i*lag)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .errors import DataError, DimensionError


def _frozen(values) -> np.ndarray:
    arr = np.array(values, dtype=np.float64)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Series:
    """Uniformly sampled scalar signal.

    Parameters
    ----------
    values : array_like
        Samples in time order. Must be non-empty and finite.
    dt : float
        Sampling interval in seconds.
    name : str
        Free-form label carried into reports.
    """

    values: np.ndarray
    dt: float = 1.0
    name: str = ""

    def __post_init__(self):
        arr = _frozen(self.values)
        if arr.ndim != 1:
            raise DataError(f"series must be 1-D, got shape {arr.shape}")
        if arr.size == 0:
            raise DataError("series is empty")
        bad = np.flatnonzero(~np.isfinite(arr))
        if bad.size:
            raise DataError(f"series has non-finite value at index {int(bad[0])}")
        if not (np.isfinite(self.dt) and self.dt > 0):
            raise DataError(f"dt must be a positive finite number, got {self.dt!r}")
        object.__setattr__(self, "values", arr)
        object.__setattr__(self, "dt", float(self.dt))

    def __len__(self) -> int:
        return self.values.size


@dataclass(frozen=True)
class EmbeddingConfig:
    d: int
    lag: int = 1

    def __post_init__(self):
        if int(self.d) != self.d or self.d < 1:
            raise DimensionError(f"embedding dimension must be an integer >= 1, got {self.d!r}")
        if int(self.lag) != self.lag or self.lag < 1:
            raise DimensionError(f"lag must be an integer >= 1, got {self.lag!r}")
        object.__setattr__(self, "d", int(self.d))
        object.__setattr__(self, "lag", int(self.lag))

    @property
    def span(self) -> int:
        """Samples of history consumed before the first full delay vector."""
        return (self.d - 1) * self.lag

    def min_length(self) -> int:
        return self.span + 1


@dataclass(frozen=True)
class DelayMatrix:
    """Delay vectors (one per row) and the sample index each is anchored at."""

    rows: np.ndarray
    base_indices: np.ndarray
    config: EmbeddingConfig = field(repr=False)

    def __len__(self) -> int:
        return self.rows.shape[0]


def _require_length(n: int, cfg: EmbeddingConfig) -> None:
    if n <= cfg.span:
        raise DimensionError(
            f"series of length {n} is too short for d={cfg.d}, lag={cfg.lag}; "
            f"need at least {cfg.min_length()} samples"
        )


def delay_embed(series: Series | np.ndarray, cfg: EmbeddingConfig) -> DelayMatrix:
    """Build every full delay vector of ``series``.

    Returns ``N - (d-1)*lag`` rows anchored at ``n = (d-1)*lag, ..., N-1``.
    Entries are copied from the input, never computed, so
    ``rows[k, i] == values[base_indices[k] - i*lag]`` holds exactly.
    """
    values = series.values if isinstance(series, Series) else np.asarray(series, dtype=np.float64)
    n = values.size
    _require_length(n, cfg)
    base = np.arange(cfg.span, n)
    offsets = np.arange(cfg.d) * cfg.lag
    rows = values[base[:, None] - offsets[None, :]]
    rows.setflags(write=False)
    base.setflags(write=False)
    return DelayMatrix(rows=rows, base_indices=base, config=cfg)


@dataclass(frozen=True)
class FNNResult:
    """Outcome of a false-nearest-neighbor scan.

    ``fractions[k]`` is the false-neighbor fraction measured at dimension
    ``k + 1`` (that is, going from ``k + 1`` to ``k + 2`` coordinates).
    """

    d: int
    saturated: bool
    fractions: tuple[float, ...]

    def __int__(self) -> int:
        return self.d


def _nearest_neighbors(points: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # exact search; k=2 so that a duplicate of the query can stand in for self
    tree = cKDTree(points)
    dist, idx = tree.query(points, k=2)
    own = np.arange(points.shape[0])
    first_is_self = idx[:, 0] == own
    nn = np.where(first_is_self, idx[:, 1], idx[:, 0])
    nd = np.where(first_is_self, dist[:, 1], dist[:, 0])
    return nn, nd


def fnn_fraction(values: np.ndarray, d: int, lag: int = 1, r_tol: float = 15.0, a_tol: float = 2.0) -> float:
    """False-nearest-neighbor fraction when growing the embedding from ``d`` to ``d+1``.

    A neighbor pair is false when the added coordinate separates them by more
    than ``r_tol`` times their distance in ``d`` dimensions, or when their
    ``d+1``-dimensional distance exceeds ``a_tol`` times the series' standard
    deviation (Kennel, Brown & Abarbanel 1992).
    """
    values = np.asarray(values, dtype=np.float64)
    n = values.size
    cfg_next = EmbeddingConfig(d + 1, lag)
    _require_length(n, cfg_next)
    # restrict to anchors that also have the extra coordinate
    points = delay_embed(values, cfg_next).rows
    if points.shape[0] < 2:
        raise DimensionError(f"need at least two delay vectors at d={d + 1}, lag={lag}")
    inner = points[:, :d]
    extra = points[:, d]
    nn, dist_d = _nearest_neighbors(inner)
    gap = np.abs(extra - extra[nn])
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(dist_d > 0, gap / dist_d, np.where(gap > 0, np.inf, 0.0))
    dist_next = np.sqrt(dist_d**2 + gap**2)
    spread = values.std()
    if spread > 0:
        loose = dist_next / spread > a_tol
    else:
        loose = np.zeros_like(gap, dtype=bool)
    false = (ratio > r_tol) | loose
    return float(np.mean(false))


def fnn_dimension(
    series: Series | np.ndarray,
    d_max: int = 10,
    lag: int = 1,
    r_tol: float = 15.0,
    a_tol: float = 2.0,
    fnn_threshold: float = 0.01,
) -> FNNResult:
    """Smallest embedding dimension whose false-neighbor fraction is below ``fnn_threshold``.

    Dimensions ``1 .. d_max - 1`` are tested (each test needs one extra
    coordinate). When none passes, ``d_max`` is returned with
    ``saturated=True``.
    """
    values = series.values if isinstance(series, Series) else np.asarray(series, dtype=np.float64)
    if d_max < 2:
        raise DimensionError(f"d_max must be >= 2, got {d_max}")
    _require_length(values.size, EmbeddingConfig(d_max, lag))
    fractions = []
    for d in range(1, d_max):
        frac = fnn_fraction(values, d, lag, r_tol, a_tol)
        fractions.append(frac)
        if frac < fnn_threshold:
            return FNNResult(d=d, saturated=False, fractions=tuple(fractions))
    return FNNResult(d=d_max, saturated=True, fractions=tuple(fractions))
