"""Benchmark signal generators."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .design import MonomialBasis, evaluate_monomials
from .embedding import EmbeddingConfig, Series
from .errors import DataError, DimensionError, NumericalError


@dataclass(frozen=True)
class MackeyGlassConfig:
    """Parameters of ``dx/dt = a x(t-tau) / (1 + x(t-tau)**power) - b x(t)``.

    The output is sampled every ``sample_every`` integration steps, so the
    returned series has spacing ``dt * sample_every``. History is held at the
    constant ``x0`` for ``t <= 0``.
    """

    a: float = 0.2
    b: float = 0.1
    tau: float = 30.0
    x0: float = 1.2
    dt: float = 0.1
    sample_every: int = 10
    n_samples: int = 1500
    power: float = 10.0

    def __post_init__(self):
        if not self.dt > 0:
            raise DataError(f"dt must be > 0, got {self.dt}")
        if self.tau < 0:
            raise DataError(f"tau must be >= 0, got {self.tau}")
        if self.n_samples < 1 or self.sample_every < 1:
            raise DataError("n_samples and sample_every must be >= 1")
        lag = self.tau / self.dt
        if abs(lag - round(lag)) * self.dt >= self.dt / 2:
            raise DataError(f"tau={self.tau} is not resolvable on dt={self.dt}")

    @property
    def history_steps(self) -> int:
        return int(round(self.tau / self.dt))


def mackey_glass(cfg: MackeyGlassConfig = MackeyGlassConfig()) -> Series:
    """Integrate the Mackey-Glass equation with classical RK4.

    The delayed state at the half step is linearly interpolated between the
    two stored history points around ``t - tau + dt/2``; the full-step value is
    read from history directly. With ``tau == 0`` the delayed argument is the
    current stage value, which reduces the model to an ODE.
    """
    a, b, p, h = cfg.a, cfg.b, cfg.power, cfg.dt
    lag = cfg.history_steps

    def rhs(x, x_delayed):
        return a * x_delayed / (1.0 + x_delayed**p) - b * x

    n_steps = (cfg.n_samples - 1) * cfg.sample_every
    # ring buffer holding x at steps k-lag .. k
    ring = np.full(lag + 1, float(cfg.x0))
    head = 0
    out = np.empty(cfg.n_samples)
    out[0] = cfg.x0
    x = float(cfg.x0)
    for k in range(n_steps):
        try:
            if lag:
                lo = ring[(head + 1) % (lag + 1)]
                hi = ring[(head + 2) % (lag + 1)]
                mid = 0.5 * (lo + hi)
                k1 = rhs(x, lo)
                k2 = rhs(x + 0.5 * h * k1, mid)
                k3 = rhs(x + 0.5 * h * k2, mid)
                k4 = rhs(x + h * k3, hi)
            else:
                k1 = rhs(x, x)
                k2 = rhs(x + 0.5 * h * k1, x + 0.5 * h * k1)
                k3 = rhs(x + 0.5 * h * k2, x + 0.5 * h * k2)
                k4 = rhs(x + h * k3, x + h * k3)
            x = x + h * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0
        except OverflowError:
            x = math.inf
        if not math.isfinite(x):
            raise NumericalError(f"Mackey-Glass integration blew up at step {k + 1}")
        head = (head + 1) % (lag + 1)
        ring[head] = x
        if (k + 1) % cfg.sample_every == 0:
            out[(k + 1) // cfg.sample_every] = x
    return Series(out, dt=cfg.dt * cfg.sample_every, name=f"mackey-glass(tau={cfg.tau:g})")


def synthetic_polynomial_series(
    a_true,
    basis: MonomialBasis,
    seed_values,
    n: int,
    lag: int = 1,
    overflow: float = 1e100,
) -> Series:
    """Iterate ``v(t+1) = sum_j a_true[j] * term_j(delay vector at t)``.

    The first ``len(seed_values)`` samples are the seed; the series is
    extended to ``n`` samples in total.
    """
    a_true = np.asarray(a_true, dtype=np.float64)
    seed = np.asarray(seed_values, dtype=np.float64)
    cfg = EmbeddingConfig(basis.d, lag)
    if a_true.size != len(basis):
        raise DimensionError(f"a_true has {a_true.size} entries, basis has {len(basis)} terms")
    if seed.size < cfg.min_length():
        raise DimensionError(f"seed needs at least {cfg.min_length()} values, got {seed.size}")
    if n < seed.size:
        raise DimensionError(f"n={n} is shorter than the seed ({seed.size})")
    v = np.empty(n)
    v[: seed.size] = seed
    offsets = np.arange(basis.d) * lag
    for t in range(seed.size - 1, n - 1):
        row = evaluate_monomials(v[t - offsets][None, :], basis)[0]
        nxt = float(row @ a_true)
        if not np.isfinite(nxt) or abs(nxt) > overflow:
            raise NumericalError(f"synthetic series diverged at sample {t + 1}")
        v[t + 1] = nxt
    return Series(v, dt=1.0, name="synthetic-polynomial")


def ecg_surrogate(n: int = 10_000, rate_hz: float = 360.0, seed: int = 207, noise: float = 0.02) -> Series:
    """ECG-like test signal: a train of narrow beats plus Gaussian noise.

    Each beat is a QRS-like spike flanked by smaller P and T bumps; the beat
    interval jitters around 0.8 s. Deterministic for a given ``seed``.
    """
    rng = np.random.default_rng(seed)
    t = np.arange(n) / rate_hz
    sig = np.zeros(n)
    beat = 0.3
    while beat < t[-1] + 1.0:
        amp = 1.0 + 0.1 * rng.standard_normal()
        sig += 0.15 * np.exp(-0.5 * ((t - beat + 0.18) / 0.025) ** 2)
        sig += amp * np.exp(-0.5 * ((t - beat) / 0.012) ** 2)
        sig -= 0.2 * np.exp(-0.5 * ((t - beat - 0.03) / 0.01) ** 2)
        sig += 0.3 * np.exp(-0.5 * ((t - beat - 0.3) / 0.05) ** 2)
        beat += 0.8 + 0.05 * rng.standard_normal()
    sig += noise * rng.standard_normal(n)
    return Series(sig, dt=1.0 / rate_hz, name=f"ecg-surrogate(seed={seed})")
