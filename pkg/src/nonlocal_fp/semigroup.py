"""Heat semigroup as a Fourier multiplier, Lp / Bessel-potential norms, and
numerical constants for the smoothing estimate of the semigroup."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidP, NegativeTime, NonPositiveBeta, SigmaOutOfRange
from .grid import TWO_PI, Grid, check_field, forward_transform, make_grid

FOUR_PI2 = TWO_PI**2


@dataclass(frozen=True)
class NormSpec:
    kind: str  # "lp" or "sobolev"
    p: float = 2.0
    sigma: float = 0.0

    def __post_init__(self):
        if self.kind not in ("lp", "sobolev"):
            raise ValueError(f"unknown norm kind {self.kind!r}")
        if self.kind == "sobolev" and not 0 <= self.sigma <= 4:
            raise SigmaOutOfRange(f"sigma {self.sigma} not in [0, 4]")
        if self.kind == "lp" and not (self.p >= 1):
            raise InvalidP(f"p must be >= 1 or inf, got {self.p}")

    def __call__(self, grid: Grid, values: np.ndarray) -> float:
        if self.kind == "lp":
            return lp_norm(grid, values, self.p)
        return sobolev_norm(grid, values, self.sigma)


def _check_time(t: float, beta: float) -> None:
    if t < 0:
        raise NegativeTime(f"t must be >= 0, got {t}")
    if not beta > 0:
        raise NonPositiveBeta(f"beta must be > 0, got {beta}")


def heat_multiplier(grid: Grid, t: float, beta: float) -> np.ndarray:
    """exp(-t beta^{-1} 4 pi^2 |k|^2) on the real-FFT layout."""
    _check_time(t, beta)
    cache = grid.__dict__.setdefault("_heat", {})
    key = (float(t), float(beta))
    mult = cache.get(key)
    if mult is None:
        mult = np.exp(-t / beta * FOUR_PI2 * grid.rksq)
        if len(cache) < 32:
            cache[key] = mult
    return mult


def heat_propagate(grid: Grid, values: np.ndarray, t: float, beta: float) -> np.ndarray:
    """Apply the exact heat flow exp(t beta^{-1} Laplacian) to a field."""
    values = check_field(grid, values)
    mult = heat_multiplier(grid, t, beta)
    if t == 0:
        return np.array(values, dtype=float, copy=True)
    return grid.irfft(mult * grid.rfft(values))


def sobolev_norm(grid: Grid, values: np.ndarray, sigma: float) -> float:
    """Bessel-potential norm sqrt(sum_k (1 + 4 pi^2 |k|^2)^sigma |c_k|^2)."""
    if not 0 <= sigma <= 4:
        raise SigmaOutOfRange(f"sigma {sigma} not in [0, 4]")
    c = forward_transform(grid, values)
    w = (1.0 + FOUR_PI2 * grid.ksq) ** sigma
    return float(np.sqrt(np.sum(w * (c.real**2 + c.imag**2))))


def lp_norm(grid: Grid, values: np.ndarray, p: float) -> float:
    values = check_field(grid, values)
    if p == np.inf:
        return float(np.max(np.abs(values)))
    if not p >= 1:
        raise InvalidP(f"p must be >= 1 or inf, got {p}")
    return float((grid.cell_volume * np.sum(np.abs(values) ** p)) ** (1.0 / p))


def operator_norm(grid: Grid, t: float, sigma: float, beta: float) -> float:
    """Exact norm of the heat semigroup from mean-free L2 into H^sigma on the grid.

    The semigroup is diagonal, so the norm is the largest multiplier
    (1 + 4 pi^2 |k|^2)^{sigma/2} exp(-t beta^{-1} 4 pi^2 |k|^2) over k != 0.
    """
    _check_time(t, beta)
    lam = _nonzero_eigenvalues(grid)
    return float(np.max((1.0 + lam) ** (sigma / 2.0) * np.exp(-t / beta * lam)))


def _nonzero_eigenvalues(grid: Grid) -> np.ndarray:
    cache = grid.__dict__
    if "_lam" not in cache:
        ksq = np.unique(grid.ksq.astype(np.int64))
        cache["_lam"] = FOUR_PI2 * ksq[ksq > 0].astype(float)
    return cache["_lam"]


@dataclass
class EstimateReport:
    """Empirical constant C such that opnorm(t) <= C t^{-sigma/2} e^{-kappa t}."""

    sigma: float
    beta: float
    kappa: float
    grid_sizes: tuple[int, ...]
    constant: float
    t_worst: float
    sampled_sup: float
    limit_at_zero: float
    t_samples: np.ndarray = field(repr=False)
    scaled: np.ndarray = field(repr=False)

    @property
    def status(self) -> str:
        return "pass" if np.isfinite(self.constant) else "fail"

    def csv_header(self) -> str:
        return "sigma,beta,kappa,grid,C_sigma,t_worst,sampled_sup,limit_at_zero,status"

    def csv_row(self) -> str:
        grid = "x".join(str(s) for s in self.grid_sizes)
        return (f"{self.sigma!r},{self.beta!r},{self.kappa!r},{grid},{self.constant!r},"
                f"{self.t_worst!r},{self.sampled_sup!r},{self.limit_at_zero!r},{self.status}")


def spectral_gap(beta: float) -> float:
    return FOUR_PI2 / beta


def verify_spa_estimates(sigma: float, beta: float, t_samples, grid: Grid | None = None,
                         kappa: float | None = None) -> EstimateReport:
    """Sup over ``t_samples`` of opnorm(t) t^{sigma/2} e^{kappa t}.

    kappa defaults to half the spectral gap. The reported constant also takes
    the t -> 0+ limit of the scaled norm into account (it is 1 for sigma = 0,
    where the scaled norm is decreasing, and 0 on a finite grid otherwise).
    """
    if not 0 <= sigma < 2:
        raise SigmaOutOfRange(f"sigma {sigma} not in [0, 2)")
    if not beta > 0:
        raise NonPositiveBeta(f"beta must be > 0, got {beta}")
    grid = grid or make_grid(2, [64, 64])
    kappa = spectral_gap(beta) / 2.0 if kappa is None else kappa
    ts = np.asarray(sorted(float(t) for t in t_samples))
    if ts.size == 0 or np.any(ts <= 0):
        raise NegativeTime("t_samples must be non-empty and positive")
    lam = _nonzero_eigenvalues(grid)
    # (1+lam)^{sigma/2} exp(-t lam / beta) t^{sigma/2} exp(kappa t), evaluated in logs
    log_sym = (sigma / 2.0) * np.log1p(lam)
    scaled = np.array([
        np.exp(np.max(log_sym - t / beta * lam) + (sigma / 2.0) * np.log(t) + kappa * t) for t in ts
    ])
    i = int(np.argmax(scaled))
    limit0 = 1.0 if sigma == 0 else 0.0
    constant = max(float(scaled[i]), limit0)
    t_worst = 0.0 if limit0 >= scaled[i] else float(ts[i])
    return EstimateReport(
        sigma=float(sigma), beta=float(beta), kappa=float(kappa), grid_sizes=grid.sizes,
        constant=constant, t_worst=t_worst, sampled_sup=float(scaled[i]), limit_at_zero=limit0,
        t_samples=ts, scaled=scaled,
    )
