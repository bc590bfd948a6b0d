"""Marginal density, conditional mean force and the decoupled denominator."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.fft as sfft

from .errors import (
    DimensionTooLow,
    DomainViolation,
    NegativeTime,
    NonFiniteInput,
    NonPositiveBeta,
)
from .grid import TWO_PI, Grid, check_field
from .potential import PotentialSpec, eval_fields

DEFAULT_FLOOR = 1e-12


@dataclass(frozen=True)
class BiasState:
    """Conditional force ``phi`` and the marginal it was divided by.

    ``floor_used`` is the positivity floor applied to the denominator (0 when
    the guard was run in strict mode).
    """

    phi: np.ndarray
    marginal: np.ndarray
    floor_used: float
    numerator: np.ndarray | None = None


def _slice_integral(grid: Grid, values: np.ndarray) -> np.ndarray:
    # same rectangle quadrature as grid.integrate, restricted to axes 1..n-1
    h_rest = float(np.prod(grid.spacing[1:]))
    return h_rest * values.sum(axis=tuple(range(1, grid.n)))


def marginal(grid: Grid, values: np.ndarray) -> np.ndarray:
    """Integrate out x2..xn, leaving a function of x1 on ``grid.sizes[0]`` nodes."""
    if grid.n < 2:
        raise DimensionTooLow("the marginal needs n >= 2")
    values = check_field(grid, values)
    return _slice_integral(grid, values)


def conditional_force(grid: Grid, values: np.ndarray, pot: PotentialSpec,
                      floor: float = DEFAULT_FLOOR, denominator: np.ndarray | None = None) -> BiasState:
    """Slice average of dV/dx1 weighted by the density.

    The numerator and the marginal share the nodal rectangle quadrature, so at
    grid level phi is a convex combination of the slice values of dV/dx1
    whenever the density is non-negative.

    ``denominator`` replaces the marginal by an externally evolved profile
    (the decoupled formulation). With ``floor == 0`` a non-positive
    denominator raises :class:`DomainViolation`; otherwise it is clamped.
    """
    if grid.n < 2:
        raise DimensionTooLow("the conditional force needs n >= 2")
    values = check_field(grid, values)
    if floor < 0:
        raise ValueError(f"floor must be >= 0, got {floor}")
    if not np.all(np.isfinite(values)):
        raise NonFiniteInput("density has non-finite values")
    d1V = eval_fields(pot, grid).d1V
    num = _slice_integral(grid, d1V * values)
    den = marginal(grid, values) if denominator is None else np.asarray(denominator, dtype=float)
    if floor == 0.0:
        if np.any(den <= 0):
            j = int(np.argmin(den))
            raise DomainViolation(f"marginal {den[j]:.3e} <= 0 at x1 = {j / grid.sizes[0]:.6f}")
        safe = den
    else:
        safe = np.maximum(den, floor)
    phi = num / safe
    return BiasState(phi=phi, marginal=den, floor_used=float(floor), numerator=num)


def _heat_multiplier_1d(N: int, t: float, beta: float) -> np.ndarray:
    k = np.arange(N // 2 + 1, dtype=float)
    return np.exp(-t / beta * (TWO_PI * k) ** 2)


def evolve_denominator(m0: np.ndarray, t: float, beta: float) -> np.ndarray:
    """Exact 1-D heat flow ``d_t m = beta^{-1} d_11 m`` applied for time ``t``."""
    if t < 0:
        raise NegativeTime(f"t must be >= 0, got {t}")
    if not beta > 0:
        raise NonPositiveBeta(f"beta must be > 0, got {beta}")
    m0 = np.asarray(m0, dtype=float)
    if t == 0:
        return m0.copy()
    N = m0.shape[0]
    return sfft.irfft(_heat_multiplier_1d(N, t, beta) * sfft.rfft(m0), n=N)
