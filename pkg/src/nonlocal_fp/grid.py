"""Periodic grids on the unit torus [0, 1)^n and their spectral machinery.

Fields are plain ``numpy`` arrays of shape ``grid.shape`` (row-major, axis 0
slowest). Axis 0 is always the reaction coordinate x1.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.fft as sfft

from .errors import (
    AxisOutOfRange,
    GridMismatch,
    OddSize,
    TooSmall,
    UnsupportedOrder,
    ZeroDim,
)

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid with ``sizes[i]`` nodes along axis ``i``."""

    sizes: tuple[int, ...]

    @property
    def n(self) -> int:
        return len(self.sizes)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.sizes

    @property
    def spacing(self) -> tuple[float, ...]:
        return tuple(1.0 / N for N in self.sizes)

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.spacing))

    @property
    def size(self) -> int:
        return int(np.prod(self.sizes))

    def axis_nodes(self, axis: int) -> np.ndarray:
        N = self.sizes[axis]
        return np.arange(N) / N

    @cached_property
    def coords(self) -> tuple[np.ndarray, ...]:
        """Broadcastable node coordinates, one array per axis."""
        return tuple(
            self.axis_nodes(i).reshape([-1 if j == i else 1 for j in range(self.n)])
            for i in range(self.n)
        )

    def marginal_grid(self) -> Grid:
        """The 1-D grid carrying functions of x1 alone."""
        return Grid((self.sizes[0],))

    # -- wavenumbers -------------------------------------------------------

    @cached_property
    def wavenumbers(self) -> tuple[np.ndarray, ...]:
        """Integer wavenumbers in full-FFT layout, broadcastable."""
        return tuple(
            (np.fft.fftfreq(N) * N).reshape([-1 if j == i else 1 for j in range(self.n)])
            for i, N in enumerate(self.sizes)
        )

    @cached_property
    def rwavenumbers(self) -> tuple[np.ndarray, ...]:
        """Integer wavenumbers in real-FFT layout (last axis halved), broadcastable."""
        ks = []
        for i, N in enumerate(self.sizes):
            if i == self.n - 1:
                k = np.arange(N // 2 + 1, dtype=float)
            else:
                k = np.fft.fftfreq(N) * N
            ks.append(k.reshape([-1 if j == i else 1 for j in range(self.n)]))
        return tuple(ks)

    @cached_property
    def rksq(self) -> np.ndarray:
        """|k|^2 on the real-FFT layout."""
        return sum(k**2 for k in self.rwavenumbers)

    @cached_property
    def ksq(self) -> np.ndarray:
        """|k|^2 on the full-FFT layout."""
        return sum(k**2 for k in self.wavenumbers)

    def derivative_multiplier(self, axis: int, order: int) -> np.ndarray:
        """(2 pi i k_axis)^order on the real-FFT layout, Nyquist zeroed for odd order."""
        if not 0 <= axis < self.n:
            raise AxisOutOfRange(f"axis {axis} not in [0, {self.n})")
        if order not in (1, 2):
            raise UnsupportedOrder(f"order {order} not in {{1, 2}}")
        return self._derivative_multiplier(axis, order)

    def _derivative_multiplier(self, axis: int, order: int) -> np.ndarray:
        cache = self.__dict__.setdefault("_dmult", {})
        key = (axis, order)
        if key not in cache:
            k = self.rwavenumbers[axis].copy()
            if order % 2 == 1:
                k[np.abs(k) == self.sizes[axis] // 2] = 0.0
            cache[key] = (TWO_PI * 1j * k) ** order
        return cache[key]

    # -- real transforms used on the hot path ------------------------------

    def rfft(self, values: np.ndarray) -> np.ndarray:
        return sfft.rfftn(values)

    def irfft(self, coeffs: np.ndarray) -> np.ndarray:
        return sfft.irfftn(coeffs, s=self.shape)


def make_grid(n: int, sizes) -> Grid:
    """Build a grid; every size must be even and at least 8."""
    if n < 1:
        raise ZeroDim(f"dimension must be >= 1, got {n}")
    sizes = tuple(int(s) for s in sizes)
    if len(sizes) != n:
        raise GridMismatch(f"expected {n} sizes, got {len(sizes)}")
    for s in sizes:
        if s % 2:
            raise OddSize(f"grid size {s} is odd")
        if s < 8:
            raise TooSmall(f"grid size {s} < 8")
    return Grid(sizes)


def check_field(grid: Grid, values: np.ndarray) -> np.ndarray:
    values = np.asarray(values)
    if values.shape != grid.shape:
        raise GridMismatch(f"field shape {values.shape} does not match grid {grid.shape}")
    return values


def integrate(grid: Grid, values: np.ndarray) -> float:
    """Periodic rectangle rule, spectrally exact for band-limited integrands."""
    values = check_field(grid, values)
    return float(grid.cell_volume * values.sum())


def forward_transform(grid: Grid, values: np.ndarray) -> np.ndarray:
    """Complex coefficients normalised so that ``coeffs[0, ..., 0]`` is the mean.

    The result uses the standard FFT ordering; ``grid.wavenumbers`` gives the
    integer wavevector of every entry.
    """
    values = check_field(grid, values)
    return sfft.fftn(values) / grid.size


def inverse_transform(grid: Grid, coeffs: np.ndarray) -> np.ndarray:
    """Inverse of :func:`forward_transform`; returns the real part."""
    coeffs = np.asarray(coeffs)
    if coeffs.shape != grid.shape:
        raise GridMismatch(f"coefficient shape {coeffs.shape} does not match grid {grid.shape}")
    return np.real(sfft.ifftn(coeffs * grid.size))


def spectral_derivative(grid: Grid, values: np.ndarray, axis: int, order: int = 1) -> np.ndarray:
    """Fourier-collocation derivative of a real field along ``axis``."""
    values = check_field(grid, values)
    mult = grid.derivative_multiplier(axis, order)
    return grid.irfft(mult * grid.rfft(values))
