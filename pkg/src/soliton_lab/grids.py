"""Uniform spatial and frequency grids."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import ConfigError, GridMismatchError


@dataclass(frozen=True)
class SpatialGrid:
    """Periodic grid x_j = -L + j*h, j = 0..N-1, with h = 2L/N.

    The point set is closed under x -> -x once -L and +L are identified,
    which is what `reflect` relies on.
    """

    half_length: float = 40.0
    points: int = 4096

    def __post_init__(self):
        n = self.points
        if n < 8 or n & (n - 1):
            raise ConfigError(f"grid.n must be a power of two >= 8, got {n}")
        if not self.half_length > 0:
            raise ConfigError(f"grid.half_length must be positive, got {self.half_length}")

    @property
    def spacing(self) -> float:
        return 2.0 * self.half_length / self.points

    @cached_property
    def x(self) -> np.ndarray:
        return -self.half_length + self.spacing * np.arange(self.points)

    @cached_property
    def wavenumbers(self) -> np.ndarray:
        return 2.0 * np.pi * np.fft.fftfreq(self.points, d=self.spacing)

    def reflect(self, f: np.ndarray) -> np.ndarray:
        """Return f(-x) sampled on the same grid (last axis)."""
        return np.roll(f[..., ::-1], 1, axis=-1)

    def even_part(self, f: np.ndarray) -> np.ndarray:
        return 0.5 * (f + self.reflect(f))

    def odd_part(self, f: np.ndarray) -> np.ndarray:
        return 0.5 * (f - self.reflect(f))

    def integrate(self, f: np.ndarray) -> np.ndarray:
        # trapezoid on a periodic grid is the plain Riemann sum
        return self.spacing * np.sum(f, axis=-1)

    def interior(self, fraction: float = 0.5) -> np.ndarray:
        return np.abs(self.x) <= fraction * self.half_length

    def check(self, f: np.ndarray) -> None:
        if np.shape(f)[-1] != self.points:
            raise GridMismatchError(
                f"field has {np.shape(f)[-1]} samples, grid has {self.points}")


@dataclass(frozen=True)
class FrequencyGrid:
    """Midpoint grid on [-Xi, Xi]; no node sits at xi = 0."""

    max_freq: float = 12.0
    points: int = 2048

    def __post_init__(self):
        if self.points < 2 or self.points % 2:
            raise ConfigError(f"frequency grid needs an even number of nodes, got {self.points}")
        if not self.max_freq > 0:
            raise ConfigError(f"max_freq must be positive, got {self.max_freq}")

    @property
    def spacing(self) -> float:
        return 2.0 * self.max_freq / self.points

    @cached_property
    def xi(self) -> np.ndarray:
        return -self.max_freq + self.spacing * (np.arange(self.points) + 0.5)

    def integrate(self, g: np.ndarray) -> np.ndarray:
        return self.spacing * np.sum(g, axis=-1)

    def mirror(self, g: np.ndarray) -> np.ndarray:
        """Return g(-xi); the node set is symmetric so this is a reversal."""
        return g[..., ::-1]

    def nyquist_safe(self, grid: SpatialGrid, margin: float = 0.05) -> bool:
        return self.max_freq * grid.spacing <= np.pi * (1.0 - margin)

    @classmethod
    def resolving(cls, max_freq: float, reach: float) -> "FrequencyGrid":
        """Grid fine enough that e^{i x xi} is sampled at <= 0.25 rad per node for |x| <= reach."""
        m = int(np.ceil(2.0 * max_freq * reach / 0.25))
        m = 1 << max(int(np.ceil(np.log2(max(m, 2)))), 1)
        return cls(max_freq=max_freq, points=m)
