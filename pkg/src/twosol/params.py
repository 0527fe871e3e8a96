"""Physical parameters and grid specifications."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ModelParams:
    """Dimension N, nonlinearity exponent p and damping alpha.

    The exponent must satisfy p > 2 and, for N >= 3, the energy
    subcriticality bound p < (N+2)/(N-2).
    """

    N: int
    p: float
    alpha: float

    def __post_init__(self):
        if self.N not in (1, 2, 3, 4, 5):
            raise ValueError(f"N must be in 1..5, got {self.N}")
        if not self.p > 2:
            raise ValueError(f"p must exceed 2, got {self.p}")
        if self.N >= 3 and not self.p < (self.N + 2) / (self.N - 2):
            raise ValueError(
                f"p={self.p} is energy supercritical for N={self.N}"
            )
        if not self.alpha > 0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")

    def f(self, u):
        """Sign-preserving power nonlinearity |u|^(p-1) u."""
        return np.abs(u) ** (self.p - 1) * u

    def fprime(self, u):
        return self.p * np.abs(u) ** (self.p - 1)

    def F(self, u):
        """Antiderivative of f: |u|^(p+1)/(p+1)."""
        return np.abs(u) ** (self.p + 1) / (self.p + 1)


@dataclass(frozen=True)
class RadialGridSpec:
    """Uniform radial grid on [0, r_max] with spacing h."""

    r_max: float = 30.0
    h: float = 1e-3

    def __post_init__(self):
        if self.r_max < 20:
            raise ValueError("r_max must be at least 20")
        if self.h <= 0:
            raise ValueError("h must be positive")
        ratio = self.r_max / self.h
        if abs(ratio - round(ratio)) > 1e-9 * ratio:
            raise ValueError("r_max / h must be an integer")

    @property
    def n(self) -> int:
        """Number of intervals (nodes = n + 1)."""
        return round(self.r_max / self.h)

    @property
    def r(self) -> np.ndarray:
        return np.arange(self.n + 1) * self.h

    def coarsen(self) -> "RadialGridSpec":
        """Grid with doubled spacing (n must be even)."""
        if self.n % 2 != 0:
            raise ValueError("cannot coarsen: odd interval count")
        return RadialGridSpec(self.r_max, 2 * self.h)


@dataclass(frozen=True)
class Grid1D:
    """Uniform 1D spatial grid with n nodes on [x_min, x_max]."""

    x_min: float
    x_max: float
    n: int

    def __post_init__(self):
        if self.n < 1001:
            raise ValueError("n must be at least 1001")
        if self.x_max <= self.x_min:
            raise ValueError("x_max must exceed x_min")

    @property
    def h(self) -> float:
        return (self.x_max - self.x_min) / (self.n - 1)

    @property
    def x(self) -> np.ndarray:
        return np.linspace(self.x_min, self.x_max, self.n)


def sphere_area(N: int) -> float:
    """Surface area |S^{N-1}| of the unit sphere in R^N (|S^0| = 2)."""
    return 2.0 * math.pi ** (N / 2.0) / math.gamma(N / 2.0)


def simpson_weights(n_nodes: int, h: float) -> np.ndarray:
    """Composite Simpson weights on a uniform grid.

    Falls back to a trapezoid closure on the last interval when the
    interval count is odd.
    """
    w = np.zeros(n_nodes)
    if n_nodes < 2:
        return w
    m = n_nodes if n_nodes % 2 == 1 else n_nodes - 1
    if m >= 3:
        w[0:m:2] = 2.0
        w[1:m:2] = 4.0
        w[0] = 1.0
        w[m - 1] = 1.0
        w[:m] *= h / 3.0
    if m != n_nodes:
        w[-2] += h / 2.0
        w[-1] += h / 2.0
    return w
