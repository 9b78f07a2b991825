"""Uniform 1D and 2D sampling grids."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np


@dataclass(frozen=True)
class Grid1D:
    """Uniform grid of ``n`` points on the closed interval ``[a, b]``."""

    a: float
    b: float
    n: int

    def __post_init__(self):
        if not (np.isfinite(self.a) and np.isfinite(self.b)):
            raise ValueError("grid bounds must be finite")
        if not self.b > self.a:
            raise ValueError(f"grid needs b > a, got a={self.a}, b={self.b}")
        if int(self.n) != self.n or self.n < 3:
            raise ValueError(f"grid needs at least 3 points, got n={self.n}")
        object.__setattr__(self, "n", int(self.n))

    @property
    def h(self) -> float:
        return (self.b - self.a) / (self.n - 1)

    @cached_property
    def x(self) -> np.ndarray:
        x = np.linspace(self.a, self.b, self.n)
        x.flags.writeable = False
        return x

    @cached_property
    def weights(self) -> np.ndarray:
        """Trapezoid quadrature weights; they sum to ``b - a``."""
        w = np.full(self.n, self.h)
        w[0] = w[-1] = 0.5 * self.h
        w.flags.writeable = False
        return w

    def integrate(self, values) -> float:
        return float(np.dot(self.weights, values))

    def refined(self) -> Grid1D:
        """Same interval with the spacing halved."""
        return Grid1D(self.a, self.b, 2 * self.n - 1)

    def subgrid(self, start: int, stop: int) -> Grid1D:
        """Grid made of the nodes ``start:stop`` (stop exclusive)."""
        x = self.x
        return Grid1D(float(x[start]), float(x[stop - 1]), stop - start)


@dataclass(frozen=True)
class Grid2D:
    """Tensor product of two uniform grids; arrays are indexed ``[ix, iy]``."""

    gx: Grid1D
    gy: Grid1D

    @property
    def shape(self) -> tuple[int, int]:
        return (self.gx.n, self.gy.n)

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        return np.meshgrid(self.gx.x, self.gy.x, indexing="ij")

    @property
    def weights(self) -> np.ndarray:
        return np.outer(self.gx.weights, self.gy.weights)

    def integrate(self, values) -> float:
        return float(np.sum(self.weights * values))

    def refined(self) -> Grid2D:
        return Grid2D(self.gx.refined(), self.gy.refined())
