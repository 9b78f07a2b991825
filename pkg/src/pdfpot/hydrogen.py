"""Hydrogen atom in momentum space as a 2D target density.

The momentum wavefunction is ``F_nl(p) Y_lm(theta_p, phi_p)``.  Integrating
``|psi|^2 p^2 sin(theta)`` over ``phi_p`` leaves a density on the flat
``(p_r, theta_p)`` rectangle, which is inverted with the 2D version of the
exponent formula treating ``(p_r, theta_p)`` as Cartesian coordinates.

Momenta are in units of ``p0 = 2 pi hbar / a0``; atomic units (``hbar / a0``)
appear only inside the closed form and the quadrature oracle.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from math import factorial, pi

import numpy as np
from scipy import integrate
from scipy.special import eval_gegenbauer, eval_genlaguerre, lpmv, spherical_jn

from .errors import EmptyCurveError
from .grids import Grid1D, Grid2D
from .inverse import OffsetConvention, PotentialField, UnitSystem

__all__ = [
    "HQuantumNumbers",
    "MomentumGrid",
    "P0_IN_ATOMIC_UNITS",
    "HYDROGEN_FLOOR",
    "radial_momentum_amplitude",
    "radial_momentum_amplitude_oracle",
    "position_radial",
    "pdf_2d",
    "exponent_2d",
    "potential_2d",
    "normalization_2d",
]

#: ``p0 = 2 pi hbar / a0`` expressed in ``hbar / a0``.
P0_IN_ATOMIC_UNITS = 2 * pi

#: Relative density floor; the nodal lines of ``P`` fall below it.
HYDROGEN_FLOOR = 1e-14


@dataclass(frozen=True)
class HQuantumNumbers:
    n: int
    l: int  # noqa: E741
    m: int = 0

    def __post_init__(self):
        n, l, m = self.n, self.l, self.m
        if not all(int(v) == v for v in (n, l, m)):
            raise ValueError("quantum numbers must be integers")
        if not 1 <= n <= 4:
            raise ValueError(f"n must be in 1..4, got {n}")
        if not 0 <= l <= n - 1:
            raise ValueError(f"l must be in 0..{n - 1}, got {l}")
        if abs(m) > l:
            raise ValueError(f"|m| must be <= l={l}, got {m}")


@dataclass(frozen=True)
class MomentumGrid:
    """Rectangle in ``(p_r, theta_p)``; ``p_r`` in units of ``p0``."""

    p_max: float = 1.0
    n_p: int = 401
    n_theta: int = 401
    p_min: float = 0.0
    theta_min: float = 0.0
    theta_max: float = pi

    def __post_init__(self):
        if self.p_min < 0:
            raise ValueError("p_r must be non-negative")
        if not (0 <= self.theta_min < self.theta_max <= pi):
            raise ValueError("theta_p range must lie in [0, pi]")

    @property
    def grid(self) -> Grid2D:
        return Grid2D(Grid1D(self.p_min, self.p_max, self.n_p), Grid1D(self.theta_min, self.theta_max, self.n_theta))


def _check(n, l):
    HQuantumNumbers(n, l, 0)


# --- radial part -----------------------------------------------------------


def _radial_const(n, l):
    return math.sqrt(2 / pi * factorial(n - l - 1) / factorial(n + l)) * n**2 * 2 ** (2 * l + 2) * factorial(l)


def _gegenbauer(order, alpha, xi):
    if order < 0:
        return np.zeros_like(xi)
    return eval_gegenbauer(order, alpha, xi)


def _amplitude_au(n, l, q):
    """Closed-form ``F_nl(q)`` in atomic units (Gegenbauer form)."""
    q = np.asarray(q, dtype=float)
    s = n * n * q * q
    xi = (s - 1) / (s + 1)
    return _radial_const(n, l) * (n * q) ** l / (s + 1) ** (l + 2) * _gegenbauer(n - l - 1, l + 1, xi)


def radial_momentum_amplitude(n: int, l: int, p_r) -> np.ndarray:  # noqa: E741
    """``|F_nl(p_r)|`` with ``p_r`` in units of ``p0``.

    Normalized so that the integral of ``F**2 p_r**2`` over ``[0, inf)`` is 1.
    """
    _check(n, l)
    c = P0_IN_ATOMIC_UNITS
    return np.abs(c**1.5 * _amplitude_au(n, l, c * np.asarray(p_r, dtype=float)))


def position_radial(n: int, l: int, r) -> np.ndarray:  # noqa: E741
    """Position-space radial function ``R_nl(r)``, ``r`` in Bohr radii."""
    r = np.asarray(r, dtype=float)
    norm = math.sqrt((2 / n) ** 3 * factorial(n - l - 1) / (2 * n * factorial(n + l)))
    rho = 2 * r / n
    return norm * np.exp(-r / n) * rho**l * eval_genlaguerre(n - l - 1, 2 * l + 1, rho)


def radial_momentum_amplitude_oracle(n: int, l: int, p_r: float) -> float:  # noqa: E741
    """``|F_nl(p_r)|`` from the spherical Bessel transform of ``R_nl`` by
    adaptive quadrature; independent of the closed form."""
    _check(n, l)
    c = P0_IN_ATOMIC_UNITS
    q = c * float(p_r)

    def integrand(r):
        return r * r * spherical_jn(l, q * r) * position_radial(n, l, r)

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, _ = integrate.quad(integrand, 0, np.inf, epsabs=0, epsrel=1e-13, limit=500)
    return abs(c**1.5 * math.sqrt(2 / pi) * val)


def _log_radial_derivs(n, l, p):
    """First and second ``p``-derivatives of ``ln(p^2 F(p)^2)`` in ``p0`` units."""
    c = P0_IN_ATOMIC_UNITS
    q = c * p
    s = n * n * q * q
    xi = (s - 1) / (s + 1)
    N = n - l - 1
    a = l + 1
    g0 = _gegenbauer(N, a, xi)
    g1 = 2 * a * _gegenbauer(N - 1, a + 1, xi)
    g2 = 4 * a * (a + 1) * _gegenbauer(N - 2, a + 2, xi)
    xi1 = 4 * n * n * q / (s + 1) ** 2
    xi2 = 4 * n * n * (1 - 3 * s) / (s + 1) ** 3
    w = g1 / g0
    # d/dq and d2/dq2 of ln|F(q)|
    d1 = l / q - (l + 2) * 2 * n * n * q / (s + 1) + w * xi1
    d2 = -l / q**2 - (l + 2) * 2 * n * n * (1 - s) / (s + 1) ** 2 + (g2 / g0 - w * w) * xi1**2 + w * xi2
    return 2 / p + 2 * c * d1, -2 / p**2 + 2 * c * c * d2


# --- angular part ----------------------------------------------------------


def _ylm_norm2(l, m):  # noqa: E741
    return (2 * l + 1) / (4 * pi) * factorial(l - abs(m)) / factorial(l + abs(m))


def _angular_density(l, m, theta, jacobian=True):  # noqa: E741
    t = np.cos(theta)
    y2 = _ylm_norm2(l, m) * lpmv(abs(m), l, t) ** 2
    dens = 2 * pi * y2
    return dens * np.sin(theta) if jacobian else dens


def _log_angular_derivs(l, m, theta, jacobian=True):  # noqa: E741
    """First and second ``theta``-derivatives of the log angular density."""
    m = abs(m)
    t = np.cos(theta)
    st = np.sin(theta)
    cot = t / st
    y = lpmv(m, l, t)
    ylm1 = lpmv(m, l - 1, t) if l >= 1 else np.zeros_like(t)
    # dy/dtheta from (1 - t^2) dP/dt = (l + m) P_{l-1} - l t P_l
    w = -((l + m) * ylm1 - l * t * y) / (st * y)
    # associated Legendre equation in theta gives y'' / y
    dw = -cot * w - l * (l + 1) + m * m / st**2 - w * w
    d1 = 2 * w
    d2 = 2 * dw
    if jacobian:
        d1 = d1 + cot
        d2 = d2 - 1 / st**2
    return d1, d2


# --- public 2D operations --------------------------------------------------


def pdf_2d(q: HQuantumNumbers, p_r, theta_p, jacobian: bool = True):
    """Density on the ``(p_r, theta_p)`` rectangle with ``phi_p`` integrated out.

    ``P = 2 pi p_r^2 sin(theta_p) F_nl(p_r)^2 |Y_lm(theta_p)|^2``.  With
    ``jacobian=False`` the ``sin(theta_p)`` factor is dropped (that variant is
    not normalized on the rectangle).
    """
    p_r = np.asarray(p_r, dtype=float)
    theta_p = np.asarray(theta_p, dtype=float)
    radial = p_r**2 * radial_momentum_amplitude(q.n, q.l, p_r) ** 2
    return radial * _angular_density(q.l, q.m, theta_p, jacobian)


def exponent_2d(q: HQuantumNumbers, p_r, theta_p, jacobian: bool = True):
    """``f = -ln P`` and its partial derivatives ``(f, f_p, f_pp, f_t, f_tt)``."""
    p_r = np.asarray(p_r, dtype=float)
    theta_p = np.asarray(theta_p, dtype=float)
    with np.errstate(all="ignore"):
        f = -np.log(pdf_2d(q, p_r, theta_p, jacobian))
        rp1, rp2 = _log_radial_derivs(q.n, q.l, p_r)
        ra1, ra2 = _log_angular_derivs(q.l, q.m, theta_p, jacobian)
    return f, -rp1, -rp2, -ra1, -ra2


def normalization_2d(q: HQuantumNumbers, grid: MomentumGrid) -> float:
    """Simpson quadrature of ``P`` over the grid rectangle."""
    g = grid.grid
    pp, tt = g.mesh()
    dens = pdf_2d(q, pp, tt)
    inner = integrate.simpson(dens, x=g.gy.x, axis=1)
    return float(integrate.simpson(inner, x=g.gx.x))


def potential_2d(q: HQuantumNumbers, grid: MomentumGrid, units: UnitSystem = UnitSystem(), jacobian: bool = True) -> PotentialField:
    """Potential on the ``(p_r, theta_p)`` rectangle whose ground-state
    density is ``pdf_2d``.

    Cells where ``P`` is below ``HYDROGEN_FLOOR`` times its grid maximum
    (edges and nodal lines) are masked.  The minimum over valid cells is set
    to zero.
    """
    g = grid.grid
    pp, tt = g.mesh()
    dens = pdf_2d(q, pp, tt, jacobian)
    f, fp, fpp, ft, ftt = exponent_2d(q, pp, tt, jacobian)
    top = np.max(dens)
    with np.errstate(invalid="ignore"):
        raw = units.hbar2_over_4m * (-(fpp + ftt) + 0.5 * (fp**2 + ft**2))
        mask = (dens >= HYDROGEN_FLOOR * top) & np.isfinite(raw) & np.isfinite(f)
    if not np.any(mask):
        raise EmptyCurveError("no valid cell on the momentum grid")
    raw = np.where(mask, raw, np.nan)
    e = -float(np.nanmin(raw))
    return PotentialField(g, raw + e, mask, e, OffsetConvention.MIN_ZERO)
