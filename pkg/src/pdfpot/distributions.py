"""Target densities ``P(x)`` and their exponents ``f = -ln(P / A)``.

Seven closed-form families are supported together with tabulated densities
sampled on a uniform grid.  For the closed-form families the density is
already normalized (``A = 1``) and ``f``, ``f'`` and ``f''`` are evaluated
analytically.  Tabulated densities are differentiated numerically on their
own grid.

Every evaluator accepts scalars or arrays and broadcasts like numpy.
"""

from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass, field
from functools import cached_property
from types import MappingProxyType
from typing import Mapping

import numpy as np
from scipy.special import betaln, gammaln

from .errors import DomainError, InputFormatError, NormalizationError
from .grids import Grid1D

__all__ = [
    "Family",
    "Domain",
    "DistributionSpec",
    "ExponentEval",
    "TabulatedPdf",
    "gaussian",
    "lorentzian",
    "gumbel",
    "logistic",
    "rayleigh",
    "chi",
    "beta",
    "tabulated",
    "eval_pdf",
    "eval_exponent",
    "normalization",
    "sample_on_grid",
    "read_tabulated_csv",
    "DEFAULT_FLOOR",
]

#: Cells with ``P < DEFAULT_FLOOR * max(P)`` are treated as invalid.
DEFAULT_FLOOR = 1e-300

_LOG_FLOOR = -math.log(DEFAULT_FLOOR)


class Family(str, enum.Enum):
    GAUSSIAN = "gaussian"
    LORENTZIAN = "lorentzian"
    GUMBEL = "gumbel"
    LOGISTIC = "logistic"
    RAYLEIGH = "rayleigh"
    CHI = "chi"
    BETA = "beta"
    TABULATED = "tabulated"


CLOSED_FORM = (
    Family.GAUSSIAN,
    Family.LORENTZIAN,
    Family.GUMBEL,
    Family.LOGISTIC,
    Family.RAYLEIGH,
    Family.CHI,
    Family.BETA,
)


@dataclass(frozen=True)
class Domain:
    """Interval with open/closed endpoint flags; infinite ends are always open."""

    lo: float
    hi: float
    lo_closed: bool = False
    hi_closed: bool = False

    def contains(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        above = x >= self.lo if self.lo_closed else x > self.lo
        below = x <= self.hi if self.hi_closed else x < self.hi
        return above & below

    def check(self, x):
        inside = self.contains(x)
        if not np.all(inside):
            bad = np.asarray(x, dtype=float)[~inside] if np.ndim(x) else x
            first = float(np.ravel(bad)[0])
            raise DomainError(f"x={first!r} outside domain {self}")

    def __str__(self):
        left = "[" if self.lo_closed else "("
        right = "]" if self.hi_closed else ")"
        return f"{left}{self.lo}, {self.hi}{right}"


_REAL_LINE = Domain(-math.inf, math.inf)
_HALF_LINE = Domain(0.0, math.inf, lo_closed=True)
_UNIT = Domain(0.0, 1.0, lo_closed=True, hi_closed=True)

_PARAMS = {
    Family.GAUSSIAN: ("sigma", "x0"),
    Family.LORENTZIAN: ("gamma", "x0"),
    Family.GUMBEL: ("beta", "x0"),
    Family.LOGISTIC: ("s", "x0"),
    Family.RAYLEIGH: ("sigma",),
    Family.CHI: ("k", "sigma"),
    Family.BETA: ("alpha", "beta"),
    Family.TABULATED: (),
}

_SCALE = {
    Family.GAUSSIAN: "sigma",
    Family.LORENTZIAN: "gamma",
    Family.GUMBEL: "beta",
    Family.LOGISTIC: "s",
    Family.RAYLEIGH: "sigma",
    Family.CHI: "sigma",
}


@dataclass(frozen=True)
class ExponentEval:
    """Exponent ``f`` and its first two derivatives, with a validity mask."""

    f: np.ndarray
    fp: np.ndarray
    fpp: np.ndarray
    valid: np.ndarray


@dataclass(frozen=True, eq=False)
class TabulatedPdf:
    """Non-negative density samples on a uniform grid.

    ``floor`` is relative: samples below ``floor * max(values)`` are invalid.
    """

    grid: Grid1D
    values: np.ndarray
    floor: float = DEFAULT_FLOOR

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.shape != (self.grid.n,):
            raise ValueError(f"expected {self.grid.n} samples, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("tabulated density must be finite")
        if np.any(v < 0):
            raise ValueError("tabulated density must be non-negative")
        if not self.floor > 0:
            raise ValueError("floor must be positive")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    @property
    def mass(self) -> float:
        return self.grid.integrate(self.values)

    def normalized(self) -> TabulatedPdf:
        mass = self.mass
        if not (np.isfinite(mass) and mass > 0):
            raise NormalizationError(f"density has non-positive mass {mass}")
        return TabulatedPdf(self.grid, self.values / mass, self.floor)

    @cached_property
    def _exponent(self) -> ExponentEval:
        return _differentiate_log(self.grid.h, self.values, self.floor)


@dataclass(frozen=True)
class DistributionSpec:
    """A named density family and its parameters.

    Use the factory functions (:func:`gaussian`, :func:`chi`, ...) rather than
    building this directly; they validate parameters.
    """

    family: Family
    params: Mapping[str, float] = field(default_factory=dict)
    table: TabulatedPdf | None = field(default=None, compare=False)

    def __post_init__(self):
        fam = Family(self.family)
        object.__setattr__(self, "family", fam)
        names = _PARAMS[fam]
        missing = [k for k in names if k not in self.params]
        extra = [k for k in self.params if k not in names]
        if missing or extra:
            raise ValueError(f"{fam.value}: expected parameters {names}, got {tuple(self.params)}")
        p = {k: float(self.params[k]) for k in names}
        if not all(np.isfinite(v) for v in p.values()):
            raise ValueError(f"{fam.value}: parameters must be finite")
        if fam in _SCALE and not p[_SCALE[fam]] > 0:
            raise ValueError(f"{fam.value}: scale {_SCALE[fam]} must be positive")
        if fam is Family.CHI and not p["k"] >= 3:
            raise ValueError("chi: only k >= 3 is supported")
        if fam is Family.BETA and not (p["alpha"] > 0 and p["beta"] > 0):
            raise ValueError("beta: alpha and beta must be positive")
        if fam is Family.TABULATED and self.table is None:
            raise ValueError("tabulated spec needs a table")
        object.__setattr__(self, "params", MappingProxyType(p))

    def __getitem__(self, key):
        return self.params[key]

    @property
    def domain(self) -> Domain:
        if self.family in (Family.RAYLEIGH, Family.CHI):
            return _HALF_LINE
        if self.family is Family.BETA:
            return _UNIT
        if self.family is Family.TABULATED:
            g = self.table.grid
            return Domain(g.a, g.b, True, True)
        return _REAL_LINE

    @property
    def is_closed_form(self) -> bool:
        return self.family is not Family.TABULATED

    def __str__(self):
        args = ", ".join(f"{k}={v:g}" for k, v in self.params.items())
        return f"{self.family.value}({args})"


def gaussian(sigma=1.0, x0=0.0) -> DistributionSpec:
    return DistributionSpec(Family.GAUSSIAN, {"sigma": sigma, "x0": x0})


def lorentzian(gamma=1.0, x0=0.0) -> DistributionSpec:
    return DistributionSpec(Family.LORENTZIAN, {"gamma": gamma, "x0": x0})


def gumbel(beta=1.0, x0=0.0) -> DistributionSpec:
    return DistributionSpec(Family.GUMBEL, {"beta": beta, "x0": x0})


def logistic(s=1.0, x0=0.0) -> DistributionSpec:
    return DistributionSpec(Family.LOGISTIC, {"s": s, "x0": x0})


def rayleigh(sigma=1.0) -> DistributionSpec:
    return DistributionSpec(Family.RAYLEIGH, {"sigma": sigma})


def chi(k, sigma=1.0) -> DistributionSpec:
    return DistributionSpec(Family.CHI, {"k": k, "sigma": sigma})


def beta(alpha, beta) -> DistributionSpec:
    return DistributionSpec(Family.BETA, {"alpha": alpha, "beta": beta})


def tabulated(table: TabulatedPdf) -> DistributionSpec:
    return DistributionSpec(Family.TABULATED, {}, table)


# --- closed-form densities -------------------------------------------------


def _pdf_closed(fam, p, x):
    if fam is Family.GAUSSIAN:
        s = p["sigma"]
        return np.exp(-0.5 * ((x - p["x0"]) / s) ** 2) / (s * math.sqrt(2 * math.pi))
    if fam is Family.LORENTZIAN:
        g = p["gamma"]
        return g**2 / ((x - p["x0"]) ** 2 + g**2) / (math.pi * g)
    if fam is Family.GUMBEL:
        b = p["beta"]
        z = (x - p["x0"]) / b
        return np.exp(-(z + np.exp(-z))) / b
    if fam is Family.LOGISTIC:
        s = p["s"]
        return 1.0 / (4 * s * np.cosh((x - p["x0"]) / (2 * s)) ** 2)
    if fam is Family.RAYLEIGH:
        s = p["sigma"]
        return x / s**2 * np.exp(-(x**2) / (2 * s**2))
    if fam is Family.CHI:
        k, s = p["k"], p["sigma"]
        norm = s * 2 ** ((k - 2) / 2) * math.gamma(k / 2)
        return (x / s) ** (k - 1) * np.exp(-(x**2) / (2 * s**2)) / norm
    if fam is Family.BETA:
        a, b = p["alpha"], p["beta"]
        with np.errstate(divide="ignore"):
            return np.exp(-betaln(a, b)) * x ** (a - 1) * (1 - x) ** (b - 1)
    raise AssertionError(fam)


def _log_cosh(z):
    az = np.abs(z)
    return az + np.log1p(np.exp(-2 * az)) - math.log(2)


def _xlogy_sym(c, x):
    # c * ln(x) with 0 * ln(0) taken as 0
    if c == 0:
        return np.zeros_like(x)
    return c * np.log(x)


def _exponent_closed(fam, p, x):
    """Return ``(f, f', f'', f''')`` for a closed-form family."""
    if fam is Family.GAUSSIAN:
        s = p["sigma"]
        y = x - p["x0"]
        f = 0.5 * (y / s) ** 2 + math.log(s * math.sqrt(2 * math.pi))
        return f, y / s**2, np.full_like(y, 1 / s**2), np.zeros_like(y)
    if fam is Family.LORENTZIAN:
        g = p["gamma"]
        y = x - p["x0"]
        d = y**2 + g**2
        f = np.log(math.pi * d / g)
        return f, 2 * y / d, 2 * (g**2 - y**2) / d**2, -4 * y * (3 * g**2 - y**2) / d**3
    if fam is Family.GUMBEL:
        b = p["beta"]
        z = (x - p["x0"]) / b
        e = np.exp(-z)
        return z + e + math.log(b), (1 - e) / b, e / b**2, -e / b**3
    if fam is Family.LOGISTIC:
        s = p["s"]
        z = (x - p["x0"]) / (2 * s)
        t = np.tanh(z)
        sech2 = 1 / np.cosh(z) ** 2
        f = 2 * _log_cosh(z) + math.log(4 * s)
        return f, t / s, sech2 / (2 * s**2), -sech2 * t / (2 * s**3)
    if fam in (Family.RAYLEIGH, Family.CHI):
        s = p["sigma"]
        k = 2.0 if fam is Family.RAYLEIGH else p["k"]
        c = k - 1
        const = math.log(s) + (k - 2) / 2 * math.log(2) + gammaln(k / 2)
        f = -c * np.log(x / s) + x**2 / (2 * s**2) + const
        return f, -c / x + x / s**2, c / x**2 + 1 / s**2, -2 * c / x**3
    if fam is Family.BETA:
        a, b = p["alpha"], p["beta"]
        f = -_xlogy_sym(a - 1, x) - _xlogy_sym(b - 1, 1 - x) + betaln(a, b)
        fp = -(a - 1) / x + (b - 1) / (1 - x)
        fpp = (a - 1) / x**2 + (b - 1) / (1 - x) ** 2
        fppp = -2 * (a - 1) / x**3 + 2 * (b - 1) / (1 - x) ** 3
        return f, fp, fpp, fppp
    raise AssertionError(fam)


def _mode(fam, p):
    """Location of the density maximum, or ``None`` if the density is unbounded."""
    if fam in (Family.GAUSSIAN, Family.LORENTZIAN, Family.GUMBEL, Family.LOGISTIC):
        return p["x0"]
    if fam is Family.RAYLEIGH:
        return p["sigma"]
    if fam is Family.CHI:
        return p["sigma"] * math.sqrt(p["k"] - 1)
    a, b = p["alpha"], p["beta"]
    if a < 1 or b < 1:
        return None
    if a == 1 and b == 1:
        return 0.5
    return (a - 1) / (a + b - 2)


def _min_exponent(spec: DistributionSpec) -> float:
    """``f`` at the mode; 0 for unbounded densities, making the floor absolute."""
    mode = _mode(spec.family, spec.params)
    if mode is None:
        return 0.0
    with np.errstate(all="ignore"):
        f = _exponent_closed(spec.family, spec.params, np.array([float(mode)]))[0]
    return float(f[0])


# --- tabulated densities ---------------------------------------------------


def _runs(mask):
    """Yield ``(start, stop)`` of contiguous True runs."""
    idx = np.flatnonzero(np.diff(np.concatenate(([0], mask.astype(np.int8), [0]))))
    return list(zip(idx[::2], idx[1::2]))


def _diff_run(g, h):
    """First and second derivative of ``g`` on one contiguous run.

    Interior points use central differences with one Richardson step (the
    five-point stencils); the two points next to each end fall back to plain
    central or one-sided second-order formulas.
    """
    m = g.size
    d1 = np.empty(m)
    d2 = np.empty(m)
    d1[1:-1] = (g[2:] - g[:-2]) / (2 * h)
    d2[1:-1] = (g[2:] - 2 * g[1:-1] + g[:-2]) / h**2
    if m >= 5:
        d1[2:-2] = (8 * (g[3:-1] - g[1:-3]) - (g[4:] - g[:-4])) / (12 * h)
        d2[2:-2] = (-g[4:] + 16 * g[3:-1] - 30 * g[2:-2] + 16 * g[1:-3] - g[:-4]) / (12 * h**2)
    d1[0] = (-3 * g[0] + 4 * g[1] - g[2]) / (2 * h)
    d1[-1] = (3 * g[-1] - 4 * g[-2] + g[-3]) / (2 * h)
    d2[0] = (2 * g[0] - 5 * g[1] + 4 * g[2] - g[3]) / h**2
    d2[-1] = (2 * g[-1] - 5 * g[-2] + 4 * g[-3] - g[-4]) / h**2
    return d1, d2


def _differentiate_log(h, values, floor):
    vmax = values.max() if values.size else 0.0
    with np.errstate(divide="ignore"):
        f = -np.log(values)
    valid = np.isfinite(f) & (values >= floor * vmax) & (values > 0)
    fp = np.full(values.shape, np.nan)
    fpp = np.full(values.shape, np.nan)
    for start, stop in _runs(valid):
        if stop - start < 4:
            valid[start:stop] = False
            continue
        fp[start:stop], fpp[start:stop] = _diff_run(f[start:stop], h)
    f = np.where(valid, f, np.nan)
    return ExponentEval(f, fp, fpp, valid)


# --- public operations -----------------------------------------------------


def eval_pdf(spec: DistributionSpec, x):
    """Density ``P(x)``; raises :class:`DomainError` outside the support.

    For the beta family with ``alpha < 1`` (or ``beta < 1``) the density is
    infinite at the corresponding endpoint and ``inf`` is returned there.
    """
    spec.domain.check(x)
    x = np.asarray(x, dtype=float)
    if spec.family is Family.TABULATED:
        t = spec.table
        return np.interp(x, t.grid.x, t.values) * normalization(spec)
    with np.errstate(over="ignore", under="ignore", invalid="ignore"):
        return _pdf_closed(spec.family, spec.params, x)


def eval_exponent(spec: DistributionSpec, x) -> ExponentEval:
    """Evaluate ``f = -ln(P/A)``, ``f'``, ``f''`` at ``x``.

    Points where ``P`` vanishes, diverges or drops below the floor get
    ``valid = False`` and NaN values instead of infinities.  For tabulated
    specs the node values are interpolated linearly between grid points.
    """
    spec.domain.check(x)
    x = np.asarray(x, dtype=float)
    if spec.family is Family.TABULATED:
        t = spec.table
        ex = t._exponent
        gx = t.grid.x
        ok = ex.valid.astype(float)
        valid = (np.interp(x, gx, ok) == 1.0)
        f, fp, fpp = (
            np.interp(x, gx, np.where(ex.valid, arr, 0.0)) for arr in (ex.f, ex.fp, ex.fpp)
        )
    else:
        with np.errstate(all="ignore"):
            f, fp, fpp, _ = _exponent_closed(spec.family, spec.params, x)
        f = np.asarray(f, dtype=float)
        valid = np.isfinite(f) & np.isfinite(fp) & np.isfinite(fpp)
        valid &= f - _min_exponent(spec) <= _LOG_FLOOR
    nan = np.nan
    return ExponentEval(
        np.where(valid, f, nan),
        np.where(valid, fp, nan),
        np.where(valid, fpp, nan),
        np.asarray(valid),
    )


def exponent_third_derivative(spec: DistributionSpec, x):
    """Analytic ``f'''`` for closed-form families (used to polish minima)."""
    if spec.family is Family.TABULATED:
        raise ValueError("no analytic third derivative for tabulated densities")
    x = np.asarray(x, dtype=float)
    with np.errstate(all="ignore"):
        return _exponent_closed(spec.family, spec.params, x)[3]


def normalization(spec: DistributionSpec) -> float:
    """Constant ``A`` with ``P = A exp(-f)`` integrating to one."""
    if spec.family is not Family.TABULATED:
        return 1.0
    mass = spec.table.mass
    if not (np.isfinite(mass) and mass > 0):
        raise NormalizationError(f"tabulated density has mass {mass}; cannot normalize")
    return 1.0 / mass


def sample_on_grid(spec: DistributionSpec, grid: Grid1D, floor=DEFAULT_FLOOR) -> TabulatedPdf:
    """Tabulate ``eval_pdf`` on ``grid``."""
    if not (spec.domain.contains(grid.a) and spec.domain.contains(grid.b)):
        raise DomainError(f"grid [{grid.a}, {grid.b}] not inside domain {spec.domain}")
    return TabulatedPdf(grid, eval_pdf(spec, grid.x), floor)


def read_tabulated_csv(path, rtol=1e-6) -> TabulatedPdf:
    """Read a two-column ``x,P`` CSV with a header row.

    ``x`` must be strictly increasing with uniform spacing (to ``rtol``
    relative to the mean spacing).
    """
    xs, ps, lines = [], [], []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise InputFormatError(f"{path}: empty file")
        if [h.strip() for h in header] != ["x", "P"]:
            raise InputFormatError(f"{path}: line 1: expected header 'x,P', got {','.join(header)!r}")
        for row in reader:
            line = reader.line_num
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 2:
                raise InputFormatError(f"{path}: line {line}: expected 2 columns, got {len(row)}")
            try:
                x, p = float(row[0]), float(row[1])
            except ValueError:
                raise InputFormatError(f"{path}: line {line}: non-numeric value {row!r}") from None
            if not (math.isfinite(x) and math.isfinite(p)):
                raise InputFormatError(f"{path}: line {line}: non-finite value")
            if p < 0:
                raise InputFormatError(f"{path}: line {line}: negative density {p}")
            xs.append(x)
            ps.append(p)
            lines.append(line)
    if len(xs) < 3:
        raise InputFormatError(f"{path}: need at least 3 data rows, got {len(xs)}")
    x = np.array(xs)
    dx = np.diff(x)
    bad = np.flatnonzero(dx <= 0)
    if bad.size:
        i = int(bad[0])
        raise InputFormatError(
            f"{path}: x not strictly increasing between lines {lines[i]} and {lines[i + 1]} "
            f"(x={float(x[i])!r} then x={float(x[i + 1])!r})"
        )
    # the first step is the reference; report the first interval that differs
    h = dx[0]
    off = np.flatnonzero(np.abs(dx - h) > rtol * h)
    if off.size:
        i = int(off[0])
        raise InputFormatError(
            f"{path}: non-uniform spacing in interval [{float(x[i])!r}, {float(x[i + 1])!r}] "
            f"(lines {lines[i]}-{lines[i + 1]}): step {float(dx[i])!r} vs {float(h)!r}"
        )
    return TabulatedPdf(Grid1D(float(x[0]), float(x[-1]), x.size), np.array(ps))
