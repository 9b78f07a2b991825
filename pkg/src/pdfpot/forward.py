"""Forward finite-difference checks of the inverse construction.

The derived potential is put back into a discretized Hamiltonian with
Dirichlet walls and its lowest eigenpair is compared with the prescribed
energy and density.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from .distributions import DistributionSpec, eval_pdf
from .eigen import EigenSolution, TridiagonalOperator, lowest_eigenpair, sturm_count
from .errors import EmptyCurveError, InconclusiveError, SolverError, UnsupportedError
from .grids import Grid1D, Grid2D
from .inverse import (
    PotentialCurve,
    PotentialField,
    UnitSystem,
    compose_separable_2d,
    exact_ground_energy,
    is_bounded_below,
    potential_from_exponent,
)

__all__ = [
    "build_hamiltonian_1d",
    "lowest_eigenpair",
    "RoundTripReport",
    "verify_roundtrip",
    "count_bound_states",
    "count_bound_states_for",
    "build_hamiltonian_2d",
    "lowest_eigenpair_2d",
    "verify_separable_2d",
    "restrict",
    "TRUNCATION",
]

#: Relative density below which the domain is cut and a Dirichlet wall placed.
TRUNCATION = 1e-16


def build_hamiltonian_1d(pot: PotentialCurve, units: UnitSystem = UnitSystem()) -> TridiagonalOperator:
    """Three-point discretization of ``-(hbar^2/2m) d^2/dx^2 + V``.

    Every grid node is an unknown; the wavefunction vanishes one step beyond
    each end.  Masked cells must be cut away first (see :func:`restrict`).
    """
    if not np.all(pot.mask):
        raise ValueError("potential has masked cells; restrict the grid first")
    h = pot.grid.h
    t = units.kinetic / h**2
    diag = 2 * t + np.asarray(pot.values, dtype=float)
    off = np.full(pot.grid.n - 1, -t)
    return TridiagonalOperator(diag, off, h)


def _largest_run(mask, anchor=None):
    idx = np.flatnonzero(np.diff(np.concatenate(([0], mask.astype(np.int8), [0]))))
    runs = list(zip(idx[::2], idx[1::2]))
    if not runs:
        raise EmptyCurveError("no valid cell")
    if anchor is not None:
        for a, b in runs:
            if a <= anchor < b:
                return a, b
    return max(runs, key=lambda r: r[1] - r[0])


def restrict(curve: PotentialCurve, start: int, stop: int) -> PotentialCurve:
    """Sub-curve on nodes ``start:stop``."""
    return PotentialCurve(
        curve.grid.subgrid(start, stop),
        curve.values[start:stop],
        curve.mask[start:stop],
        curve.energy,
        curve.offset_convention,
    )


def _window(curve, density):
    dens = np.where(curve.mask, density, 0.0)
    top = float(np.max(dens))
    keep = curve.mask & (dens >= TRUNCATION * top)
    return _largest_run(keep, int(np.argmax(dens)))


@dataclass(frozen=True)
class RoundTripReport:
    """Outcome of one forward check.

    ``order_estimate`` is ``log2(err(h) / err(h/2))`` of the energy error and
    is NaN when no refined grid was solved.
    """

    e_fd: float
    e_exact: float
    pdf_sup_error: float
    order_estimate: float
    e_fd_refined: float
    window: tuple[float, float]
    n: int
    residual: float

    @property
    def energy_error(self) -> float:
        return abs(self.e_fd - self.e_exact)


def _solve_curve(spec, grid, units, e_exact):
    curve = potential_from_exponent(spec, grid, units)
    dens = eval_pdf(spec, grid.x)
    a, b = _window(curve, dens)
    sub = restrict(curve, a, b).shifted_to(e_exact)
    sol = lowest_eigenpair(build_hamiltonian_1d(sub, units), 1)[0]
    err = float(np.max(np.abs(sol.vector**2 - dens[a:b])))
    return sol, err, sub.grid


def verify_roundtrip(spec: DistributionSpec, grid: Grid1D, units: UnitSystem = UnitSystem(), refine: bool = True) -> RoundTripReport:
    """Solve the derived potential forward and compare with the target.

    The potential is anchored to the exact ground energy (closed form where
    known) so that the finite-difference eigenvalue error is pure
    discretization error.  With ``refine`` the solve is repeated at half the
    spacing to estimate the convergence order.
    """
    if not is_bounded_below(spec):
        raise UnsupportedError(f"{spec}: potential unbounded below; no ground state to verify")
    e_exact = exact_ground_energy(spec, units, grid)
    sol, err, sub = _solve_curve(spec, grid, units, e_exact)
    order = math.nan
    e_ref = math.nan
    if refine:
        sol2, _, _ = _solve_curve(spec, grid.refined(), units, e_exact)
        e_ref = sol2.energy
        d1, d2 = abs(sol.energy - e_exact), abs(e_ref - e_exact)
        if d1 > 0 and d2 > 0:
            order = math.log2(d1 / d2)
    return RoundTripReport(
        e_fd=sol.energy,
        e_exact=e_exact,
        pdf_sup_error=err,
        order_estimate=order,
        e_fd_refined=e_ref,
        window=(sub.a, sub.b),
        n=sub.n,
        residual=sol.residual,
    )


def _count_below(pot, threshold, units):
    a, b = _largest_run(pot.mask)
    op = build_hamiltonian_1d(restrict(pot, a, b), units)
    return sturm_count(op.diag.tolist(), (op.off**2).tolist(), threshold)


def count_bound_states(pot: PotentialCurve, threshold: float, units: UnitSystem = UnitSystem(), refined: PotentialCurve | None = None) -> int:
    """Number of finite-difference eigenvalues strictly below ``threshold``.

    If ``refined`` (the same potential at half the spacing) is given the two
    counts must agree, otherwise :class:`InconclusiveError` is raised.
    """
    n = _count_below(pot, threshold, units)
    if refined is not None:
        n2 = _count_below(refined, threshold, units)
        if n2 != n:
            raise InconclusiveError(
                f"bound-state count changed under refinement: {n} at h={pot.grid.h:g}, "
                f"{n2} at h={refined.grid.h:g}"
            )
    return n


def count_bound_states_for(spec: DistributionSpec, grid: Grid1D, threshold: float, units: UnitSystem = UnitSystem()) -> int:
    """:func:`count_bound_states` on ``grid`` and its refinement.

    Both curves are anchored to the exact ground energy so that ``threshold``
    is measured on the same energy scale at either spacing.
    """
    e = exact_ground_energy(spec, units, grid)
    return count_bound_states(
        potential_from_exponent(spec, grid, units).shifted_to(e),
        threshold,
        units,
        refined=potential_from_exponent(spec, grid.refined(), units).shifted_to(e),
    )


# --- 2D ------------------------------------------------------------------------


def _second_difference(n, h):
    e = np.ones(n)
    return sp.diags([-e[:-1], 2 * e, -e[:-1]], [-1, 0, 1], format="csr") / h**2


def build_hamiltonian_2d(field: PotentialField, units: UnitSystem = UnitSystem()):
    """Five-point discretization of ``-(hbar^2/2m) Laplacian + V`` (CSR).

    Unknowns are ordered ``ix * ny + iy``; Dirichlet walls one step outside
    the grid.
    """
    if not np.all(field.mask):
        raise ValueError("field has masked cells; restrict the grid first")
    gx, gy = field.grid.gx, field.grid.gy
    lap = sp.kron(_second_difference(gx.n, gx.h), sp.identity(gy.n)) + sp.kron(
        sp.identity(gx.n), _second_difference(gy.n, gy.h)
    )
    h = units.kinetic * lap + sp.diags(np.asarray(field.values, dtype=float).ravel())
    return h.tocsr()


def _gershgorin_lower(h):
    d = h.diagonal()
    off = np.asarray(abs(h).sum(axis=1)).ravel() - np.abs(d)
    return float(np.min(d - off))


def lowest_eigenpair_2d(h, cell_area: float = 1.0, tol: float = 1e-11, maxiter: int = 200) -> EigenSolution:
    """Smallest eigenpair of a sparse symmetric operator by shifted inverse
    power iteration.

    The first shift is the Gershgorin lower bound, which lies below the
    spectrum.  Once the Rayleigh quotients settle into geometric decay the
    limit and the spectral gap are extrapolated from them and the shift is
    moved close below the eigenvalue for fast final convergence.  The start
    vector is all-ones, normalized.
    """
    n = h.shape[0]
    v = np.ones(n) / math.sqrt(n)
    sigma0 = _gershgorin_lower(h)
    sigma0 -= 1e-9 * max(1.0, abs(sigma0))
    lu = splu((h - sigma0 * sp.identity(n, format="csc")).tocsc(), permc_spec="MMD_AT_PLUS_A")
    rqs = []
    total = 0
    sigma1 = None
    for _ in range(maxiter):
        total += 1
        w = lu.solve(v)
        v = w / np.linalg.norm(w)
        rqs.append(float(v @ (h @ v)))
        if len(rqs) >= 2 and abs(rqs[-2] - rqs[-1]) <= tol * abs(rqs[-1]):
            break
        if len(rqs) >= 4:
            d1, d2, d3 = rqs[-3] - rqs[-2], rqs[-2] - rqs[-1], rqs[-4] - rqs[-3]
            if d1 > 0 and d2 > 0 and d3 > 0:
                q1, q2 = d2 / d1, d1 / d3
                if 0 < q1 < 1 and abs(q1 - q2) < 0.02 * q1:
                    lam = rqs[-1] - d2 * q1 / (1 - q1)
                    r = math.sqrt(q1)
                    lam2 = sigma0 + (lam - sigma0) / r
                    cand = lam - 0.1 * (lam2 - lam)
                    if cand > sigma0:
                        sigma1 = cand
                        break
    else:
        raise SolverError("2D inverse iteration did not converge", {"iterations": total, "rq": rqs[-3:]})
    bound = rqs[-1]
    if sigma1 is not None:
        lu = splu((h - sigma1 * sp.identity(n, format="csc")).tocsc(), permc_spec="MMD_AT_PLUS_A")
        prev = rqs[-1]
        for _ in range(maxiter):
            total += 1
            w = lu.solve(v)
            v = w / np.linalg.norm(w)
            rq = float(v @ (h @ v))
            if abs(prev - rq) <= tol * abs(rq):
                break
            prev = rq
        else:
            raise SolverError("2D inverse iteration did not converge", {"iterations": total, "shift": sigma1})
        rqs.append(rq)
        if rq > bound + 1e-9 * abs(bound):
            raise SolverError(
                "shifted iteration left the lowest eigenvalue",
                {"iterations": total, "shift": sigma1, "rq": rq, "bound": bound},
            )
    energy = rqs[-1]
    res = float(np.linalg.norm(h @ v - energy * v))
    if np.sum(v) < 0:
        v = -v
    return EigenSolution(energy, v / math.sqrt(cell_area), total, res)


def verify_separable_2d(specx: DistributionSpec, specy: DistributionSpec, grid: Grid2D, units: UnitSystem = UnitSystem()) -> dict:
    """2D forward solve of a separable potential against the 1D energies."""
    field = compose_separable_2d(specx, specy, grid, units)
    ex = exact_ground_energy(specx, units, grid.gx)
    ey = exact_ground_energy(specy, units, grid.gy)
    anchored = PotentialField(grid, field.raw + ex + ey, field.mask, ex + ey, field.offset_convention)
    h = build_hamiltonian_2d(anchored, units)
    sol = lowest_eigenpair_2d(h, grid.gx.h * grid.gy.h)
    return {
        "e_fd": sol.energy,
        "e_sum_1d": ex + ey,
        "abs_error": abs(sol.energy - (ex + ey)),
        "iterations": sol.iterations,
        "residual": sol.residual,
    }
