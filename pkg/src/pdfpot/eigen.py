"""Symmetric tridiagonal eigenpairs by Sturm bisection and inverse iteration."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_banded
from scipy.sparse import diags

from .errors import SolverError

__all__ = ["TridiagonalOperator", "EigenSolution", "sturm_count", "lowest_eigenpair"]


@dataclass(frozen=True, eq=False)
class TridiagonalOperator:
    """Symmetric tridiagonal matrix stored as its diagonal and one off-diagonal.

    ``h`` is the grid spacing the operator was assembled on; it sets the
    quadrature normalization of returned eigenvectors.
    """

    diag: np.ndarray
    off: np.ndarray
    h: float = 1.0

    def __post_init__(self):
        d = np.array(self.diag, dtype=float)
        e = np.array(self.off, dtype=float)
        if d.ndim != 1 or e.shape != (max(d.size - 1, 0),):
            raise ValueError("off-diagonal must have length n - 1")
        d.flags.writeable = False
        e.flags.writeable = False
        object.__setattr__(self, "diag", d)
        object.__setattr__(self, "off", e)

    @property
    def n(self) -> int:
        return self.diag.size

    @property
    def lower(self) -> np.ndarray:
        return self.off

    @property
    def upper(self) -> np.ndarray:
        return self.off

    def matvec(self, v):
        v = np.asarray(v, dtype=float)
        out = self.diag * v
        out[:-1] += self.off * v[1:]
        out[1:] += self.off * v[:-1]
        return out

    def to_sparse(self):
        return diags([self.lower, self.diag, self.upper], [-1, 0, 1], format="csr")

    def to_dense(self):
        return self.to_sparse().toarray()

    def gershgorin(self) -> tuple[float, float]:
        r = np.zeros(self.n)
        r[:-1] += np.abs(self.off)
        r[1:] += np.abs(self.off)
        return float(np.min(self.diag - r)), float(np.max(self.diag + r))


@dataclass(frozen=True, eq=False)
class EigenSolution:
    """One eigenpair.

    ``vector`` is normalized so that ``h * sum(vector**2) == 1``; ``residual``
    is ``||H v - E v||_2`` for the Euclidean-unit vector.
    """

    energy: float
    vector: np.ndarray
    iterations: int
    residual: float


def sturm_count(diag, off2, shift) -> int:
    """Number of eigenvalues strictly below ``shift``.

    ``diag`` and ``off2`` (squared off-diagonal) are Python sequences; the
    LDL^T pivots of ``T - shift I`` are counted for negative sign.
    """
    count = 0
    q = diag[0] - shift
    if q < 0:
        count += 1
    tiny = 1e-300
    for i in range(1, len(diag)):
        if q == 0:
            q = tiny
        q = diag[i] - shift - off2[i - 1] / q
        if q < 0:
            count += 1
    return count


def _bisect(diag, off2, k, lo, hi, maxiter):
    """The ``k``-th smallest eigenvalue (0-based) inside ``[lo, hi]``."""
    it = 0
    eps = np.finfo(float).eps
    while it < maxiter:
        mid = 0.5 * (lo + hi)
        if hi - lo <= 4 * eps * max(abs(lo), abs(hi)) + 1e-300 or mid in (lo, hi):
            return mid, it
        if sturm_count(diag, off2, mid) > k:
            hi = mid
        else:
            lo = mid
        it += 1
    raise SolverError(
        f"bisection for eigenvalue {k} did not converge",
        {"iterations": it, "interval": (lo, hi)},
    )


def _inverse_iteration(op, lam, previous, maxiter, rtol):
    n = op.n
    span = max(abs(lam), 1.0)
    shift = lam + 64 * np.finfo(float).eps * span
    ab = np.zeros((3, n))
    ab[0, 1:] = op.off
    ab[1] = op.diag - shift
    ab[2, :-1] = op.off
    # deterministic start with every component nonzero
    v = np.linspace(1.0, 2.0, n)
    v /= np.linalg.norm(v)
    res = np.inf
    rq = lam
    # attainable residual is a few ulps of the operator norm
    floor = 64 * np.finfo(float).eps * max(np.max(np.abs(op.diag)), 1.0)
    for it in range(1, maxiter + 1):
        try:
            w = solve_banded((1, 1), ab, v, check_finite=False)
        except np.linalg.LinAlgError:
            # shift landed on an exact pivot zero; nudge it
            shift += 1e3 * np.finfo(float).eps * span
            ab[1] = op.diag - shift
            continue
        for u in previous:
            w -= np.dot(u, w) * u
        v = w / np.linalg.norm(w)
        hv = op.matvec(v)
        rq = float(np.dot(v, hv))
        res = float(np.linalg.norm(hv - rq * v))
        if res <= rtol * abs(rq) + floor:
            return rq, v, it, res
    raise SolverError(
        "inverse iteration did not converge",
        {"iterations": maxiter, "residual": res, "rayleigh_quotient": rq, "shift": shift},
    )


def lowest_eigenpair(op: TridiagonalOperator, count: int = 1, maxiter: int = 400, rtol: float = 1e-9) -> list[EigenSolution]:
    """The ``count`` algebraically smallest eigenpairs of ``op``.

    Eigenvalues are bracketed by Sturm-sequence bisection from the
    Gershgorin interval; eigenvectors come from inverse iteration at the
    bracketed value.  The returned energy is the Rayleigh quotient.
    """
    if count < 1 or count > op.n:
        raise ValueError(f"count must be in [1, {op.n}]")
    diag = op.diag.tolist()
    off2 = (op.off**2).tolist()
    lo, hi = op.gershgorin()
    out = []
    vecs = []
    for k in range(count):
        lam, nb = _bisect(diag, off2, k, lo, hi, maxiter)
        rq, v, ni, res = _inverse_iteration(op, lam, vecs, 20, rtol)
        vecs.append(v)
        # ground-state sign convention: positive overlap with the all-ones vector
        s = np.sum(v)
        if s < 0:
            v = -v
        out.append(EigenSolution(rq, v / np.sqrt(op.h), nb + ni, res))
    return out
