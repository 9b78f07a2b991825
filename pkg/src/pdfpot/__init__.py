"""Potentials whose ground state reproduces a prescribed probability density.

Given a density ``P = A exp(-f)`` the potential follows from

    V(x) - E = (hbar^2 / 4m) * (-f''(x) + f'(x)^2 / 2)

and the same right-hand side gives the effective potential of the
Gross-Pitaevskii equation minus the chemical potential.  Every construction
can be checked by a forward finite-difference eigensolve.
"""

from .distributions import (
    DistributionSpec,
    Family,
    TabulatedPdf,
    beta,
    chi,
    eval_exponent,
    eval_pdf,
    gaussian,
    gumbel,
    logistic,
    lorentzian,
    normalization,
    rayleigh,
    read_tabulated_csv,
    sample_on_grid,
    tabulated,
)
from .errors import (
    DomainError,
    EmptyCurveError,
    InconclusiveError,
    InputFormatError,
    NormalizationError,
    SolverError,
    UnsupportedError,
)
from .forward import (
    build_hamiltonian_1d,
    build_hamiltonian_2d,
    count_bound_states,
    count_bound_states_for,
    lowest_eigenpair,
    lowest_eigenpair_2d,
    verify_roundtrip,
    verify_separable_2d,
)
from .grids import Grid1D, Grid2D
from .hydrogen import HQuantumNumbers, MomentumGrid, pdf_2d, potential_2d, radial_momentum_amplitude
from .inverse import (
    OffsetConvention,
    PotentialCurve,
    PotentialField,
    UnitSystem,
    beta_regime,
    closed_form_potential,
    compose_separable_2d,
    consistency_check,
    exact_ground_energy,
    gpe_derive,
    gpe_residual_report,
    ground_energy,
    lorentzian_maximum_check,
    potential_from_exponent,
    potential_minimum,
)

__version__ = "0.1.0"
