import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pdfpot import distributions as D
from pdfpot.errors import DomainError, EmptyCurveError, UnsupportedError
from pdfpot.grids import Grid1D, Grid2D
from pdfpot.inverse import (
    Endpoint,
    OffsetConvention,
    UnitSystem,
    asymptotic_potential,
    beta_regime,
    closed_form_potential,
    compose_separable_2d,
    consistency_check,
    default_grid,
    exact_ground_energy,
    golden_section,
    gpe_derive,
    gpe_residual_report,
    ground_energy,
    is_bounded_below,
    lorentzian_maximum_check,
    potential_from_exponent,
    potential_minimum,
    raw_potential,
)

# mpmath oracle (40 digits): minimum of V_tise + gN P for gumbel(beta=1, x0=1)
GUMBEL_MU = {
    1.0: 1.2384356085621658484,
    2.0: 0.99453997271085918974,
    3.0: 0.7669933904631964062,
    -1.0: 1.7797694358054924681,
}
GUMBEL_XMIN_G3 = 0.13169971543216688249

BOUNDED = [
    D.gaussian(1.0, 0.0),
    D.lorentzian(1.0, 0.0),
    D.gumbel(1.0, 1.0),
    D.logistic(1.0, 0.0),
    D.chi(3, 1.0),
    D.chi(4, 1.0),
    D.chi(6, 1.0),
    D.beta(4, 4),
]


def test_units():
    assert UnitSystem().kinetic == 2.0
    assert UnitSystem(0.25).kinetic == 0.5
    for bad in (0.0, -1.0, math.inf):
        with pytest.raises(ValueError):
            UnitSystem(bad)


# --- potential_from_exponent -------------------------------------------------


def test_gaussian_potential_example():
    g = Grid1D(-8, 8, 1601)
    c = potential_from_exponent(D.gaussian(1, 0), g)
    i = int(np.argmin(np.abs(g.x - 2)))
    assert c.values[i] == pytest.approx(2.0, abs=1e-12)
    assert c.energy == pytest.approx(1.0, abs=1e-12)
    assert c.offset_convention is OffsetConvention.MIN_ZERO


def test_gumbel_potential_example():
    spec = D.gumbel(1, 1)
    e0 = ground_energy(spec)
    raw, _ = raw_potential(spec, np.array([1.0, 1 - math.log(2)]))
    assert raw[0] + e0 == pytest.approx(0.5, abs=1e-14)
    assert raw[1] + e0 == pytest.approx(0.0, abs=1e-14)


def test_logistic_asymptote_and_energy():
    spec = D.logistic(1, 0)
    c = potential_from_exponent(spec, Grid1D(-40, 40, 8001))
    assert c.energy == pytest.approx(0.5, abs=1e-12)
    assert c.values[0] == pytest.approx(1.0, abs=1e-30)
    assert c.values[-1] == pytest.approx(1.0, abs=1e-30)


@pytest.mark.parametrize("spec", BOUNDED, ids=str)
def test_min_zero_invariant(spec):
    c = potential_from_exponent(spec, default_grid(spec, 801))
    assert c.offset_convention is OffsetConvention.MIN_ZERO
    assert np.nanmin(c.values[c.mask]) == pytest.approx(0.0, abs=1e-12)
    assert c.energy > 0
    assert np.all(np.isnan(c.values[~c.mask]))


def test_unbounded_uses_raw_table_constant():
    spec = D.rayleigh(1.0)
    g = Grid1D(0, 10, 1001)
    c = potential_from_exponent(spec, g)
    assert c.offset_convention is OffsetConvention.RAW_TABLE_CONSTANT
    assert c.energy == 0.0
    x = g.x[1:]
    np.testing.assert_allclose(c.values[1:], 0.5 * (x**2 - 1 / x**2) - 2.0, rtol=1e-12, atol=1e-9)


def test_empty_curve():
    with pytest.raises(EmptyCurveError):
        potential_from_exponent(D.gaussian(1, 0), Grid1D(100, 200, 11))


def test_scale_covariance():
    x = np.linspace(-3, 3, 31)
    for c in (0.5, 2.0, 3.7):
        v1 = potential_from_exponent(D.gaussian(1.0), Grid1D(-3, 3, 31)).values
        v2 = potential_from_exponent(D.gaussian(c), Grid1D(-3 * c, 3 * c, 31)).values
        np.testing.assert_allclose(v2, v1 / c**2, rtol=1e-10)
    assert x.size == 31


# --- closed forms -------------------------------------------------------------


def test_closed_form_examples():
    assert closed_form_potential(D.lorentzian(1, 0), 0.0) == pytest.approx(0.0, abs=1e-15)
    assert closed_form_potential(D.chi(3, 1), 1.3) == pytest.approx(0.845, rel=1e-14)
    assert closed_form_potential(D.rayleigh(1), 1.0) == pytest.approx(0.0, abs=1e-15)


@pytest.mark.parametrize(
    "spec,x",
    [(D.rayleigh(1), 0.0), (D.chi(4, 1), 0.0), (D.beta(4, 4), 0.0), (D.beta(4, 4), 1.0)],
    ids=str,
)
def test_closed_form_singular_points(spec, x):
    with pytest.raises(DomainError):
        closed_form_potential(spec, x)


def test_chi_k3_is_finite_at_origin():
    assert closed_form_potential(D.chi(3, 1), 0.0) == 0.0


def test_ground_energy_examples():
    assert ground_energy(D.gumbel(2.0)) == pytest.approx(3 / 8, rel=1e-15)
    assert ground_energy(D.chi(3, 1.0)) == 3.0
    assert ground_energy(D.lorentzian(2.0)) == 0.5
    assert ground_energy(D.gaussian(2.0), UnitSystem(0.5)) == 0.125
    with pytest.raises(UnsupportedError):
        ground_energy(D.beta(4, 4))


@pytest.mark.parametrize(
    "spec,grid",
    [
        (D.gaussian(2, -1), Grid1D(-9, 7, 801)),
        (D.gumbel(3, 1), Grid1D(-10, 20, 801)),
        (D.logistic(2, 0), Grid1D(-20, 20, 801)),
    ],
    ids=str,
)
def test_consistency_examples(spec, grid):
    assert consistency_check(spec, grid) <= 1e-9


def test_lorentzian_maximum_check():
    chk = lorentzian_maximum_check(D.lorentzian(1.0, 0.0))
    assert chk["direct_value"] == pytest.approx(8 / 3, rel=1e-14)
    assert chk["stated_value"] == pytest.approx(2 / 3, rel=1e-14)
    assert chk["direct_minus_asymptote"] == pytest.approx(2 / 3, rel=1e-12)
    assert chk["consistent"] is False


def test_asymptotes():
    assert asymptotic_potential(D.lorentzian(2.0)) == 0.5
    assert asymptotic_potential(D.logistic(1.0)) == 1.0
    assert asymptotic_potential(D.gumbel(1.0)) == 2.0
    assert asymptotic_potential(D.gaussian()) == math.inf


# --- minima --------------------------------------------------------------------


def test_golden_section_parabola():
    x = golden_section(lambda t: (t - 0.3) ** 2, -1, 2, tol=1e-12)
    assert x == pytest.approx(0.3, abs=1e-6)


@pytest.mark.parametrize("beta", [1.0, 2.0, 3.0])
def test_gumbel_minimum_location(beta):
    spec = D.gumbel(beta, 1.0)
    x, v = potential_minimum(spec, grid=Grid1D(-10, 30, 401))
    assert x == pytest.approx(1 - beta * math.log(2), abs=1e-10)
    assert v + ground_energy(spec) == pytest.approx(0.0, abs=1e-14)


def test_beta_ground_energy_from_minimum():
    assert exact_ground_energy(D.beta(4, 4)) == pytest.approx(24.0, rel=1e-12)


def test_minimum_refused_when_unbounded():
    with pytest.raises(UnsupportedError):
        potential_minimum(D.rayleigh())


# --- beta regimes ----------------------------------------------------------------


@pytest.mark.parametrize(
    "a,b,expected",
    [
        (4, 4, (Endpoint.WALL_PLUS_INFINITY, Endpoint.WALL_PLUS_INFINITY, True)),
        (2, 4, (Endpoint.DIVERGES_MINUS_INFINITY, Endpoint.WALL_PLUS_INFINITY, False)),
        (0.5, 0.5, (Endpoint.WALL_PLUS_INFINITY, Endpoint.WALL_PLUS_INFINITY, True)),
        (1, 1, (Endpoint.FINITE, Endpoint.FINITE, True)),
        (1, 5, (Endpoint.FINITE, Endpoint.WALL_PLUS_INFINITY, True)),
        # at alpha = 3 the 1/x term decides
        (3, 1, (Endpoint.FINITE, Endpoint.FINITE, True)),
        (3, 0.5, (Endpoint.WALL_PLUS_INFINITY, Endpoint.WALL_PLUS_INFINITY, True)),
        (3, 4, (Endpoint.DIVERGES_MINUS_INFINITY, Endpoint.WALL_PLUS_INFINITY, False)),
    ],
)
def test_beta_regime(a, b, expected):
    r = beta_regime(a, b)
    assert (r.at_zero, r.at_one, r.has_finite_minimum) == expected


@pytest.mark.parametrize("a,b", [(3, 0.5), (3, 4), (1, 5), (5, 1)])
def test_beta_regime_matches_numeric_limit(a, b):
    spec = D.beta(a, b)
    x = np.array([1e-4, 1e-6])
    raw, _ = raw_potential(spec, x)
    r = beta_regime(a, b)
    if r.at_zero is Endpoint.WALL_PLUS_INFINITY:
        assert raw[1] > raw[0] > 1e3
    elif r.at_zero is Endpoint.DIVERGES_MINUS_INFINITY:
        assert raw[1] < raw[0] < -1e3
    else:
        assert abs(raw[1] - raw[0]) < 1e-2


def test_beta_regime_rejects_nonpositive():
    with pytest.raises(ValueError):
        beta_regime(0, 1)


def test_bounded_below():
    assert not is_bounded_below(D.rayleigh())
    assert not is_bounded_below(D.beta(2, 4))
    assert is_bounded_below(D.beta(4, 4))


# --- GPE ------------------------------------------------------------------------

GUMBEL = D.gumbel(1.0, 1.0)
GRID = Grid1D(-5, 10, 2001)


def test_gpe_gn_zero_degenerates():
    d = gpe_derive(GUMBEL, GRID, 0.0)
    assert d.mu == 1.5
    m = d.v_tise.mask
    for c in (d.v_tilde_paper, d.v_tilde_eff, d.v_ext_selfconsistent):
        np.testing.assert_allclose(c.values[m], d.v_tise.values[m], rtol=0, atol=1e-12)


def test_gpe_paper_tilde_at_x0():
    d = gpe_derive(GUMBEL, GRID, 3.0)
    i = int(np.argmin(np.abs(GRID.x - 1.0)))
    assert GRID.x[i] == 1.0
    assert d.v_tilde_paper.values[i] == pytest.approx(0.5 + 3 * math.exp(-1), abs=1e-12)


@pytest.mark.parametrize("gn", sorted(GUMBEL_MU))
def test_gpe_mu_against_oracle(gn):
    d = gpe_derive(GUMBEL, GRID, gn)
    assert d.mu == pytest.approx(GUMBEL_MU[gn], abs=1e-12)
    if gn == 3.0:
        assert d.min_location == pytest.approx(GUMBEL_XMIN_G3, abs=1e-10)
    # the reported mu is the geometric construction on the plotted curve
    assert d.mu == pytest.approx(1.5 - np.nanmin(d.v_tilde_paper.values), abs=1e-5)


def test_gpe_curves_relations():
    d = gpe_derive(GUMBEL, GRID, 2.0)
    m = d.v_tise.mask
    np.testing.assert_allclose(
        d.v_tilde_paper.values[m], d.v_tise.values[m] + 2.0 * d.density[m], rtol=0, atol=1e-12
    )
    np.testing.assert_allclose(d.v_tilde_eff.values[m] - d.v_tise.values[m], d.mu - d.e0, atol=1e-12)
    np.testing.assert_allclose(
        d.v_ext_selfconsistent.values[m], d.v_tilde_eff.values[m] - 2.0 * d.density[m], atol=1e-12
    )


@given(a=st.floats(-3, 3), b=st.floats(-3, 3))
@settings(max_examples=20, deadline=None)
def test_gpe_linear_in_gn(a, b):
    da, db, dab = (gpe_derive(GUMBEL, GRID, g) for g in (a, b, a + b))
    m = da.v_tise.mask
    lhs = da.v_tilde_paper.values[m] + db.v_tilde_paper.values[m] - da.v_tise.values[m]
    np.testing.assert_allclose(lhs, dab.v_tilde_paper.values[m], rtol=0, atol=1e-12)


@pytest.mark.parametrize("spec", [s for s in BOUNDED if s.family is not D.Family.BETA] + [D.beta(4, 4)], ids=str)
@pytest.mark.parametrize("gn", [-1.0, 0.0, 1.0, 3.0])
def test_eff_tilde_residual(spec, gn):
    d = gpe_derive(spec, default_grid(spec, 801), gn)
    assert gpe_residual_report(d, "EffTilde") <= 1e-9


def test_paper_tilde_residual_reported():
    d0 = gpe_derive(GUMBEL, GRID, 0.0)
    d3 = gpe_derive(GUMBEL, GRID, 3.0)
    assert gpe_residual_report(d0, "PaperTilde") <= 1e-9
    r = gpe_residual_report(d3, "PaperTilde")
    assert math.isfinite(r) and r > 1e-3
    with pytest.raises(ValueError):
        gpe_residual_report(d3, "Other")


def test_gpe_refused_for_unbounded():
    with pytest.raises(UnsupportedError):
        gpe_derive(D.rayleigh(), Grid1D(0, 5, 101), 1.0)
    with pytest.raises(UnsupportedError, match="1 < alpha=2 < 3"):
        gpe_derive(D.beta(2, 4), Grid1D(0, 1, 101), 1.0)


def test_gpe_on_tabulated_density():
    g = Grid1D(-8, 8, 1601)
    spec = D.tabulated(D.sample_on_grid(D.gaussian(1, 0), g))
    d = gpe_derive(spec, g, 1.0)
    ref = gpe_derive(D.gaussian(1, 0), g, 1.0)
    # between nodes a tabulated curve is piecewise linear, so its minimum
    # carries an O(h^2) error
    assert d.mu == pytest.approx(ref.mu, abs=1e-4)


# --- 2D composition -------------------------------------------------------------


def test_isotropic_oscillator():
    g = Grid2D(Grid1D(-4, 4, 81), Grid1D(-4, 4, 81))
    f = compose_separable_2d(D.gaussian(), D.gaussian(), g)
    xx, yy = g.mesh()
    np.testing.assert_allclose(f.values, (xx**2 + yy**2) / 2, atol=1e-12)
    assert f.energy == pytest.approx(2.0, abs=1e-12)


def test_gumbel_logistic_origin():
    g = Grid2D(Grid1D(-4, 16, 201), Grid1D(-10, 10, 201))
    f = compose_separable_2d(D.gumbel(1, 0), D.logistic(1, 0), g)
    assert f.values[40, 100] == pytest.approx(0.5, abs=1e-9)


def test_field_additivity():
    g = Grid2D(Grid1D(-4, 16, 101), Grid1D(-6, 6, 97))
    f = compose_separable_2d(D.gumbel(1, 0), D.gaussian(1.5, 0.5), g)
    d = f.values - f.values[:, [10]]
    np.testing.assert_allclose(d, np.broadcast_to(d[0], d.shape), rtol=0, atol=1e-12)
