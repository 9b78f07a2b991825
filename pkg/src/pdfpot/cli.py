"""Command-line front end.

Subcommands write CSV/JSON artifacts into an output directory (``--out``,
or the ``PDFPOT_OUTPUT_DIR`` environment variable, default ``.``).

Exit codes: 0 success, 1 derivation or verification failure, 2 usage or
input error.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import click
import numpy as np

from . import distributions as D
from .errors import (
    DomainError,
    EmptyCurveError,
    InconclusiveError,
    InputFormatError,
    NormalizationError,
    SolverError,
    UnsupportedError,
)
from .forward import count_bound_states_for, verify_roundtrip
from .grids import Grid1D
from .hydrogen import HQuantumNumbers, MomentumGrid, normalization_2d, pdf_2d, potential_2d
from .inverse import (
    OffsetConvention,
    UnitSystem,
    asymptotic_potential,
    consistency_check,
    default_grid,
    exact_ground_energy,
    gpe_derive,
    gpe_residual_report,
    ground_energy,
    is_bounded_below,
    lorentzian_maximum_check,
    potential_from_exponent,
    potential_minimum,
    raw_potential,
    _divergence_message,
)
from .io import write_csv, write_json

#: Failures that mean "the requested derivation is not possible" (exit 1).
_DERIVATION_ERRORS = (UnsupportedError, EmptyCurveError, SolverError, InconclusiveError, NormalizationError)

#: Default forward-check gates.  The Lorentzian ground state sits exactly at
#: the continuum threshold, so its density converges far more slowly on a
#: finite box than the energy does and gets a looser density gate.
DEFAULT_TOLERANCES = {"energy": 1e-3, "pdf": 1e-4, "order": 0.3, "identity": 1e-9}
FAMILY_PDF_TOLERANCE = {D.Family.LORENTZIAN: 1e-2}


@dataclass
class RunConfig:
    """Options shared by all subcommands."""

    units: UnitSystem = field(default_factory=UnitSystem)
    grid_range: tuple[float, float] | None = None
    n: int = 3201
    out_dir: Path = Path(".")
    fmt: str = "csv"
    tolerances: dict = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))

    def __post_init__(self):
        if self.n < 3:
            raise ValueError("grid needs at least 3 points")
        if any(not (v > 0) for v in self.tolerances.values()):
            raise ValueError("tolerances must be positive")
        if self.fmt not in ("csv", "json"):
            raise ValueError("format must be csv or json")

    def grid_for(self, spec) -> Grid1D:
        if self.grid_range is None:
            return default_grid(spec, self.n)
        return Grid1D(self.grid_range[0], self.grid_range[1], self.n)


# --- option plumbing -------------------------------------------------------


def _load_config(ctx, param, value):
    """Read a flat ``key=value`` file into the context's default map so that
    explicit flags still win."""
    if value is None:
        return value
    names = {}
    for p in ctx.command.params:
        for opt in p.opts:
            names[opt.lstrip("-").replace("-", "_")] = p.name
    defaults = {}
    try:
        text = Path(value).read_text()
    except OSError as exc:
        raise click.BadParameter(str(exc), ctx=ctx, param=param) from None
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise click.BadParameter(f"{value}: line {lineno}: expected key=value", ctx=ctx, param=param)
        k, v = (s.strip() for s in line.split("=", 1))
        key = k.lstrip("-").replace("-", "_")
        if key not in names:
            raise click.BadParameter(f"{value}: line {lineno}: unknown option {k!r}", ctx=ctx, param=param)
        defaults[names[key]] = v
    ctx.default_map = {**(ctx.default_map or {}), **defaults}
    return value


def _parse_range(ctx, param, value):
    if value is None:
        return None
    try:
        a, b = (float(s) for s in value.split(":"))
    except ValueError:
        raise click.BadParameter(f"expected a:b, got {value!r}", ctx=ctx, param=param) from None
    if not (math.isfinite(a) and math.isfinite(b) and b > a):
        raise click.BadParameter(f"need finite a < b, got {value!r}", ctx=ctx, param=param)
    return a, b


def _common(f):
    opts = [
        click.option("--config", type=click.Path(dir_okay=False), callback=_load_config, is_eager=True,
                     expose_value=False, help="key=value file mirroring the flags; flags win."),
        click.option("--units", "units", type=float, default=1.0, show_default=True, help="Value of hbar^2/4m."),
        click.option("--out", "out_dir", type=click.Path(file_okay=False), envvar="PDFPOT_OUTPUT_DIR", default=".",
                     show_default=True, help="Output directory."),
        click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="csv", show_default=True),
    ]
    for o in reversed(opts):
        f = o(f)
    return f


def _grid_opts(f):
    f = click.option("--n", "n", type=click.IntRange(min=3), default=3201, show_default=True, help="Grid points.")(f)
    f = click.option("--range", "grid_range", callback=_parse_range, help="Grid interval a:b.")(f)
    return f


def _dist_opts(f):
    opts = [
        click.option("--dist", type=click.Choice([m.value for m in D.Family if m is not D.Family.TABULATED]),
                     required=True, help="Density family."),
        click.option("--x0", type=float, default=0.0, show_default=True),
        click.option("--sigma", type=float, default=1.0, show_default=True),
        click.option("--gamma", type=float, default=1.0, show_default=True),
        click.option("--beta", "beta_scale", type=float, default=1.0, show_default=True, help="Gumbel scale."),
        click.option("--s", "s", type=float, default=1.0, show_default=True),
        click.option("--k", "k", type=float, default=3.0, show_default=True),
        click.option("--alpha", type=float, default=None, help="Beta-family shape alpha."),
        click.option("--beta-param", "beta_param", type=float, default=None, help="Beta-family shape beta."),
    ]
    for o in reversed(opts):
        f = o(f)
    return f


def _spec_from(dist, x0, sigma, gamma, beta_scale, s, k, alpha, beta_param):
    fam = D.Family(dist)
    try:
        if fam is D.Family.GAUSSIAN:
            return D.gaussian(sigma, x0)
        if fam is D.Family.LORENTZIAN:
            return D.lorentzian(gamma, x0)
        if fam is D.Family.GUMBEL:
            return D.gumbel(beta_scale, x0)
        if fam is D.Family.LOGISTIC:
            return D.logistic(s, x0)
        if fam is D.Family.RAYLEIGH:
            return D.rayleigh(sigma)
        if fam is D.Family.CHI:
            return D.chi(k, sigma)
        if alpha is None or beta_param is None:
            raise click.UsageError("--dist beta needs --alpha and --beta-param")
        return D.beta(alpha, beta_param)
    except ValueError as exc:
        raise click.UsageError(str(exc)) from None


def _config(units, grid_range, n, out_dir, fmt, **tol) -> RunConfig:
    try:
        tolerances = dict(DEFAULT_TOLERANCES)
        tolerances.update({k: v for k, v in tol.items() if v is not None})
        return RunConfig(UnitSystem(units), grid_range, n, Path(out_dir), fmt, tolerances)
    except ValueError as exc:
        raise click.UsageError(str(exc)) from None


def _fail(msg: str):
    click.echo(f"error: {msg}", err=True)
    sys.exit(1)


def _spec_record(spec):
    return {"family": spec.family.value, "params": dict(spec.params)}


def _grid_record(grid: Grid1D):
    return {"a": grid.a, "b": grid.b, "n": grid.n, "h": grid.h}


def _checked_grid(cfg, spec):
    try:
        grid = cfg.grid_for(spec)
        spec.domain.check(np.array([grid.a, grid.b]))
    except (DomainError, ValueError) as exc:
        raise click.UsageError(f"bad grid for {spec}: {exc}") from None
    return grid


def _emit(cfg: RunConfig, stem: str, header, columns, meta: dict) -> list[Path]:
    """Write a data table and its metadata in the configured format."""
    if cfg.fmt == "csv":
        return [
            write_csv(cfg.out_dir / f"{stem}.csv", header, columns),
            write_json(cfg.out_dir / f"{stem}.json", meta),
        ]
    data = {**meta, "columns": {h: np.asarray(c).ravel() for h, c in zip(header, columns)}}
    return [write_json(cfg.out_dir / f"{stem}.json", data)]


def _report(paths):
    for p in paths:
        click.echo(str(p))


# --- commands --------------------------------------------------------------


@click.group()
@click.version_option(package_name="artifact")
def main():
    """Construct potentials whose ground state has a prescribed density."""


@main.command()
@_dist_opts
@_grid_opts
@_common
def derive(dist, x0, sigma, gamma, beta_scale, s, k, alpha, beta_param, grid_range, n, units, out_dir, fmt):
    """Derive V(x) for a density family and write potential.csv/json."""
    spec = _spec_from(dist, x0, sigma, gamma, beta_scale, s, k, alpha, beta_param)
    cfg = _config(units, grid_range, n, out_dir, fmt)
    grid = _checked_grid(cfg, spec)
    u = cfg.units
    if spec.family is D.Family.BETA and not is_bounded_below(spec):
        _fail(_divergence_message(spec))
    try:
        curve = potential_from_exponent(spec, grid, u)
        if curve.offset_convention is OffsetConvention.MIN_ZERO:
            e0 = exact_ground_energy(spec, u, grid)
            curve = curve.shifted_to(e0)
            x_min, raw_min = potential_minimum(spec, u, grid)
            v_min = raw_min + e0
        else:
            e0 = ground_energy(spec, u)
            x_min = v_min = None
    except _DERIVATION_ERRORS as exc:
        _fail(str(exc))
    dens = D.eval_pdf(spec, grid.x)
    meta = {
        **_spec_record(spec),
        "units": {"hbar2_over_4m": u.hbar2_over_4m},
        "grid": _grid_record(grid),
        "offset_convention": curve.offset_convention.value,
        "E0": e0,
        "x_min": x_min,
        "V_min": v_min,
    }
    if curve.offset_convention is OffsetConvention.RAW_TABLE_CONSTANT:
        meta["note"] = "potential unbounded below; V column holds V - E with no shift"
    _report(_emit(cfg, "potential", ["x", "P", "V", "valid"], [grid.x, dens, curve.values, curve.mask], meta))


def _parse_gn(values):
    out = []
    for item in values:
        for tok in item.split(","):
            tok = tok.strip()
            if not tok:
                continue
            try:
                g = float(tok)
            except ValueError:
                raise click.BadParameter(f"not a number: {tok!r}", param_hint="--gN") from None
            if not math.isfinite(g):
                raise click.BadParameter(f"not finite: {tok!r}", param_hint="--gN")
            out.append(g)
    if not out:
        raise click.BadParameter("empty list", param_hint="--gN")
    return out


@main.command()
@_dist_opts
@_grid_opts
@click.option("--gN", "gn", multiple=True, default=("0,1,2,3",), show_default=True,
              help="Comma-separated nonlinearity values; may be repeated.")
@_common
def gpe(dist, x0, sigma, gamma, beta_scale, s, k, alpha, beta_param, grid_range, n, gn, units, out_dir, fmt):
    """GPE potentials and chemical potential for each gN."""
    spec = _spec_from(dist, x0, sigma, gamma, beta_scale, s, k, alpha, beta_param)
    cfg = _config(units, grid_range, n, out_dir, fmt)
    grid = _checked_grid(cfg, spec)
    gns = _parse_gn(gn)
    runs = []
    paths = []
    for g in gns:
        try:
            d = gpe_derive(spec, grid, g, cfg.units)
        except _DERIVATION_ERRORS as exc:
            _fail(str(exc))
        rec = {
            "gN": g,
            "mu": d.mu,
            "min_location": d.min_location,
            "eff_tilde_residual": gpe_residual_report(d, "EffTilde"),
            "paper_tilde_residual": gpe_residual_report(d, "PaperTilde"),
        }
        runs.append(rec)
        meta = {**_spec_record(spec), "grid": _grid_record(grid), "E0": d.e0, **rec}
        cols = [grid.x, d.density, d.v_tise.values, d.v_tilde_paper.values, d.v_tilde_eff.values,
                d.v_ext_selfconsistent.values]
        header = ["x", "P", "V_tise", "Vtilde_paper", "Vtilde_eff", "Vext_sc"]
        stem = f"gpe_gN_{g:g}"
        if cfg.fmt == "csv":
            paths.append(write_csv(cfg.out_dir / f"{stem}.csv", header, cols))
        else:
            paths.append(write_json(cfg.out_dir / f"{stem}.json",
                                    {**meta, "columns": dict(zip(header, cols))}))
    summary = {
        **_spec_record(spec),
        "units": {"hbar2_over_4m": cfg.units.hbar2_over_4m},
        "grid": _grid_record(grid),
        "E0": exact_ground_energy(spec, cfg.units, grid),
        "runs": runs,
        "notes": ["paper_tilde_residual is reported for information only; it is not a gate"],
    }
    paths.append(write_json(cfg.out_dir / "gpe.json", summary))
    _report(paths)


def _gate(value, tol, ok):
    return {"value": value, "tol": tol, "pass": bool(ok)}


def _run_verify(spec, grid, cfg, count_bound=False, threshold=None, pdf_tol=None):
    """Forward checks for one spec; returns the report dict."""
    u = cfg.units
    tol = cfg.tolerances
    report = {**_spec_record(spec), "grid": _grid_record(grid), "gates": {}, "notes": []}
    gates = report["gates"]
    if spec.is_closed_form:
        dev = consistency_check(spec, grid, u)
        report["identity_max_dev"] = dev
        # rounding in either formula grows with |V|; near hard walls |V| can
        # reach 1e7 on fine grids, so the gate is relative to that scale
        raw, valid = raw_potential(spec, grid.x, u)
        scale = max(1.0, float(np.max(np.abs(raw[valid]))))
        report["identity_scale"] = scale
        gates["identity"] = _gate(dev / scale, tol["identity"], dev <= tol["identity"] * scale)
    if is_bounded_below(spec):
        rt = verify_roundtrip(spec, grid, u, refine=True)
        report.update(
            e_exact=rt.e_exact,
            e_fd=rt.e_fd,
            e_fd_refined=rt.e_fd_refined,
            order_estimate=rt.order_estimate,
            pdf_sup_error=rt.pdf_sup_error,
            window=list(rt.window),
        )
        if pdf_tol is None:
            pdf_tol = FAMILY_PDF_TOLERANCE.get(spec.family, tol["pdf"])
        gates["energy"] = _gate(rt.energy_error, tol["energy"], rt.energy_error <= tol["energy"])
        gates["pdf"] = _gate(rt.pdf_sup_error, pdf_tol, rt.pdf_sup_error <= pdf_tol)
        if spec.is_closed_form:
            o = rt.order_estimate
            gates["order"] = _gate(o, tol["order"], math.isfinite(o) and abs(o - 2) <= tol["order"])
    else:
        report["notes"].append("forward round trip skipped: " + _divergence_message(spec))
    if count_bound:
        if threshold is None:
            threshold = asymptotic_potential(spec, u)
            if not math.isfinite(threshold):
                raise click.UsageError(f"{spec.family.value} has no finite continuum threshold; pass --threshold")
        report["bound_state_threshold"] = threshold
        report["bound_states"] = count_bound_states_for(spec, grid, threshold, u)
    if spec.family is D.Family.LORENTZIAN:
        chk = lorentzian_maximum_check(spec, u)
        report["lorentzian_maximum_check"] = chk
        if not chk["consistent"]:
            report["notes"].append(
                "stated barrier height 2/(3 gamma^2) differs from the closed form at x0 +- gamma sqrt(2), "
                "which is 2/(3 gamma^2) above the asymptote 2/gamma^2; both values recorded"
            )
    if spec.family is D.Family.RAYLEIGH:
        report["notes"].append("stated maximum at x = +-sigma not asserted: the potential increases monotonically")
    report["pass"] = all(g["pass"] for g in gates.values())
    return report


@main.command()
@_dist_opts
@_grid_opts
@click.option("--count-bound", is_flag=True, help="Count bound states below the threshold.")
@click.option("--threshold", type=float, default=None, help="Bound-state threshold (default: continuum edge).")
@click.option("--tol-energy", type=float, default=None)
@click.option("--tol-pdf", type=float, default=None)
@click.option("--tol-order", type=float, default=None)
@click.option("--tol-identity", type=float, default=None)
@_common
def verify(dist, x0, sigma, gamma, beta_scale, s, k, alpha, beta_param, grid_range, n, count_bound, threshold,
           tol_energy, tol_pdf, tol_order, tol_identity, units, out_dir, fmt):
    """Forward finite-difference check; exit 0 iff every gate passes."""
    spec = _spec_from(dist, x0, sigma, gamma, beta_scale, s, k, alpha, beta_param)
    cfg = _config(units, grid_range, n, out_dir, fmt, energy=tol_energy, order=tol_order, identity=tol_identity)
    grid = _checked_grid(cfg, spec)
    try:
        report = _run_verify(spec, grid, cfg, count_bound, threshold, tol_pdf)
    except _DERIVATION_ERRORS as exc:
        _fail(str(exc))
    path = write_json(cfg.out_dir / "verify.json", report)
    _report([path])
    if not report["pass"]:
        failed = [k for k, g in report["gates"].items() if not g["pass"]]
        _fail("verification gates failed: " + ", ".join(failed))


def table_specs():
    """Default parameter sets covered by the ``table`` command."""
    out = []
    for x0 in (0.0, 1.0):
        out += [D.gaussian(1.0, x0), D.lorentzian(1.0, x0), D.gumbel(1.0, x0), D.logistic(1.0, x0)]
    out.append(D.rayleigh(1.0))
    out += [D.chi(k, 1.0) for k in (3, 4, 6)]
    out += [D.beta(4, 4), D.beta(0.5, 0.5)]
    return out


def table_rows(units: UnitSystem = UnitSystem(), n: int = 801):
    rows = []
    for spec in table_specs():
        grid = default_grid(spec, n)
        try:
            e0 = ground_energy(spec, units)
        except UnsupportedError:
            e0 = exact_ground_energy(spec, units, grid) if is_bounded_below(spec) else None
        rows.append({
            **_spec_record(spec),
            "V_formula_check_max_dev": consistency_check(spec, grid, units),
            "E0": e0,
            "bounded_below": is_bounded_below(spec),
        })
    return rows


@main.command()
@click.option("--tol", type=float, default=1e-9, show_default=True)
@_common
def table(tol, units, out_dir, fmt):
    """Check every closed-form potential against the exponent formula."""
    cfg = _config(units, None, 801, out_dir, fmt)
    if not tol > 0:
        raise click.UsageError("--tol must be positive")
    rows = table_rows(cfg.units)
    path = write_json(cfg.out_dir / "table.json", {"tolerance": tol, "rows": rows})
    _report([path])
    bad = [f"{r['family']}{r['params']}" for r in rows if not r["V_formula_check_max_dev"] <= tol]
    if bad:
        _fail("identity deviation above tolerance for: " + "; ".join(bad))


@main.command()
@click.option("--n", "qn", type=int, default=2, show_default=True, help="Principal quantum number (1..4).")
@click.option("--l", "ql", type=int, default=1, show_default=True)
@click.option("--m", "qm", type=int, default=0, show_default=True)
@click.option("--p-max", type=float, default=1.0, show_default=True, help="Upper p_r in units of p0.")
@click.option("--np", "n_p", type=click.IntRange(min=3), default=401, show_default=True)
@click.option("--ntheta", "n_theta", type=click.IntRange(min=3), default=401, show_default=True)
@click.option("--no-jacobian", is_flag=True, help="Drop the sin(theta_p) factor from the density.")
@_common
def hydrogen(qn, ql, qm, p_max, n_p, n_theta, no_jacobian, units, out_dir, fmt):
    """Momentum-space hydrogen density and its potential on (p_r, theta_p)."""
    cfg = _config(units, None, 3, out_dir, fmt)
    try:
        q = HQuantumNumbers(qn, ql, qm)
        mg = MomentumGrid(p_max, n_p, n_theta)
        mg.grid
    except ValueError as exc:
        raise click.UsageError(str(exc)) from None
    jac = not no_jacobian
    try:
        field_ = potential_2d(q, mg, cfg.units, jacobian=jac)
    except _DERIVATION_ERRORS as exc:
        _fail(str(exc))
    pp, tt = mg.grid.mesh()
    dens = pdf_2d(q, pp, tt, jac)
    meta = {
        "n": qn, "l": ql, "m": qm,
        "jacobian": jac,
        "grid": {"p_max": p_max, "n_p": n_p, "n_theta": n_theta},
        "normalization": normalization_2d(q, mg) if jac else None,
        "masked_fraction": float(1 - np.mean(field_.mask)),
        "energy": field_.energy,
    }
    header = ["p_r", "theta_p", "P", "V", "valid"]
    _report(_emit(cfg, f"hydrogen_{qn}{ql}{qm}", header, [pp, tt, dens, field_.values, field_.mask], meta))


@main.command()
@click.option("--pdf-file", type=click.Path(exists=True, dir_okay=False), required=True,
              help="CSV with header x,P on a uniform grid.")
@click.option("--verify", "do_verify", is_flag=True, help="Also run the forward round trip.")
@click.option("--tol-pdf", type=float, default=None)
@_common
def custom(pdf_file, do_verify, tol_pdf, units, out_dir, fmt):
    """Derive V from a tabulated density."""
    cfg = _config(units, None, 3, out_dir, fmt)
    try:
        table_ = D.read_tabulated_csv(pdf_file)
        spec = D.tabulated(table_)
        a = D.normalization(spec)
    except InputFormatError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)
    except (ValueError, NormalizationError) as exc:
        click.echo(f"error: {pdf_file}: {exc}", err=True)
        sys.exit(2)
    grid = table_.grid
    try:
        curve = potential_from_exponent(spec, grid, cfg.units)
        report = _run_verify(spec, grid, cfg, pdf_tol=tol_pdf) if do_verify else None
    except _DERIVATION_ERRORS as exc:
        _fail(str(exc))
    meta = {
        "family": "tabulated",
        "source": str(pdf_file),
        "grid": _grid_record(grid),
        "A": a,
        "E0": curve.energy,
        "masked_fraction": float(1 - np.mean(curve.mask)),
    }
    if report is not None:
        meta["verify"] = report
    paths = _emit(cfg, "potential", ["x", "P", "V", "valid"], [grid.x, D.eval_pdf(spec, grid.x), curve.values,
                                                                curve.mask], meta)
    _report(paths)
    if report is not None and not report["pass"]:
        _fail("verification gates failed")


if __name__ == "__main__":  # pragma: no cover
    main()
