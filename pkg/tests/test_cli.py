import json
import math

import numpy as np
import pytest
from click.testing import CliRunner

from pdfpot import distributions as D
from pdfpot.cli import main
from pdfpot.grids import Grid1D


@pytest.fixture
def run(tmp_path):
    runner = CliRunner()

    def _run(*args, env=None):
        return runner.invoke(main, [str(a) for a in args], env=env, catch_exceptions=False)

    return _run


def read_csv(path):
    return np.genfromtxt(path, delimiter=",", names=True)


def write_pdf(path, x, p):
    path.write_text("x,P\n" + "".join(f"{float(a)!r},{float(b)!r}\n" for a, b in zip(x, p)))
    return path


# --- derive ------------------------------------------------------------------


def test_derive_gumbel(run, tmp_path):
    r = run("derive", "--dist", "gumbel", "--x0", 1, "--beta", 1, "--range", "-5:10", "--n", 2001, "--out", tmp_path)
    assert r.exit_code == 0, r.output
    meta = json.loads((tmp_path / "potential.json").read_text())
    assert meta["E0"] == 1.5
    assert meta["x_min"] == pytest.approx(1 - math.log(2), abs=1e-10)
    assert meta["V_min"] == pytest.approx(0.0, abs=1e-14)
    assert meta["family"] == "gumbel" and meta["params"] == {"beta": 1, "x0": 1}
    lines = (tmp_path / "potential.csv").read_text().splitlines()
    assert lines[0] == "x,P,V,valid" and len(lines) == 2002
    assert {len(line.split(",")) for line in lines} == {4}


def test_derive_gaussian_values(run, tmp_path):
    r = run("derive", "--dist", "gaussian", "--sigma", 1, "--x0", 0, "--range", "-6:6", "--n", 601, "--out", tmp_path)
    assert r.exit_code == 0
    d = read_csv(tmp_path / "potential.csv")
    assert np.max(np.abs(d["V"] - d["x"] ** 2 / 2)) <= 1e-12


def test_derive_beta_divergent(run, tmp_path):
    r = run("derive", "--dist", "beta", "--alpha", 2, "--beta-param", 4, "--out", tmp_path)
    assert r.exit_code == 1
    assert "1 < alpha=2 < 3" in r.output
    assert not (tmp_path / "potential.csv").exists()


def test_derive_rayleigh_raw(run, tmp_path):
    r = run("derive", "--dist", "rayleigh", "--n", 101, "--out", tmp_path)
    assert r.exit_code == 0
    meta = json.loads((tmp_path / "potential.json").read_text())
    assert meta["offset_convention"] == "RawTableConstant"
    assert meta["x_min"] is None


def test_derive_json_format(run, tmp_path):
    r = run("derive", "--dist", "logistic", "--n", 101, "--format", "json", "--out", tmp_path)
    assert r.exit_code == 0
    data = json.loads((tmp_path / "potential.json").read_text())
    assert len(data["columns"]["V"]) == 101
    assert not (tmp_path / "potential.csv").exists()


def test_derive_units(run, tmp_path):
    r = run("derive", "--dist", "gaussian", "--range", "-4:4", "--n", 81, "--units", 0.5, "--out", tmp_path)
    assert r.exit_code == 0
    d = read_csv(tmp_path / "potential.csv")
    np.testing.assert_allclose(d["V"], 0.25 * d["x"] ** 2, atol=1e-12)


@pytest.mark.parametrize(
    "args",
    [
        ["derive", "--dist", "chi", "--k", 2],
        ["derive", "--dist", "gaussian", "--sigma", -1],
        ["derive", "--dist", "nope"],
        ["derive", "--dist", "gaussian", "--range", "5:1"],
        ["derive", "--dist", "gaussian", "--range", "abc"],
        ["derive", "--dist", "gaussian", "--n", 2],
        ["derive", "--dist", "chi", "--range", "-1:5"],
        ["derive", "--dist", "beta", "--alpha", 4],
        ["derive"],
        ["gpe", "--dist", "gumbel", "--gN", "1,x"],
        ["verify", "--dist", "gaussian", "--count-bound", "--n", 101],
        ["hydrogen", "--n", 5],
        ["hydrogen", "--n", 2, "--l", 2],
        ["custom"],
        ["table", "--tol", -1],
    ],
)
def test_usage_errors_exit_2(run, tmp_path, args):
    r = run(*args, "--out", tmp_path)
    assert r.exit_code == 2, r.output


# --- gpe ------------------------------------------------------------------------


def test_gpe_files(run, tmp_path):
    r = run("gpe", "--dist", "gumbel", "--x0", 1, "--beta", 1, "--range", "-5:10", "--n", 2001, "--out", tmp_path)
    assert r.exit_code == 0, r.output
    summary = json.loads((tmp_path / "gpe.json").read_text())
    mus = {run_["gN"]: run_["mu"] for run_ in summary["runs"]}
    assert mus[0] == 1.5
    assert mus[3] == pytest.approx(0.7669933904631964062, abs=1e-12)
    for rec in summary["runs"]:
        assert rec["eff_tilde_residual"] <= 1e-9
        assert math.isfinite(rec["paper_tilde_residual"])
    d0 = read_csv(tmp_path / "gpe_gN_0.csv")
    np.testing.assert_array_equal(d0["Vtilde_paper"], d0["V_tise"])
    d3 = read_csv(tmp_path / "gpe_gN_3.csv")
    assert list(d3.dtype.names) == ["x", "P", "V_tise", "Vtilde_paper", "Vtilde_eff", "Vext_sc"]
    i = int(np.argmin(np.abs(d3["x"] - 1)))
    assert d3["Vtilde_paper"][i] == pytest.approx(0.5 + 3 * math.exp(-1), abs=1e-12)


def test_gpe_negative_and_repeated(run, tmp_path):
    r = run("gpe", "--dist", "gaussian", "--n", 401, "--gN", "-1", "--gN", "0.5,2", "--out", tmp_path)
    assert r.exit_code == 0
    names = sorted(p.name for p in tmp_path.glob("gpe_gN_*.csv"))
    assert names == ["gpe_gN_-1.csv", "gpe_gN_0.5.csv", "gpe_gN_2.csv"]


def test_gpe_unbounded_exit_1(run, tmp_path):
    r = run("gpe", "--dist", "rayleigh", "--n", 101, "--out", tmp_path)
    assert r.exit_code == 1


# --- verify ----------------------------------------------------------------------


def test_verify_gumbel(run, tmp_path):
    r = run("verify", "--dist", "gumbel", "--out", tmp_path)
    assert r.exit_code == 0, r.output
    rep = json.loads((tmp_path / "verify.json").read_text())
    assert rep["e_exact"] == 1.5
    assert abs(rep["e_fd"] - 1.5) <= 1e-3
    for key in ("order_estimate", "pdf_sup_error", "identity_max_dev"):
        assert math.isfinite(rep[key])


def test_verify_gaussian_sigma2(run, tmp_path):
    r = run("verify", "--dist", "gaussian", "--sigma", 2, "--out", tmp_path)
    assert r.exit_code == 0
    assert json.loads((tmp_path / "verify.json").read_text())["e_exact"] == 0.25


def test_verify_lorentzian_bound_states_and_note(run, tmp_path):
    r = run("verify", "--dist", "lorentzian", "--gamma", 1, "--count-bound", "--out", tmp_path)
    assert r.exit_code == 0, r.output
    rep = json.loads((tmp_path / "verify.json").read_text())
    assert rep["bound_states"] == 1
    chk = rep["lorentzian_maximum_check"]
    assert chk["consistent"] is False
    assert chk["direct_value"] == pytest.approx(8 / 3)
    assert any("barrier" in n for n in rep["notes"])


def test_verify_fails_on_tight_gate(run, tmp_path):
    r = run("verify", "--dist", "gaussian", "--n", 401, "--tol-energy", 1e-12, "--out", tmp_path)
    assert r.exit_code == 1
    rep = json.loads((tmp_path / "verify.json").read_text())
    assert rep["gates"]["energy"]["pass"] is False


def test_verify_rayleigh_skips_roundtrip(run, tmp_path):
    r = run("verify", "--dist", "rayleigh", "--n", 801, "--out", tmp_path)
    assert r.exit_code == 0
    rep = json.loads((tmp_path / "verify.json").read_text())
    assert rep["e_fd"] is None if "e_fd" in rep else True
    assert any("skipped" in n for n in rep["notes"])


def test_verify_threshold_flag(run, tmp_path):
    r = run("verify", "--dist", "gaussian", "--count-bound", "--threshold", 10, "--n", 801, "--out", tmp_path)
    assert r.exit_code == 0
    assert json.loads((tmp_path / "verify.json").read_text())["bound_states"] == 5


# --- table -------------------------------------------------------------------------


def test_table(run, tmp_path):
    r = run("table", "--out", tmp_path)
    assert r.exit_code == 0
    rows = json.loads((tmp_path / "table.json").read_text())["rows"]
    assert {row["family"] for row in rows} == {"gaussian", "lorentzian", "gumbel", "logistic", "rayleigh", "chi", "beta"}
    assert all(row["V_formula_check_max_dev"] <= 1e-9 for row in rows)


def test_table_fails_when_tolerance_unreachable(run, tmp_path):
    assert run("table", "--tol", 1e-30, "--out", tmp_path).exit_code == 1


# --- hydrogen ------------------------------------------------------------------------


def test_hydrogen_210(run, tmp_path):
    r = run("hydrogen", "--n", 2, "--l", 1, "--m", 0, "--np", 101, "--ntheta", 101, "--out", tmp_path)
    assert r.exit_code == 0
    meta = json.loads((tmp_path / "hydrogen_210.json").read_text())
    assert 0 < meta["masked_fraction"] < 0.05
    d = read_csv(tmp_path / "hydrogen_210.csv")
    assert d.size == 101 * 101
    node = np.isclose(d["theta_p"], math.pi / 2, atol=1e-12)
    assert node.sum() == 101 and not d["valid"][node].any()
    assert np.all(np.isnan(d["V"][d["valid"] == 0]))


def test_hydrogen_default_normalization(run, tmp_path):
    r = run("hydrogen", "--out", tmp_path)
    assert r.exit_code == 0
    meta = json.loads((tmp_path / "hydrogen_210.json").read_text())
    assert meta["normalization"] == pytest.approx(1.0, abs=1e-6)


# --- custom ----------------------------------------------------------------------------


def test_custom_gaussian(run, tmp_path):
    g = Grid1D(-8, 8, 1601)
    src = write_pdf(tmp_path / "in.csv", g.x, D.eval_pdf(D.gaussian(), g.x))
    r = run("custom", "--pdf-file", src, "--out", tmp_path / "o")
    assert r.exit_code == 0, r.output
    d = read_csv(tmp_path / "o" / "potential.csv")
    ok = d["valid"] == 1
    assert np.max(np.abs(d["V"][ok] - d["x"][ok] ** 2 / 2)) <= 1e-3


def test_custom_double_well_verify(run, tmp_path):
    g = Grid1D(-8, 8, 1601)
    p = 0.5 * (D.eval_pdf(D.gaussian(1, -2), g.x) + D.eval_pdf(D.gaussian(1, 2), g.x))
    src = write_pdf(tmp_path / "in.csv", g.x, p)
    r = run("custom", "--pdf-file", src, "--verify", "--out", tmp_path / "o")
    assert r.exit_code == 0, r.output
    meta = json.loads((tmp_path / "o" / "potential.json").read_text())
    assert meta["verify"]["pdf_sup_error"] <= 1e-3
    d = read_csv(tmp_path / "o" / "potential.csv")
    # double well: a local maximum at the origin
    i = int(np.argmin(np.abs(d["x"])))
    assert d["V"][i] > d["V"][i - 50] and d["V"][i] > d["V"][i + 50]


def test_custom_scaled_input_normalized(run, tmp_path):
    g = Grid1D(-30, 30, 3001)
    src = write_pdf(tmp_path / "in.csv", g.x, 2 * D.eval_pdf(D.logistic(), g.x))
    assert run("custom", "--pdf-file", src, "--out", tmp_path).exit_code == 0
    assert json.loads((tmp_path / "potential.json").read_text())["A"] == pytest.approx(0.5, abs=1e-6)


@pytest.mark.parametrize(
    "text,needle",
    [
        ("x,P\n0,1\n1,2\n0.5,1\n", "line"),
        ("x,P\n0,1\n1,oops\n2,1\n", "line 3"),
        ("x,P\n0,1\n1,1\n3,1\n", "interval"),
        ("x,P\n0,0\n1,0\n2,0\n", "mass"),
    ],
)
def test_custom_malformed_exit_2(run, tmp_path, text, needle):
    src = tmp_path / "bad.csv"
    src.write_text(text)
    r = run("custom", "--pdf-file", src, "--out", tmp_path)
    assert r.exit_code == 2
    assert needle in r.output


# --- config, environment, determinism ---------------------------------------------------


def test_config_file_and_flag_precedence(run, tmp_path):
    cfg = tmp_path / "recipe.cfg"
    cfg.write_text("# figure 1\ndist = gumbel\nx0 = 1\nbeta = 2\nn = 401\nrange = -5:20\n")
    r = run("derive", "--config", cfg, "--n", 801, "--out", tmp_path)
    assert r.exit_code == 0, r.output
    meta = json.loads((tmp_path / "potential.json").read_text())
    assert meta["params"] == {"beta": 2, "x0": 1}
    assert meta["grid"]["n"] == 801
    assert meta["grid"]["a"] == -5


def test_bad_config_line(run, tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("dist gumbel\n")
    assert run("derive", "--config", cfg).exit_code == 2


def test_output_dir_from_environment(tmp_path):
    runner = CliRunner()
    r = runner.invoke(main, ["table"], env={"PDFPOT_OUTPUT_DIR": str(tmp_path / "env")})
    assert r.exit_code == 0
    assert (tmp_path / "env" / "table.json").exists()


def test_byte_identical_reruns(run, tmp_path):
    args = ["gpe", "--dist", "gumbel", "--x0", 1, "--n", 501, "--gN", "0,3"]
    run(*args, "--out", tmp_path / "a")
    run(*args, "--out", tmp_path / "b")
    for p in sorted((tmp_path / "a").iterdir()):
        assert p.read_bytes() == (tmp_path / "b" / p.name).read_bytes()
        assert b"\r" not in p.read_bytes()


def test_module_entry_point():
    import subprocess
    import sys

    out = subprocess.run([sys.executable, "-m", "pdfpot", "--help"], capture_output=True, text=True)
    assert out.returncode == 0 and "derive" in out.stdout


def test_unknown_config_key(run, tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("dist = gumbel\nsigmaa = 2\n")
    r = run("derive", "--config", cfg)
    assert r.exit_code == 2 and "sigmaa" in r.output
