import json

import numpy as np
import pytest

from gspwigner import cli
from gspwigner.analysis import exact_wigner_covariance, theorem_check
from gspwigner.gspmodel import white_noise
from gspwigner.numgrid import Kernel, PhaseField, Signal, make_grid, make_phase_grid

SQRT_2_OVER_PI = 0.7978845608028654


def run(*argv):
    return cli.main([str(a) for a in argv])


def manifest(d):
    return json.loads((d / "manifest.json").read_text())


@pytest.fixture
def gauss_csv(tmp_path):
    g = make_grid(64, 0.25, -8.0)
    path = tmp_path / "gauss.csv"
    cli.write_signal(path, Signal(g, np.pi ** -0.25 * np.exp(-g.points ** 2 / 2)))
    return path


def test_kernel_white_noise(tmp_path):
    out = tmp_path / "k"
    assert run("kernel", "--process", "white-noise", "--power", 1, "--n", 16, "--dx", 1,
               "--x0", -8, "--out", out) == 0
    K = cli.read_kernel(out / "kernel.csv")
    np.testing.assert_array_equal(K.values, np.eye(16))
    m = manifest(out)
    assert m["convention"] == "halfgrid-v1"
    assert m["grid"] == {"n": 16, "dx": 1.0, "x0": -8.0, "nxi": 16, "dxi": np.pi / 16}
    assert m["model"] == {"kind": "white-noise", "power": 1.0}
    for key in ("seed", "samples", "command_line", "tool_version"):
        assert key in m


def test_kernel_brownian(tmp_path):
    out = tmp_path / "k"
    assert run("kernel", "--process", "brownian", "--n", 32, "--dx", 0.25, "--x0", -2,
               "--out", out) == 0
    K = cli.read_kernel(out / "kernel.csv")
    g = K.grid
    assert K.values[g.index_of(1.0), g.index_of(2.0)] == 1.0


def test_kernel_density_table(tmp_path):
    dens = tmp_path / "mu.csv"
    xi = np.linspace(-6, 6, 49)
    cli._write_rows(dens, ("xi", "mu"), (xi, np.exp(-xi ** 2 / 2)))
    out = tmp_path / "k"
    assert run("kernel", "--process", "stationary", "--density", dens, "--n", 8, "--dx", 0.5,
               "--out", out) == 0
    K = cli.read_kernel(out / "kernel.csv").values
    assert np.ptp(np.diag(K).real) <= 1e-14
    bad = tmp_path / "bad.csv"
    bad.write_text("xi,mu\n0,1\n1,-1\n")
    assert run("kernel", "--process", "stationary", "--density", bad, "--out", out) == 3


def test_custom_kernel_file(tmp_path):
    g = make_grid(4, 1.0, 0.0)
    kpath = tmp_path / "in.csv"
    cli.write_kernel(kpath, Kernel(g, np.diag([1.0, 2, 3, 4])))
    assert run("spectrum", "--exact", "--process", "custom", "--kernel", kpath,
               "--out", tmp_path / "s") == 0
    cli.write_kernel(kpath, Kernel(g, np.array([[0, 1, 0, 0], [1, 0, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1.0]])))
    assert run("spectrum", "--exact", "--process", "custom", "--kernel", kpath,
               "--out", tmp_path / "s") == 3


@pytest.mark.parametrize("argv", [
    [],
    ["kernel", "--process", "white-noise", "--out", "x"],
    ["kernel", "--process", "white-noise", "--power", "-1", "--out", "x"],
    ["kernel", "--process", "brownian", "--n", "7", "--out", "x"],
    ["kernel", "--process", "brownian", "--dx", "0", "--out", "x"],
    ["kernel", "--process", "custom", "--out", "x"],
    ["spectrum", "--process", "brownian", "--out", "x"],
    ["spectrum", "--process", "brownian", "--exact", "--mc", "--out", "x"],
    ["spectrum", "--process", "brownian", "--mc", "--samples", "10", "--out", "x"],
    ["covariance", "--process", "brownian", "--n", "4", "--mc", "--samples", "10", "--seed", "1",
     "--subset", "oops", "--out", "x"],
    ["covariance", "--process", "brownian", "--n", "4", "--mc", "--samples", "10", "--seed", "1",
     "--subset", "99:0", "--out", "x"],
    ["weyl", "apply", "--out", "x"],
    ["verify", "--suite", "bogus"],
])
def test_usage_errors(tmp_path, monkeypatch, argv):
    monkeypatch.chdir(tmp_path)
    assert cli.main(argv) == 2


def test_threads_env(tmp_path, monkeypatch):
    base = ["spectrum", "--process", "white-noise", "--power", 1, "--n", 8, "--mc",
            "--samples", 50, "--seed", 3]
    monkeypatch.setenv("GSP_THREADS", "zero")
    assert run(*base, "--out", tmp_path / "a") == 2
    monkeypatch.setenv("GSP_THREADS", "0")
    assert run(*base, "--out", tmp_path / "a") == 2


def test_wigner_impulse_and_gaussian(tmp_path, gauss_csv):
    g = make_grid(8, 1.0, -4.0)
    f = np.zeros(8)
    f[3] = 1.0
    cli.write_signal(tmp_path / "imp.csv", Signal(g, f))
    assert run("wigner", "--signal", tmp_path / "imp.csv", "--out", tmp_path / "w") == 0
    W = cli.read_field(tmp_path / "w" / "wigner.csv").values
    np.testing.assert_allclose(W[6], SQRT_2_OVER_PI, atol=1e-15)
    assert not np.any(np.delete(W, 6, axis=0))
    assert run("wigner", "--signal", gauss_csv, "--out", tmp_path / "g") == 0
    F = cli.read_field(tmp_path / "g" / "wigner.csv")
    s0, k0 = np.argmin(np.abs(F.pgrid.x)), np.argmin(np.abs(F.pgrid.xi))
    assert abs(F.values[s0, k0] - SQRT_2_OVER_PI) < 1e-5


def test_wigner_input_errors(tmp_path, gauss_csv):
    empty = tmp_path / "empty.csv"
    empty.write_text("")
    assert run("wigner", "--signal", empty, "--out", tmp_path / "w") == 3
    assert run("wigner", "--signal", tmp_path / "missing.csv", "--out", tmp_path / "w") == 3
    bad = tmp_path / "bad.csv"
    bad.write_text("x,re,im\n0,1,0\n1,abc,0\n")
    assert run("wigner", "--signal", bad, "--out", tmp_path / "w") == 3
    hdr = tmp_path / "hdr.csv"
    hdr.write_text("t,re,im\n0,1,0\n1,1,0\n")
    assert run("wigner", "--signal", hdr, "--out", tmp_path / "w") == 3
    other = tmp_path / "other.csv"
    cli.write_signal(other, Signal(make_grid(8, 1.0), np.ones(8)))
    assert run("wigner", "--signal", gauss_csv, "--signal2", other, "--out", tmp_path / "w") == 3


def test_weyl_commands(tmp_path, gauss_csv):
    g = make_grid(64, 0.25, -8.0)
    pg = make_phase_grid(g)
    X, XI = np.meshgrid(pg.x, pg.xi, indexing="ij")
    cli.write_field(tmp_path / "one.csv", PhaseField(pg, np.ones(pg.shape)))
    assert run("weyl", "quantize", "--symbol", tmp_path / "one.csv", "--out", tmp_path / "q") == 0
    K = cli.read_kernel(tmp_path / "q" / "kernel.csv").values
    np.testing.assert_allclose(np.diag(K), 1 / (2 * g.dx), atol=1e-12)
    # round trip through files
    assert run("weyl", "dequantize", "--kernel", tmp_path / "q" / "kernel.csv",
               "--out", tmp_path / "d") == 0
    assert run("weyl", "quantize", "--symbol", tmp_path / "d" / "symbol.csv",
               "--out", tmp_path / "q2") == 0
    K2 = cli.read_kernel(tmp_path / "q2" / "kernel.csv").values
    assert np.abs(K2 - K).max() <= 1e-12 * np.abs(K).max()
    cli.write_field(tmp_path / "x.csv", PhaseField(pg, X))
    assert run("weyl", "apply", "--symbol", tmp_path / "x.csv", "--signal", gauss_csv,
               "--out", tmp_path / "a") == 0
    out = cli.read_signal(tmp_path / "a" / "signal.csv").values
    f = cli.read_signal(gauss_csv).values
    assert np.abs(out - g.points * f).max() <= 1e-8


def test_spectrum_exact_and_mc(tmp_path):
    assert run("spectrum", "--exact", "--process", "white-noise", "--power", 1, "--n", 16,
               "--dx", 1, "--out", tmp_path / "e") == 0
    E = cli.read_field(tmp_path / "e" / "spectrum.csv").values.real
    np.testing.assert_allclose(0.5 * (E[:-1:2] + E[1::2]), 1 / np.sqrt(2 * np.pi), atol=1e-13)
    base = ["spectrum", "--mc", "--process", "brownian", "--n", 8, "--dx", 0.5,
            "--samples", 300, "--seed", 7]
    assert run(*base, "--out", tmp_path / "m1") == 0
    assert run(*base, "--out", tmp_path / "m2") == 0
    for name in ("spectrum.csv", "stderr.csv"):
        assert (tmp_path / "m1" / name).read_bytes() == (tmp_path / "m2" / name).read_bytes()
    m = manifest(tmp_path / "m1")
    assert (m["seed"], m["samples"]) == (7, 300)


def test_threads_do_not_change_output(tmp_path, monkeypatch):
    base = ["spectrum", "--mc", "--process", "white-noise", "--power", 2, "--n", 8,
            "--samples", 4500, "--seed", 1]
    monkeypatch.setenv("GSP_THREADS", "1")
    assert run(*base, "--out", tmp_path / "a") == 0
    monkeypatch.setenv("GSP_THREADS", "3")
    assert run(*base, "--out", tmp_path / "b") == 0
    assert (tmp_path / "a" / "spectrum.csv").read_bytes() == (tmp_path / "b" / "spectrum.csv").read_bytes()


def test_covariance_commands(tmp_path):
    assert run("covariance", "--exact", "--process", "white-noise", "--power", 1, "--n", 4,
               "--out", tmp_path / "e") == 0
    m = manifest(tmp_path / "e")
    T = cli.read_tensor4(tmp_path / "e" / "covariance4.csv", tuple(m["covariance4_shape"]))
    ref = exact_wigner_covariance(white_noise(make_grid(4, 1.0, -2.0), 1.0).kernel).values
    np.testing.assert_array_equal(T, ref)
    S = cli.read_tensor4(tmp_path / "e" / "symbol4.csv", tuple(m["symbol4_shape"]))
    assert S.shape == (13, 7, 7, 4)
    assert len(m["symbol4_axes"]["x1"]) == 13
    assert run("covariance", "--mc", "--process", "white-noise", "--power", 1, "--n", 8,
               "--samples", 200, "--seed", 2, "--subset", "7:4;8:4", "--out", tmp_path / "m") == 0
    assert manifest(tmp_path / "m")["mean_centering"] == "known"
    rows = (tmp_path / "m" / "covariance_subset.csv").read_text().splitlines()
    assert rows[0] == "i,j,re,im" and len(rows) == 5


def test_field_csv_round_trip(rng, tmp_path):
    pg = make_phase_grid(make_grid(10, 0.3, -1.7))
    F = PhaseField(pg, rng.standard_normal(pg.shape) + 1j * rng.standard_normal(pg.shape))
    cli.write_field(tmp_path / "f.csv", F)
    G = cli.read_field(tmp_path / "f.csv")
    assert G.pgrid.base.n == 10
    np.testing.assert_array_equal(G.values, F.values)
    g = make_grid(6, 0.1, 0.3)
    K = Kernel(g, rng.standard_normal((6, 6)))
    cli.write_kernel(tmp_path / "k.csv", K)
    np.testing.assert_array_equal(cli.read_kernel(tmp_path / "k.csv").values, K.values)


def test_field_frequency_axis_checked(tmp_path):
    pg = make_phase_grid(make_grid(4, 1.0, 0.0))
    cli.write_field(tmp_path / "f.csv", PhaseField(pg, np.ones(pg.shape)))
    text = (tmp_path / "f.csv").read_text().replace(repr(float(pg.xi[0])), "-2")
    (tmp_path / "f.csv").write_text(text)
    with pytest.raises(cli.InputFormatError):
        cli.read_field(tmp_path / "f.csv")


def test_verify_identities(tmp_path, capsys):
    rep = tmp_path / "r.json"
    assert run("verify", "--suite", "identities", "--n", 16, "--report", rep) == 0
    data = json.loads(rep.read_text())
    assert data["passed"] and all(c["passed"] for c in data["checks"])
    assert "PASS" in capsys.readouterr().out


def test_verify_exit_code_follows_report(tmp_path):
    rep = tmp_path / "r.json"
    code = run("verify", "--suite", "theorem", "--process", "white-noise", "--report", rep)
    data = json.loads(rep.read_text())
    assert code == (0 if data["passed"] else 1)
    ref = theorem_check(white_noise(make_grid(16, 1.0, -8.0), 1.0)).rel_error_interior
    assert data["checks"][0]["value"] == pytest.approx(ref, rel=1e-12)


def test_verify_nonneg_witnesses(tmp_path):
    rep = tmp_path / "r.json"
    code = run("verify", "--suite", "nonneg", "--report", rep)
    data = json.loads(rep.read_text())
    assert code == (0 if data["passed"] else 1)
    by = {c["check"]: c for c in data["checks"]}
    assert by["Hudson: W(hermite1) negative"]["passed"]
    assert by["shift hermite1 ab=0.05 negative"]["passed"]
    assert all(c["passed"] for k, c in by.items() if k.startswith("shift"))
