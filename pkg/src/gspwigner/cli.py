"""Command-line driver.

Subcommands: ``kernel``, ``wigner``, ``weyl``, ``spectrum``, ``covariance``,
``verify``.  Every run writes CSV payloads plus one ``manifest.json``.

Exit codes: 0 success, 1 verification failure, 2 usage error,
3 malformed input file.
"""
from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from . import analysis as an
from . import gspmodel as gm
from . import montecarlo as mc
from . import spectral, weyl
from .numgrid import (CONVENTION, CovTensor4, Grid1D, GridError, Kernel, PhaseField, Signal,
                      Symbol4, interior_slices, make_grid, make_phase_grid)
from .wigner import cross_wigner, time_marginal, wigner

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_INPUT = 0, 1, 2, 3


class UsageError(Exception):
    pass


class InputFormatError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# ---------------------------------------------------------------- csv io

def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def _write_rows(path: Path, header, cols):
    path.parent.mkdir(parents=True, exist_ok=True)
    cols = [np.asarray(c).ravel() for c in cols]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(",".join(header) + "\n")
        for row in zip(*cols):
            fh.write(",".join(r if isinstance(r, str) else _fmt(r) for r in row) + "\n")


def _read_rows(path, header):
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise InputFormatError(f"cannot read {path}: {exc}") from None
    if not rows:
        raise InputFormatError(f"{path}: empty file")
    if [h.strip() for h in rows[0]] != list(header):
        raise InputFormatError(f"{path}: expected header {','.join(header)}")
    body = [r for r in rows[1:] if r]
    if not body:
        raise InputFormatError(f"{path}: no data rows")
    try:
        data = np.array([[float(v) for v in r] for r in body])
    except ValueError:
        raise InputFormatError(f"{path}: non-numeric entry") from None
    if data.shape[1] != len(header):
        raise InputFormatError(f"{path}: wrong column count")
    if not np.all(np.isfinite(data)):
        raise InputFormatError(f"{path}: non-finite entry")
    return data


def _uniform_axis(v, what, path):
    u = np.unique(v)
    if u.size < 2:
        raise InputFormatError(f"{path}: {what} axis needs at least two points")
    d = np.diff(u)
    if np.abs(d - d[0]).max() > 1e-9 * max(1.0, np.abs(u).max()):
        raise InputFormatError(f"{path}: {what} axis is not uniform")
    return u


def write_signal(path, f: Signal):
    _write_rows(Path(path), ("x", "re", "im"), (f.grid.points, f.values.real, f.values.imag))


def read_signal(path) -> Signal:
    d = _read_rows(path, ("x", "re", "im"))
    x = d[:, 0]
    u = _uniform_axis(x, "x", path)
    if u.size != x.size:
        raise InputFormatError(f"{path}: repeated x values")
    try:
        g = make_grid(x.size, x[1] - x[0], x[0])
        return Signal(g, d[:, 1] + 1j * d[:, 2])
    except GridError as exc:
        raise InputFormatError(f"{path}: {exc}") from None


def write_kernel(path, K: Kernel):
    x = K.grid.points
    XA, XB = np.meshgrid(x, x, indexing="ij")
    _write_rows(Path(path), ("xa", "xb", "re", "im"), (XA, XB, K.values.real, K.values.imag))


def read_kernel(path) -> Kernel:
    d = _read_rows(path, ("xa", "xb", "re", "im"))
    xa = _uniform_axis(d[:, 0], "xa", path)
    n = xa.size
    if d.shape[0] != n * n:
        raise InputFormatError(f"{path}: expected {n * n} rows")
    try:
        g = make_grid(n, xa[1] - xa[0], xa[0])
    except GridError as exc:
        raise InputFormatError(f"{path}: {exc}") from None
    ia = np.rint((d[:, 0] - g.x0) / g.dx).astype(int)
    ib = np.rint((d[:, 1] - g.x0) / g.dx).astype(int)
    if ia.min() < 0 or ib.min() < 0 or ia.max() >= n or ib.max() >= n:
        raise InputFormatError(f"{path}: coordinates off the grid")
    V = np.zeros((n, n), complex)
    V[ia, ib] = d[:, 2] + 1j * d[:, 3]
    return Kernel(g, V)


def write_field(path, F: PhaseField):
    X, XI = np.meshgrid(F.pgrid.x, F.pgrid.xi, indexing="ij")
    v = np.asarray(F.values)
    _write_rows(Path(path), ("x", "xi", "re", "im"), (X, XI, v.real, v.imag))


def read_field(path) -> PhaseField:
    d = _read_rows(path, ("x", "xi", "re", "im"))
    xs = _uniform_axis(d[:, 0], "x", path)
    xis = _uniform_axis(d[:, 1], "xi", path)
    n = xis.size
    if xs.size != 2 * n - 1 or d.shape[0] != xs.size * n:
        raise InputFormatError(f"{path}: not a half-grid phase field")
    try:
        pg = make_phase_grid(make_grid(n, 2 * (xs[1] - xs[0]), xs[0]))
    except GridError as exc:
        raise InputFormatError(f"{path}: {exc}") from None
    if np.abs(pg.xi - xis).max() > 1e-9 * max(1.0, np.abs(xis).max()):
        raise InputFormatError(f"{path}: frequency axis does not match the {CONVENTION} lattice")
    i = np.rint((d[:, 0] - pg.x[0]) / (0.5 * pg.dx)).astype(int)
    k = np.rint((d[:, 1] - pg.xi[0]) / pg.dxi).astype(int)
    V = np.zeros(pg.shape, complex)
    V[i, k] = d[:, 2] + 1j * d[:, 3]
    return PhaseField(pg, V)


def write_tensor4(path, T: np.ndarray):
    T = np.asarray(T)
    idx = np.indices(T.shape).reshape(4, -1)
    _write_rows(Path(path), ("a1", "a2", "a3", "a4", "re", "im"),
                (*(i.astype(float) for i in idx), T.real.ravel(), T.imag.ravel()))


def read_tensor4(path, shape) -> np.ndarray:
    d = _read_rows(path, ("a1", "a2", "a3", "a4", "re", "im"))
    idx = d[:, :4].astype(int)
    if d.shape[0] != int(np.prod(shape)) or np.any(idx < 0) or np.any(idx >= np.array(shape)):
        raise InputFormatError(f"{path}: tensor does not match shape {shape}")
    T = np.zeros(shape, complex)
    T[tuple(idx.T)] = d[:, 4] + 1j * d[:, 5]
    return T


def write_manifest(out: Path, grid: Grid1D, model: dict | None, argv, seed=None, samples=None,
                   extra: dict | None = None):
    pg = make_phase_grid(grid)
    man = {
        "convention": CONVENTION,
        "grid": {"n": grid.n, "dx": grid.dx, "x0": grid.x0, "nxi": pg.xi_count, "dxi": pg.dxi},
        "model": model,
        "seed": seed,
        "samples": samples,
        "command_line": list(argv),
        "tool_version": __version__,
    }
    if extra:
        man.update(extra)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "manifest.json", "w", encoding="utf-8") as fh:
        json.dump(man, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return man


# ---------------------------------------------------------------- models

def _grid_from(args) -> Grid1D:
    try:
        return make_grid(args.n, args.dx, args.x0)
    except GridError as exc:
        raise UsageError(str(exc)) from None


def _read_density(spec: str) -> gm.SpectralDensity:
    if spec == "gaussian":
        return gm.SpectralDensity.gaussian()
    d = _read_rows(spec, ("xi", "mu"))
    try:
        return gm.SpectralDensity(table=(d[:, 0], d[:, 1]), label=f"table:{Path(spec).name}")
    except GridError as exc:
        raise InputFormatError(f"{spec}: {exc}") from None


def _model_from(args) -> gm.ProcessModel:
    p = args.process
    if p == "custom":
        if not args.kernel:
            raise UsageError("--kernel is required for --process custom")
        K = read_kernel(args.kernel)
        try:
            return gm.custom(K)
        except GridError as exc:
            raise InputFormatError(f"{args.kernel}: {exc}") from None
    g = _grid_from(args)
    if p == "white-noise":
        if args.power is None:
            raise UsageError("--power is required for --process white-noise")
        if args.power <= 0:
            raise UsageError("--power must be positive")
        return gm.white_noise(g, args.power)
    if p == "brownian":
        return gm.brownian(g)
    if p in ("stationary", "freq-stationary"):
        mu = _read_density(args.density or "gaussian")
        return gm.stationary(g, mu) if p == "stationary" else gm.freq_stationary(g, mu)
    raise UsageError(f"unknown process {p!r}")


def _model_desc(model: gm.ProcessModel) -> dict:
    return model.describe()


def _add_grid(p, n=16, dx=1.0, x0=None):
    p.add_argument("--n", type=int, default=n)
    p.add_argument("--dx", type=float, default=dx)
    p.add_argument("--x0", type=float, default=x0)


def _add_process(p, required=True):
    p.add_argument("--process", required=required,
                   choices=["white-noise", "brownian", "stationary", "freq-stationary", "custom"])
    p.add_argument("--power", type=float)
    p.add_argument("--density", help="CSV with columns xi,mu, or 'gaussian'")
    p.add_argument("--kernel", help="kernel CSV for --process custom")


def _default_x0(args):
    if args.x0 is None:
        args.x0 = -0.5 * args.n * args.dx


def _threads() -> int:
    v = os.environ.get("GSP_THREADS")
    if v is None or v == "":
        return 1
    try:
        t = int(v)
    except ValueError:
        raise UsageError("GSP_THREADS must be a positive integer") from None
    if t < 1:
        raise UsageError("GSP_THREADS must be a positive integer")
    return t


def _parse_subset(spec: str | None, pg):
    if spec is None:
        return mc.default_subset(pg)
    try:
        if spec.startswith("block:"):
            return mc.default_subset(pg, int(spec.split(":", 1)[1]))
        pts = [tuple(int(v) for v in item.split(":")) for item in spec.split(";") if item]
        sub = np.array(pts, int)
        if sub.ndim != 2 or sub.shape[1] != 2:
            raise ValueError
        return mc._check_subset(sub, pg)
    except (ValueError, GridError):
        raise UsageError(f"bad --subset {spec!r}; use 'block:B' or 's:k;s:k;...'") from None


# ---------------------------------------------------------------- commands

def cmd_kernel(args, argv):
    _default_x0(args)
    model = _model_from(args)
    out = Path(args.out)
    write_kernel(out / "kernel.csv", model.kernel)
    write_manifest(out, model.grid, _model_desc(model), argv)
    return EXIT_OK


def cmd_wigner(args, argv):
    f = read_signal(args.signal)
    g = read_signal(args.signal2) if args.signal2 else f
    if g.grid != f.grid:
        raise InputFormatError("signals are on different grids")
    F = cross_wigner(g, f) if args.signal2 else wigner(f)
    out = Path(args.out)
    write_field(out / "wigner.csv", F)
    write_manifest(out, f.grid, None, argv)
    return EXIT_OK


def cmd_weyl(args, argv):
    out = Path(args.out)
    if args.action == "quantize":
        if not args.symbol:
            raise UsageError("quantize needs --symbol")
        K = weyl.symbol_to_kernel(read_field(args.symbol))
        write_kernel(out / "kernel.csv", K)
        grid = K.grid
    elif args.action == "dequantize":
        if not args.kernel:
            raise UsageError("dequantize needs --kernel")
        S = weyl.kernel_to_symbol(read_kernel(args.kernel))
        write_field(out / "symbol.csv", S)
        grid = S.pgrid.base
    else:
        if not (args.symbol and args.signal):
            raise UsageError("apply needs --symbol and --signal")
        sig = read_field(args.symbol)
        f = read_signal(args.signal)
        if sig.pgrid.base != f.grid:
            raise InputFormatError("symbol and signal grids differ")
        write_signal(out / "signal.csv", weyl.apply_weyl(sig, f))
        grid = f.grid
    write_manifest(out, grid, None, argv)
    return EXIT_OK


def _mode(args):
    if args.exact == args.mc:
        raise UsageError("choose exactly one of --exact or --mc")
    if args.mc and (args.samples is None or args.seed is None):
        raise UsageError("--mc needs --samples and --seed")
    if args.mc and args.samples < 2:
        raise UsageError("--samples must be >= 2")


def cmd_spectrum(args, argv):
    _default_x0(args)
    _mode(args)
    model = _model_from(args)
    out = Path(args.out)
    if args.exact:
        F = an.expected_wigner(model.kernel)
        write_field(out / "spectrum.csv", PhaseField(F.pgrid, F.values.real))
        write_manifest(out, model.grid, _model_desc(model), argv)
    else:
        est = mc.estimate_wigner_spectrum(model, args.samples, args.seed, workers=_threads())
        write_field(out / "spectrum.csv", est.field)
        write_field(out / "stderr.csv", PhaseField(est.field.pgrid, est.stderr))
        write_manifest(out, model.grid, _model_desc(model), argv, seed=args.seed, samples=args.samples)
    return EXIT_OK


def cmd_covariance(args, argv):
    _default_x0(args)
    _mode(args)
    model = _model_from(args)
    pg = make_phase_grid(model.grid)
    out = Path(args.out)
    if args.exact:
        if args.subset is not None:
            raise UsageError("--subset applies to --mc only")
        C = an.exact_wigner_covariance(model.kernel)
        write_tensor4(out / "covariance4.csv", C.values)
        S = weyl.kernel4_to_symbol4(C)
        write_tensor4(out / "symbol4.csv", S.values)
        axes = dict(zip(("x1", "x2", "xi1", "xi2"), (a.tolist() for a in pg.symbol4_axes)))
        write_manifest(out, model.grid, _model_desc(model), argv,
                       extra={"covariance4_shape": list(C.values.shape),
                              "symbol4_shape": list(S.values.shape), "symbol4_axes": axes})
    else:
        sub = _parse_subset(args.subset, pg)
        est = mc.estimate_wigner_covariance(model, args.samples, args.seed, subset=sub,
                                            workers=_threads())
        P = len(sub)
        I, J = np.meshgrid(np.arange(P), np.arange(P), indexing="ij")
        _write_rows(out / "covariance_subset.csv", ("i", "j", "re", "im"),
                    (I.astype(float), J.astype(float), est.matrix.real, est.matrix.imag))
        _write_rows(out / "subset.csv", ("i", "s", "k", "x", "xi"),
                    (np.arange(P, dtype=float), sub[:, 0].astype(float), sub[:, 1].astype(float),
                     pg.x[sub[:, 0]], pg.xi[sub[:, 1]]))
        write_manifest(out, model.grid, _model_desc(model), argv, seed=args.seed,
                       samples=args.samples, extra={"mean_centering": est.mean})
    return EXIT_OK


# ---------------------------------------------------------------- verify

def _check(name, value, tol, passed=None, note=""):
    ok = bool(value <= tol) if passed is None else bool(passed)
    return {"check": name, "value": float(value), "tolerance": float(tol), "passed": ok, "note": note}


def suite_identities(n: int = 16, seed: int = 0, trials: int = 100):
    rng = np.random.default_rng(seed)
    g = make_grid(n, 0.5, -0.25 * n)
    pg = make_phase_grid(g)
    cplx = lambda *s: rng.standard_normal(s) + 1j * rng.standard_normal(s)
    worst = 0.0
    for _ in range(trials):
        sig = PhaseField(pg, cplx(*pg.shape))
        f, h = Signal(g, cplx(n)), Signal(g, cplx(n))
        worst = max(worst, weyl.pairing_defect(sig, f, h) / weyl.pairing_scale(sig, f, h))
    out = [_check("pairing_defect/scale", worst, 1e-11)]
    K = Kernel(g, cplx(n, n))
    rt = np.abs(weyl.symbol_to_kernel(weyl.kernel_to_symbol(K)).values - K.values).max() / np.abs(K.values).max()
    out.append(_check("kernel->symbol->kernel", rt, 1e-12))
    m = min(n, 8)
    pg4 = make_phase_grid(make_grid(m, 0.5, -0.25 * m))
    T = CovTensor4(pg4, cplx(*pg4.cov4_shape))
    rt4 = np.abs(weyl.symbol4_to_kernel4(weyl.kernel4_to_symbol4(T)).values - T.values).max() / np.abs(T.values).max()
    out.append(_check(f"kernel4->symbol4->kernel4 (n={m})", rt4, 1e-12))
    f = Signal(g, cplx(n))
    marg = np.abs(time_marginal(wigner(f)) - np.sqrt(2 * np.pi) * np.abs(f.values) ** 2).max()
    out.append(_check("even-row marginal", marg / np.abs(f.values).max() ** 2, 1e-12))
    d = np.abs(spectral.dft(f).values - spectral.dft(f, "direct").values).max() / np.abs(f.values).max()
    out.append(_check("dft fft vs direct", d, 1e-12))
    return out


def suite_theorem(model: gm.ProcessModel):
    rep = an.theorem_check(model)
    tol = {"white-noise": 1e-2}.get(model.kind, 0.1)
    out = [_check(f"theorem rel_error_interior ({model.kind})", rep.rel_error_interior, tol,
                  note=rep.boundary_mask)]
    if model.kind == "stationary":
        out.append(_check("variation along x1", rep.variation(0), 1e-2))
        out.append(_check("variation along xi2", rep.variation(3), 1e-2))
    if model.kind == "freq-stationary":
        out.append(_check("variation along x2", rep.variation(1), 1e-2))
        out.append(_check("variation along xi1", rep.variation(2), 1e-2))
    return out


def _hermite_corpus(g):
    x = g.points
    return {
        "gaussian": np.pi ** -0.25 * np.exp(-x * x / 2),
        "hermite1": np.sqrt(2) * np.pi ** -0.25 * x * np.exp(-x * x / 2),
        "two-gaussian": np.exp(-(x - 2) ** 2 / 2) + np.exp(-(x + 2) ** 2 / 2),
    }


def suite_nonneg(n: int = 64, dx: float = 0.25):
    g = make_grid(n, dx, -0.5 * n * dx)
    corpus = _hermite_corpus(g)
    out = []
    Wg = wigner(Signal(g, corpus["gaussian"])).values.real
    out.append(_check("Hudson: min W(gaussian)/max", -Wg.min() / Wg.max(), 1e-9))
    Wh = wigner(Signal(g, corpus["hermite1"])).values.real
    out.append(_check("Hudson: W(hermite1) negative", Wh.min() / Wh.max(), -0.01,
                      passed=Wh.min() < -0.01 * Wh.max(), note="negativity witnessed"))
    for name, f in corpus.items():
        for a, b in ((0.5, 0.5), (0.25, 1.0), (1.0, 0.25), (0.5, 0.6)):
            P = an.shift_spectrum(gm.ShiftModel(Signal(g, f), a, b)).values.real
            out.append(_check(f"shift {name} a={a} b={b}: -min/max", -P.min() / P.max(), 1e-6))
    P = an.shift_spectrum(gm.ShiftModel(Signal(g, corpus["hermite1"]), 0.05, 1.0)).values.real
    out.append(_check("shift hermite1 ab=0.05 negative", P.min() / P.max(), -0.01,
                      passed=P.min() < -0.01 * P.max(), note="negativity witnessed"))
    g8 = make_grid(8, 1.0, -4.0)
    proj = an.SymbolEvaluator(lambda x, xi: 2 * np.exp(-(x * x + xi * xi)), "gaussian projector")
    M = weyl.symbol4_to_kernel4(an.build_b_symbol(proj, make_phase_grid(g8))).as_matrix()
    ev = np.linalg.eigvalsh(0.5 * (M + M.conj().T))
    out.append(_check("b-symbol of gaussian projector: -min/max eig", -ev[0] / ev[-1], 1e-8))
    return out


def cmd_verify(args, argv):
    checks = []
    if args.suite in ("identities", "all"):
        checks += suite_identities(args.n or 16, seed=args.seed or 0)
    if args.suite in ("theorem", "all"):
        if args.process is None:
            args.process = "white-noise"
        if args.process == "white-noise" and args.power is None:
            args.power = 1.0
        defaults = {"white-noise": (16, 1.0, -8.0), "brownian": (32, 0.25, -4.5),
                    "stationary": (32, 0.25, -4.0), "freq-stationary": (16, 0.5, -4.0)}
        dn, ddx, dx0 = defaults.get(args.process, (16, 1.0, -8.0))
        args.n = args.n or dn
        args.dx = args.dx or ddx
        args.x0 = dx0 if args.x0 is None else args.x0
        checks += suite_theorem(_model_from(args))
    if args.suite in ("nonneg", "all"):
        checks += suite_nonneg()
    ok = all(c["passed"] for c in checks)
    report = {"convention": CONVENTION, "suite": args.suite, "passed": ok, "checks": checks,
              "command_line": list(argv), "tool_version": __version__}
    if args.report:
        Path(args.report).parent.mkdir(parents=True, exist_ok=True)
        with open(args.report, "w", encoding="utf-8") as fh:
            json.dump(report, fh, indent=2)
            fh.write("\n")
    for c in checks:
        print(f"{'PASS' if c['passed'] else 'FAIL'}  {c['check']}: {c['value']:.3e} (tol {c['tolerance']:.1e})")
    return EXIT_OK if ok else EXIT_FAIL


def build_parser():
    p = _Parser(prog="gspwigner", description="Discrete Wigner/Weyl calculus for Gaussian processes")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    k = sub.add_parser("kernel", help="build a covariance kernel")
    _add_process(k)
    _add_grid(k)
    k.add_argument("--out", required=True)

    w = sub.add_parser("wigner", help="Wigner distribution of a signal CSV")
    w.add_argument("--signal", required=True)
    w.add_argument("--signal2")
    w.add_argument("--out", required=True)

    q = sub.add_parser("weyl", help="quantize / dequantize / apply")
    q.add_argument("action", choices=["quantize", "dequantize", "apply"])
    q.add_argument("--symbol")
    q.add_argument("--kernel")
    q.add_argument("--signal")
    q.add_argument("--out", required=True)

    for name in ("spectrum", "covariance"):
        s = sub.add_parser(name, help=f"exact or Monte Carlo Wigner {name}")
        _add_process(s)
        _add_grid(s)
        s.add_argument("--exact", action="store_true")
        s.add_argument("--mc", action="store_true")
        s.add_argument("--samples", type=int)
        s.add_argument("--seed", type=int)
        if name == "covariance":
            s.add_argument("--subset")
        s.add_argument("--out", required=True)

    v = sub.add_parser("verify", help="run verification suites")
    v.add_argument("--suite", required=True, choices=["identities", "theorem", "nonneg", "all"])
    _add_process(v, required=False)
    v.add_argument("--n", type=int)
    v.add_argument("--dx", type=float)
    v.add_argument("--x0", type=float)
    v.add_argument("--seed", type=int)
    v.add_argument("--report")
    return p


_COMMANDS = {"kernel": cmd_kernel, "wigner": cmd_wigner, "weyl": cmd_weyl,
             "spectrum": cmd_spectrum, "covariance": cmd_covariance, "verify": cmd_verify}


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = build_parser().parse_args(argv)
        return _COMMANDS[args.command](args, ["gspwigner"] + argv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InputFormatError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
