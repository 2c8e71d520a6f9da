import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import crandn
from oracles import dft_loops
from gspwigner.numgrid import ParameterError, PhaseField, Signal, make_grid, make_phase_grid
from gspwigner.spectral import FreqSignal, dft, freq_grid, idft, rotate_neg_J, row_transform
from gspwigner.wigner import wigner

INV_SQ2PI = 0.3989422804014327


def test_dft_impulse():
    g = make_grid(8, 1.0, -4.0)
    f = np.zeros(8)
    f[4] = 1.0
    F = dft(Signal(g, f))
    np.testing.assert_allclose(F.values, INV_SQ2PI, atol=1e-15)
    np.testing.assert_allclose(F.grid.points, (np.arange(8) - 4) * 2 * np.pi / 8)


def test_dft_gaussian_at_zero():
    g = make_grid(64, 0.25, -8.0)
    F = dft(Signal(g, np.exp(-g.points ** 2 / 2)))
    assert abs(F.values[32] - 1.0) < 1e-6
    np.testing.assert_allclose(F.values, np.exp(-F.grid.points ** 2 / 2), atol=1e-6)


def test_dft_zero():
    g = make_grid(8, 1.0)
    assert not np.any(dft(Signal(g, np.zeros(8))).values)
    assert not np.any(idft(dft(Signal(g, np.zeros(8)))).values)


@pytest.mark.parametrize("n,dx,x0", [(8, 1.0, -4.0), (16, 0.3, 1.1), (10, 0.5, -2.5)])
def test_dft_routes_agree_with_loops(rng, n, dx, x0):
    g = make_grid(n, dx, x0)
    f = Signal(g, crandn(rng, n))
    ref = dft_loops(f.values, dx, x0)
    np.testing.assert_allclose(dft(f, "direct").values, ref, atol=1e-12 * np.abs(ref).max())
    np.testing.assert_allclose(dft(f, "fft").values, ref, atol=1e-12 * np.abs(ref).max())


def test_idft_round_trip_and_parseval(rng):
    g = make_grid(32, 0.4, -3.0)
    f = Signal(g, crandn(rng, 32))
    F = dft(f)
    for m in ("fft", "direct"):
        np.testing.assert_allclose(idft(F, m).values, f.values, atol=1e-12 * np.abs(f.values).max())
    lhs = F.grid.dx * np.sum(np.abs(F.values) ** 2)
    rhs = g.dx * np.sum(np.abs(f.values) ** 2)
    assert abs(lhs - rhs) <= 1e-12 * rhs


def test_idft_constant_is_impulse():
    g = make_grid(8, 1.0, -4.0)
    F = FreqSignal(freq_grid(g), np.full(8, INV_SQ2PI), source=g)
    f = idft(F).values
    e = np.zeros(8)
    e[4] = 1.0
    np.testing.assert_allclose(f, e, atol=1e-12)


@given(st.floats(-3, 3), st.floats(-3, 3))
@settings(max_examples=25, deadline=None)
def test_dft_linearity(alpha, beta):
    rng = np.random.default_rng(5)
    g = make_grid(16, 0.5, -4.0)
    f, h = crandn(rng, 16), crandn(rng, 16)
    lhs = dft(Signal(g, alpha * f + beta * h)).values
    rhs = alpha * dft(Signal(g, f)).values + beta * dft(Signal(g, h)).values
    assert np.abs(lhs - rhs).max() <= 1e-12 * (1 + np.abs(rhs).max())


def test_row_transform_examples():
    pg = make_phase_grid(make_grid(8, 1.0, -4.0))
    np.testing.assert_allclose(row_transform([1.0], [0], pg), np.ones(8))
    out = row_transform([1.0], [2], pg)
    np.testing.assert_allclose(out, np.exp(-2j * pg.xi), atol=1e-15)
    np.testing.assert_allclose(row_transform([1.0], [2], pg, method="fft"), out, atol=1e-14)


@pytest.mark.parametrize("parity", [0, 1])
@pytest.mark.parametrize("method", ["direct", "fft"])
def test_row_transform_round_trip(rng, parity, method):
    n = 12
    pg = make_phase_grid(make_grid(n, 0.7, 0.0))
    j = np.arange(-(n - 2) - parity, n, 2)
    c = crandn(rng, j.size)
    fwd = row_transform(c, j, pg, method=method)
    np.testing.assert_allclose(fwd, row_transform(c, j, pg, method="direct"), atol=1e-12)
    back = row_transform(fwd, j, pg, "inverse", method=method)
    np.testing.assert_allclose(back, c, atol=1e-12 * np.abs(c).max())


def test_row_transform_mixed_parity():
    pg = make_phase_grid(make_grid(8, 1.0))
    with pytest.raises(ParameterError):
        row_transform([1, 1], [0, 1], pg)


def _self_dual_grid(n):
    dx = np.sqrt(2 * np.pi / n)
    return make_grid(n, dx, -0.5 * n * dx)


def _gaussian_wigner_closed(X, XI, x0=0.0, w0=0.0):
    # W of pi^-1/4 exp(-(x-x0)^2/2 + i w0 x) in this normalization
    return np.sqrt(2 / np.pi) * np.exp(-(X - x0) ** 2 - (XI - w0) ** 2)


def _rel(a, b):
    return np.linalg.norm(a - b) / np.linalg.norm(b)


@pytest.mark.parametrize("n", [64, 128])
def test_rotate_gaussian_is_invariant(n):
    # self-dual grid: symbol spacing dx/2 equals dxi, so -J maps lattice to lattice
    pg = make_phase_grid(_self_dual_grid(n))
    X, XI = np.meshgrid(pg.x, pg.xi, indexing="ij")
    F = PhaseField(pg, _gaussian_wigner_closed(X, XI))
    assert _rel(rotate_neg_J(F).values, F.values) <= 1e-3
    G4 = F
    for _ in range(4):
        G4 = rotate_neg_J(G4)
    assert _rel(G4.values, F.values) <= 4e-3


def test_rotate_gaussian_off_lattice():
    # dx = 0.25: xi spacing pi/16 makes bilinear interpolation the dominant error (~7e-3)
    pg = make_phase_grid(make_grid(64, 0.25, -8.0))
    X, XI = np.meshgrid(pg.x, pg.xi, indexing="ij")
    F = PhaseField(pg, _gaussian_wigner_closed(X, XI))
    assert _rel(rotate_neg_J(F).values, F.values) <= 1e-2


def test_rotate_zero():
    pg = make_phase_grid(make_grid(8, 1.0, -4.0))
    assert not np.any(rotate_neg_J(PhaseField(pg, np.zeros(pg.shape))).values)


def test_rotate_direction_matches_fourier_lemma():
    # shifted, modulated Gaussian distinguishes -J from J
    g = _self_dual_grid(64)
    x = g.points
    f = Signal(g, np.pi ** -0.25 * np.exp(-(x - 1.5) ** 2 / 2 + 1j * 0.8 * x))
    F = dft(f)
    fhat = Signal(g, F.values)      # self-dual grid: frequency points == position points
    np.testing.assert_allclose(F.grid.points, g.points, atol=1e-12)
    W_hat = wigner(fhat).values.real
    R = rotate_neg_J(wigner(f)).values.real
    err = np.linalg.norm(W_hat - R) / np.linalg.norm(W_hat)
    assert err <= 5e-2
    # the opposite rotation J does not match
    pg = make_phase_grid(g)
    X, XI = np.meshgrid(pg.x, pg.xi, indexing="ij")
    wrong = _gaussian_wigner_closed(XI, -X, 1.5, 0.8)
    assert np.linalg.norm(W_hat - wrong) / np.linalg.norm(W_hat) > 0.5
