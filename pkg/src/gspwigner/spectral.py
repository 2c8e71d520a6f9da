"""Fourier transforms on grids and the half-grid row transform.

Normalization follows the unitary continuous convention

    F(xi) = (2 pi)^(-1/2) * integral f(x) exp(-i x xi) dx

discretized with the left-point rule.  Every transform has two routes:
an explicit O(n^2) sum (the reference) and an FFT route with chirp
factors.  Tests require both to agree to 1e-12.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from .numgrid import (Grid1D, PhaseField, PhaseGrid, ParameterError, Signal,
                      axis_freq, _frozen)

__all__ = [
    "FreqSignal", "freq_grid", "dft", "idft", "dft_matrix", "row_transform",
    "halfgrid_forward", "halfgrid_inverse", "rotate_neg_J",
]

_SQ2PI = np.sqrt(2 * np.pi)


@dataclass(frozen=True)
class FreqSignal:
    """Samples of a Fourier transform on a centered frequency grid.

    ``grid`` is a ``Grid1D`` whose points are the frequencies
    ``(k - n/2) * 2 pi / (n dx)``; ``source`` is the position grid it came from.
    """

    grid: Grid1D
    values: np.ndarray = field(repr=False)
    source: Grid1D | None = None

    def __post_init__(self):
        v = _frozen(self.values)
        if v.shape != (self.grid.n,):
            raise ParameterError("frequency signal length does not match its grid")
        object.__setattr__(self, "values", v)


def freq_grid(g: Grid1D) -> Grid1D:
    """Full-band frequency grid dual to ``g`` (spacing ``2 pi/(n dx)``, centered)."""
    dxi = 2 * np.pi / (g.n * g.dx)
    return Grid1D(g.n, dxi, -0.5 * g.n * dxi)


def dft_matrix(g: Grid1D) -> np.ndarray:
    """Dense matrix of ``dft``: ``F = M @ f``."""
    xi = freq_grid(g).points
    return (g.dx / _SQ2PI) * np.exp(-1j * np.outer(xi, g.points))


def dft(f: Signal, method: str = "fft") -> FreqSignal:
    """Continuous-normalized DFT of ``f``.

    ``F[k] = dx/sqrt(2 pi) * sum_a f[a] exp(-i x_a xi_k)``.
    """
    g = f.grid
    fg = freq_grid(g)
    if method == "direct":
        F = dft_matrix(g) @ f.values
    elif method == "fft":
        a = np.arange(g.n)
        # x_a xi_k = x0 xi_k + 2 pi a k / n - pi a
        F = np.fft.fft(f.values * (-1.0) ** a)
        F = F * np.exp(-1j * g.x0 * fg.points) * (g.dx / _SQ2PI)
    else:
        raise ParameterError(f"unknown method {method!r}")
    return FreqSignal(fg, F, source=g)


def idft(F: FreqSignal, method: str = "fft", grid: Grid1D | None = None) -> Signal:
    """Inverse of ``dft``; ``grid`` defaults to ``F.source`` (or x0 = -n dx/2)."""
    fg = F.grid
    n = fg.n
    dx = 2 * np.pi / (n * fg.dx)
    g = grid or F.source or Grid1D(n, dx, -0.5 * n * dx)
    if g.n != n or not np.isclose(g.dx, dx, rtol=1e-12):
        raise ParameterError("target grid is not dual to the frequency grid")
    if method == "direct":
        f = (fg.dx / _SQ2PI) * np.exp(1j * np.outer(g.points, fg.points)) @ F.values
    elif method == "fft":
        a = np.arange(n)
        f = np.fft.ifft(F.values * np.exp(1j * g.x0 * fg.points))
        f = f * (-1.0) ** a * (_SQ2PI / g.dx)
    else:
        raise ParameterError(f"unknown method {method!r}")
    return Signal(g, f)


def row_transform(coeffs, offsets, pgrid: PhaseGrid, direction: str = "forward",
                  method: str = "direct") -> np.ndarray:
    """Transform along one anti-diagonal.

    Forward: ``out[k] = sum_j c_j exp(-i j dx xi_k)`` for offsets ``j`` of
    one parity.  Inverse: ``coeffs`` is a length-``n`` sequence and the
    return value holds ``c_j`` at the requested ``offsets``.

    Parameters
    ----------
    coeffs : array_like
        Coefficients (forward) or samples over ``k`` (inverse).
    offsets : array_like of int
        Integer offsets ``j``, all of one parity, ``|j| <= 2n-2``.
    method : {"direct", "fft"}
    """
    j = np.asarray(offsets, dtype=int)
    n, dx = pgrid.n, pgrid.dx
    if j.ndim != 1:
        raise ParameterError("offsets must be one-dimensional")
    if j.size and np.any(j % 2 != j[0] % 2):
        raise ParameterError("offsets must share one parity")
    if j.size and np.abs(j).max() > 2 * n - 2:
        raise ParameterError("offset out of range")
    c = np.asarray(coeffs, dtype=complex)
    if direction == "inverse" and j.size > n:
        raise ParameterError("at most n coefficients per parity class")
    xi = pgrid.xi
    if method == "direct":
        E = np.exp(-1j * np.outer(xi, j) * dx)
        if direction == "forward":
            return E @ c
        if direction == "inverse":
            return (E.conj().T @ c) / n
        raise ParameterError(f"unknown direction {direction!r}")
    if method != "fft":
        raise ParameterError(f"unknown method {method!r}")
    # exp(-i j dx xi_k) = exp(i pi j/2) * exp(-i pi j k/n); with j = 2m + r,
    # exp(-i pi j k/n) = exp(-i pi r k/n) * exp(-2 pi i m k/n)
    if j.size == 0:
        return np.zeros(n if direction == "forward" else 0, complex)
    r = int(j[0] % 2)
    m = (j - r) // 2
    k = np.arange(n)
    twist = np.exp(-1j * np.pi * r * k / n)
    pre = np.exp(1j * np.pi * j / 2)
    if direction == "forward":
        b = np.zeros(n, complex)
        np.add.at(b, m % n, c * pre)
        return twist * np.fft.fft(b)
    if direction == "inverse":
        b = np.fft.ifft(c * twist.conj())
        return b[m % n] * pre.conj()
    raise ParameterError(f"unknown direction {direction!r}")


def _pair_rows(N: int, s: int):
    a = np.arange(max(0, s - N + 1), min(s, N - 1) + 1)
    b = s - a
    return a, b, a - b


def halfgrid_forward(K: np.ndarray, h: float) -> np.ndarray:
    """Half-grid symbol transform of axes (0, 1) of ``K``.

    ``out[s, K, ...] = 2h * sum_{a+b=s} K[a, b, ...] exp(-i (a-b) h omega_K)``
    with ``omega = axis_freq(N, h)``.  Output shape ``(2N-1, N, ...)``.
    """
    K = np.asarray(K)
    N = K.shape[0]
    if K.shape[1] != N:
        raise ParameterError("first two axes must have equal length")
    w = axis_freq(N, h)
    out = np.zeros((2 * N - 1, N) + K.shape[2:], complex)
    for s in range(2 * N - 1):
        a, b, j = _pair_rows(N, s)
        E = np.exp(-1j * h * np.outer(w, j))
        out[s] = (2 * h) * np.tensordot(E, K[a, b], axes=(1, 0))
    return out


def halfgrid_inverse(S: np.ndarray, h: float) -> np.ndarray:
    """Inverse of ``halfgrid_forward`` on axes (0, 1); input ``(2N-1, N, ...)``."""
    S = np.asarray(S)
    N = S.shape[1]
    if S.shape[0] != 2 * N - 1:
        raise ParameterError("symbol axis must have 2N-1 points")
    w = axis_freq(N, h)
    K = np.zeros((N, N) + S.shape[2:], complex)
    for s in range(2 * N - 1):
        a, b, j = _pair_rows(N, s)
        E = np.exp(1j * h * np.outer(j, w)) / (N * 2 * h)
        K[a, b] = np.tensordot(E, S[s], axes=(1, 0))
    return K


def rotate_neg_J(F: PhaseField, target: PhaseGrid | None = None) -> PhaseField:
    """Compose a phase field with ``-J``: ``G(x, xi) = F(-xi, x)``.

    This is the map taking ``W(f)`` to ``W(f^)``.  ``F`` is sampled by
    bilinear interpolation with zero extension at the points of
    ``target`` (default: ``F.pgrid``).
    """
    pg = F.pgrid
    tg = target or pg
    itp = RegularGridInterpolator((pg.x, pg.xi), F.values, method="linear",
                                  bounds_error=False, fill_value=0.0)
    X, XI = np.meshgrid(tg.x, tg.xi, indexing="ij")
    pts = np.stack([-XI.ravel(), X.ravel()], axis=-1)
    return PhaseField(tg, itp(pts).reshape(tg.shape))
