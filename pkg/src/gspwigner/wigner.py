"""Discrete cross-Wigner distribution on the half-grid phase lattice.

For signals ``g, f`` on a grid with spacing ``dx``::

    W(g, f)[s, k] = (2 dx / sqrt(2 pi)) * sum_{a+b=s} g[a] conj(f[b]) exp(-i (a-b) dx xi_k)

Row ``s`` sits at the midpoint ``x0 + s dx/2``; ``j = a - b`` has the
parity of ``s``.  Signals are zero outside the grid.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .numgrid import PhaseField, PhaseGrid, ParameterError, Signal, make_phase_grid
from .spectral import halfgrid_forward

__all__ = ["WignerFrame", "cross_wigner", "wigner", "wigner_batch", "wigner_frame",
           "time_marginal"]

_SQ2PI = np.sqrt(2 * np.pi)


@dataclass(frozen=True)
class WignerFrame:
    """Quadratic form of one Wigner value: ``W(u)[s,k] = sum A[a,b] u[a] conj(u[b])``."""

    pgrid: PhaseGrid
    point: tuple[int, int]
    A: np.ndarray = field(repr=False)

    def apply(self, u) -> complex:
        u = np.asarray(u)
        return complex(u @ self.A @ u.conj())


def cross_wigner(g: Signal, f: Signal) -> PhaseField:
    """Cross-Wigner distribution ``W(g, f)`` (linear in ``g``, antilinear in ``f``)."""
    if g.grid != f.grid:
        raise ParameterError("signals live on different grids")
    pg = make_phase_grid(g.grid)
    K = np.outer(g.values, f.values.conj())
    return PhaseField(pg, halfgrid_forward(K, g.grid.dx) / _SQ2PI)


def wigner(f: Signal) -> PhaseField:
    """Wigner distribution ``W(f, f)``; real by construction (tiny imaginary parts dropped)."""
    W = cross_wigner(f, f).values
    scale = np.abs(W).max() if W.size else 0.0
    if np.abs(W.imag).max(initial=0.0) > 1e-10 * max(scale, 1e-300):
        raise AssertionError("Wigner distribution has a large imaginary part")
    return PhaseField(make_phase_grid(f.grid), W.real)


def wigner_batch(U: np.ndarray, dx: float) -> np.ndarray:
    """Real Wigner distributions of the rows of ``U`` (shape ``(M, n)``).

    Returns an array ``(M, 2n-1, n)``.
    """
    U = np.asarray(U)
    T = U.T[:, None, :] * U.T.conj()[None, :, :]
    W = halfgrid_forward(T, dx) / _SQ2PI
    return np.moveaxis(W.real, -1, 0)


def wigner_frame(pgrid: PhaseGrid, s: int, k: int) -> WignerFrame:
    """Frame matrix of the Wigner value at phase point ``(s, k)``."""
    n, dx = pgrid.n, pgrid.dx
    if not (0 <= s < pgrid.s_count and 0 <= k < pgrid.xi_count):
        raise ParameterError(f"phase point ({s}, {k}) out of range")
    A = np.zeros((n, n), complex)
    a = np.arange(max(0, s - n + 1), min(s, n - 1) + 1)
    b = s - a
    A[a, b] = (2 * dx / _SQ2PI) * np.exp(-1j * (a - b) * dx * pgrid.xi[k])
    return WignerFrame(pgrid, (s, k), A)


def time_marginal(F: PhaseField) -> np.ndarray:
    """Even-row frequency marginal ``dxi * sum_k F[2a, k]``.

    For ``F = wigner(f)`` this equals ``sqrt(2 pi) |f[a]|^2`` exactly.
    """
    return F.pgrid.dxi * F.values[::2].sum(axis=1).real
