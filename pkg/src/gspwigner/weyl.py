"""Discrete Weyl quantization on the half-grid lattice.

The symbol of a kernel ``K`` is::

    sigma[s, k] = 2 dx * sum_{a+b=s} K[a, b] exp(-i (a-b) dx xi_k)

and ``symbol_to_kernel`` inverts it row by row.  Operators carry the
quadrature weight explicitly, ``(sigma^w f)[a] = dx * sum_b K[a,b] f[b]``,
so that the pairing identity

    dx^2 sum K[a,b] f[b] conj(g[a]) = (2 pi)^(-1/2) (dx/2) dxi sum sigma conj(W(g,f))

holds to rounding error for every ``sigma``.

The 4-axis transforms apply the same construction to the axis pair
``(s, s')`` (spacing ``dx/2``) and to the pair ``(k, k')`` (spacing ``dxi``).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .numgrid import (ContractError, CovTensor4, Kernel, ParameterError, PhaseField,
                      Signal, Symbol4, make_phase_grid)
from .spectral import halfgrid_forward, halfgrid_inverse
from .wigner import cross_wigner

__all__ = ["WeylOperator", "kernel_to_symbol", "symbol_to_kernel", "apply_weyl",
           "pairing_defect", "pairing_sides", "kernel4_to_symbol4", "symbol4_to_kernel4",
           "psd_defect", "field_from_function"]

_SQ2PI = np.sqrt(2 * np.pi)


@dataclass(frozen=True)
class WeylOperator:
    """Operator ``f -> dx * K f`` with kernel ``K``."""

    kernel: Kernel

    @classmethod
    def from_symbol(cls, sigma: PhaseField) -> "WeylOperator":
        return cls(symbol_to_kernel(sigma))

    def apply(self, f: Signal) -> Signal:
        if f.grid != self.kernel.grid:
            raise ParameterError("signal grid does not match operator grid")
        return Signal(f.grid, f.grid.dx * (self.kernel.values @ f.values))

    def quadratic_form(self, f: Signal) -> complex:
        dx = f.grid.dx
        return complex(dx * dx * np.vdot(f.values, self.kernel.values @ f.values))

    @property
    def symbol(self) -> PhaseField:
        return kernel_to_symbol(self.kernel)


def field_from_function(pgrid, func) -> PhaseField:
    """Sample ``func(x, xi)`` on the phase lattice."""
    X, XI = np.meshgrid(pgrid.x, pgrid.xi, indexing="ij")
    return PhaseField(pgrid, np.broadcast_to(func(X, XI), pgrid.shape))


def kernel_to_symbol(K: Kernel) -> PhaseField:
    """Weyl symbol of the kernel ``K`` on its phase lattice."""
    if not isinstance(K, Kernel):
        raise ParameterError("expected a Kernel")
    pg = make_phase_grid(K.grid)
    return PhaseField(pg, halfgrid_forward(K.values, K.grid.dx))


def symbol_to_kernel(sigma: PhaseField) -> Kernel:
    """Kernel of the Weyl operator with symbol ``sigma``.

    Exact inverse of ``kernel_to_symbol``.  For a field outside its range
    (each row is ``n`` samples of a trigonometric polynomial with at most
    ``n`` terms of one parity) this is the least-squares projection.
    """
    pg = sigma.pgrid
    return Kernel(pg.base, halfgrid_inverse(sigma.values, pg.dx))


def apply_weyl(sigma: PhaseField, f: Signal) -> Signal:
    """``(sigma^w f)[a] = dx * sum_b symbol_to_kernel(sigma)[a, b] f[b]``."""
    if sigma.pgrid.base != f.grid:
        raise ParameterError("symbol and signal grids differ")
    return WeylOperator.from_symbol(sigma).apply(f)


def pairing_sides(sigma: PhaseField, f: Signal, g: Signal) -> tuple[complex, complex]:
    """Both sides of the Weyl/Wigner pairing identity.

    Returns ``(<sigma^w f, g>, (2 pi)^(-1/2) <sigma, W(g, f)>)`` with the
    quadratures ``dx`` and ``(dx/2) dxi``.
    """
    pg = sigma.pgrid
    if pg.base != f.grid or f.grid != g.grid:
        raise ParameterError("symbol and signal grids differ")
    dx = pg.dx
    lhs = dx * np.vdot(g.values, apply_weyl(sigma, f).values)
    W = cross_wigner(g, f).values
    rhs = (0.5 * dx * pg.dxi / _SQ2PI) * np.sum(sigma.values * W.conj())
    return complex(lhs), complex(rhs)


def pairing_scale(sigma: PhaseField, f: Signal, g: Signal) -> float:
    """Product of the quadrature L2 norms of ``sigma``, ``f`` and ``g``."""
    pg = sigma.pgrid
    dx = pg.dx
    ns = np.sqrt(0.5 * dx * pg.dxi * np.sum(np.abs(sigma.values) ** 2))
    nf = np.sqrt(dx * np.sum(np.abs(f.values) ** 2))
    ng = np.sqrt(dx * np.sum(np.abs(g.values) ** 2))
    return float(ns * nf * ng)


def pairing_defect(sigma: PhaseField, f: Signal, g: Signal) -> float:
    """``|<sigma^w f, g> - (2 pi)^(-1/2) <sigma, W(g, f)>|``."""
    lhs, rhs = pairing_sides(sigma, f, g)
    return abs(lhs - rhs)


def kernel4_to_symbol4(T: CovTensor4, order: str = "13") -> Symbol4:
    """Weyl symbol of an operator on phase fields.

    Parameters
    ----------
    T : CovTensor4
        Kernel indexed ``(s, k, s', k')``.
    order : {"13", "24"}
        Which axis pair is transformed first; both give the same result.
    """
    if not isinstance(T, CovTensor4):
        raise ParameterError("expected a CovTensor4")
    pg = T.pgrid
    h1, h2 = 0.5 * pg.dx, pg.dxi
    X = np.transpose(T.values, (0, 2, 1, 3))        # s, s', k, k'
    if order == "13":
        Y = halfgrid_forward(X, h1)                 # S1, K1, k, k'
        Y = halfgrid_forward(np.transpose(Y, (2, 3, 0, 1)), h2)  # S2, K2, S1, K1
        out = np.transpose(Y, (2, 0, 3, 1))
    elif order == "24":
        Y = halfgrid_forward(np.transpose(X, (2, 3, 0, 1)), h2)  # S2, K2, s, s'
        Y = halfgrid_forward(np.transpose(Y, (2, 3, 0, 1)), h1)  # S1, K1, S2, K2
        out = np.transpose(Y, (0, 2, 1, 3))
    else:
        raise ParameterError(f"unknown order {order!r}")
    return Symbol4(pg, out)


def symbol4_to_kernel4(S: Symbol4) -> CovTensor4:
    """Exact inverse of ``kernel4_to_symbol4``."""
    if not isinstance(S, Symbol4):
        raise ParameterError("expected a Symbol4")
    pg = S.pgrid
    h1, h2 = 0.5 * pg.dx, pg.dxi
    Y = np.transpose(S.values, (1, 3, 0, 2))        # S2, K2, S1, K1
    Y = halfgrid_inverse(Y, h2)                     # k, k', S1, K1
    Y = halfgrid_inverse(np.transpose(Y, (2, 3, 0, 1)), h1)  # s, s', k, k'
    return CovTensor4(pg, np.transpose(Y, (0, 2, 1, 3)))


def psd_defect(M, tol: float = 1e-9) -> float:
    """Smallest eigenvalue of a Hermitian kernel or flattened 4-axis operator.

    Parameters
    ----------
    M : Kernel, CovTensor4 or 2-d array
    tol : float
        Allowed relative deviation from Hermitian symmetry.

    Raises
    ------
    ContractError
        If ``M`` is not Hermitian within ``tol``.
    """
    if isinstance(M, Kernel):
        A = M.values
    elif isinstance(M, CovTensor4):
        A = M.as_matrix()
    else:
        A = np.asarray(M)
        if A.ndim == 4:
            A = A.reshape(A.shape[0] * A.shape[1], -1)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ParameterError("psd_defect needs a square matrix")
    scale = np.abs(A).max() if A.size else 0.0
    if scale == 0:
        return 0.0
    if np.abs(A - A.conj().T).max() > tol * scale:
        raise ContractError("operator is not Hermitian")
    return float(np.linalg.eigvalsh(0.5 * (A + A.conj().T))[0])
