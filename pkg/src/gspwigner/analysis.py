"""Exact second-order analysis of the Wigner distribution of a Gaussian process.

The zero-mean Wigner distribution ``W0 = W(u) - E W(u)`` of a circularly
symmetric Gaussian vector has the covariance (Wick/Isserlis)::

    Cov(W0[p], W0[q]) = sum A_p[a,b] K[a,a'] conj(A_q[a',b']) conj(K[b,b'])

with ``A_p`` the Wigner frame matrices.  Its Weyl symbol is compared with
the product formula

    sigma_W(x1, x2, xi1, xi2) = sigma_u(x1 - xi2/2, x2 + xi1/2) * sigma_u(x1 + xi2/2, x2 - xi1/2).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from .gspmodel import ProcessModel, ShiftModel, SpectralDensity
from .numgrid import (ContractError, CovTensor4, Kernel, PhaseField, PhaseGrid, Symbol4,
                      interior_slices, make_phase_grid)
from .weyl import kernel4_to_symbol4, kernel_to_symbol
from .wigner import wigner

__all__ = [
    "SymbolEvaluator", "expected_wigner", "exact_wigner_covariance", "wick_covariance",
    "product_formula_symbol", "brownian_symbol", "brownian_sigma_w",
    "stationary_sigma_w", "freq_stationary_sigma_w", "shift_spectrum",
    "build_b_symbol", "evaluator_of", "TheoremReport", "theorem_check",
    "axis_variation", "relative_l2",
]

_SQ2PI = np.sqrt(2 * np.pi)


@dataclass(frozen=True)
class SymbolEvaluator:
    """Callable ``(x, xi) -> sigma(x, xi)`` with a provenance tag."""

    func: Callable = field(repr=False)
    provenance: str = "closed-form"

    def __call__(self, x, xi):
        x, xi = np.broadcast_arrays(np.asarray(x, float), np.asarray(xi, float))
        return self.func(x, xi)

    @classmethod
    def closed_form(cls, func, label: str = "closed-form") -> "SymbolEvaluator":
        return cls(func, label)

    @classmethod
    def constant(cls, p: float) -> "SymbolEvaluator":
        return cls(lambda x, xi: np.full(np.shape(x), float(p)), f"closed-form:constant({p})")

    @classmethod
    def from_field(cls, F: PhaseField) -> "SymbolEvaluator":
        """Bilinear interpolation of ``F`` with zero extension."""
        pg = F.pgrid
        vals = F.values
        if np.abs(vals.imag).max(initial=0.0) <= 1e-10 * max(np.abs(vals).max(initial=0.0), 1e-300):
            vals = vals.real
        itp = RegularGridInterpolator((pg.x, pg.xi), vals, method="linear",
                                      bounds_error=False, fill_value=0.0)

        def f(x, xi):
            pts = np.stack([np.ravel(x), np.ravel(xi)], axis=-1)
            return itp(pts).reshape(np.shape(x))
        return cls(f, "interpolated-from(PhaseField)")


def _check_cov(K: Kernel):
    if not isinstance(K, Kernel):
        raise ContractError("expected a Kernel")
    K.check_covariance()


def expected_wigner(K: Kernel) -> PhaseField:
    """Wigner spectrum ``E W(u) = (2 pi)^(-1/2) * kernel_to_symbol(K)``."""
    _check_cov(K)
    sig = kernel_to_symbol(K)
    return PhaseField(sig.pgrid, sig.values / _SQ2PI)


def wick_covariance(V: np.ndarray, dx: float, xi: np.ndarray) -> np.ndarray:
    """Array form of ``exact_wigner_covariance`` for any number of samples.

    Parameters
    ----------
    V : ndarray, shape (n, n)
        Covariance matrix ``E[u u^*]``.
    dx : float
    xi : ndarray, shape (m,)
        Frequencies of the frames.

    Returns
    -------
    ndarray, shape (2n-1, m, 2n-1, m)
    """
    V = np.asarray(V, complex)
    n = V.shape[0]
    xi = np.asarray(xi, float)
    S = 2 * n - 1
    c = 2 * dx / _SQ2PI
    a = np.arange(n)
    s = np.arange(S)
    b = s[:, None] - a[None, :]                    # partner index on row s
    valid = (b >= 0) & (b < n)
    bc = np.clip(b, 0, n - 1)
    # E[s, k, a] = c exp(-i (2a - s) dx xi_k) on admissible pairs
    E = c * np.exp(-1j * (2 * a[None, None, :] - s[:, None, None]) * dx * xi[None, :, None])
    E = E * valid[:, None, :]
    # T[s, a, s', a'] = K[a, a'] conj(K[s-a, s'-a'])
    T = V[a[None, :, None, None], a[None, None, None, :]] * \
        np.conj(V[bc[:, :, None, None], bc[None, None, :, :]])
    T = T * (valid[:, :, None, None] & valid[None, None, :, :])
    return np.einsum("ska,sapb,plb->skpl", E, T, E.conj(), optimize=True)


def exact_wigner_covariance(K: Kernel, check: bool = True) -> CovTensor4:
    """Covariance tensor ``Cov(W0[s,k], W0[s',k'])`` of a symmetric Gaussian vector.

    Computed anti-diagonal by anti-diagonal: a frame ``A_{(s,k)}`` only
    touches pairs ``a + b = s``.
    """
    if check:
        _check_cov(K)
    pg = make_phase_grid(K.grid)
    return CovTensor4(pg, wick_covariance(K.values, pg.dx, pg.xi))


def _product_core(ev: SymbolEvaluator, pgrid: PhaseGrid) -> np.ndarray:
    x1, x2, xi1, xi2 = pgrid.symbol4_axes
    X2, XI1, XI2 = np.meshgrid(x2, xi1, xi2, indexing="ij")
    out = None
    for i, x in enumerate(x1):
        v = ev(x - 0.5 * XI2, X2 + 0.5 * XI1) * ev(x + 0.5 * XI2, X2 - 0.5 * XI1)
        if out is None:
            out = np.empty((x1.size,) + v.shape, dtype=np.result_type(v, float))
        out[i] = v
    return out


def product_formula_symbol(sigma: SymbolEvaluator, pgrid: PhaseGrid) -> Symbol4:
    """Evaluate the product formula on the ``Symbol4`` lattice of ``pgrid``."""
    return Symbol4(pgrid, _product_core(sigma, pgrid))


def build_b_symbol(a: SymbolEvaluator, pgrid: PhaseGrid) -> Symbol4:
    """``b(x1,x2,xi1,xi2) = a(x1 - xi2/2, x2 + xi1/2) a(x1 + xi2/2, x2 - xi1/2)``."""
    return Symbol4(pgrid, _product_core(a, pgrid))


def _sinc(t):
    t = np.asarray(t, float)
    small = np.abs(t) < 1e-4
    ts = np.where(small, 1.0, t)
    return np.where(small, 1 - t * t / 6 + t ** 4 / 120, np.sin(ts) / ts)


def brownian_symbol(x, xi):
    """``2 x^2 sinc(x xi)^2`` for ``x > 0``, else 0."""
    x = np.asarray(x, float)
    xi = np.asarray(xi, float)
    v = 2 * x * x * _sinc(x * xi) ** 2
    v = np.where(x > 0, v, 0.0)
    return v if v.ndim else float(v)


def brownian_sigma_w(x1, x2, xi1, xi2):
    """Product formula for Brownian motion (vanishes unless ``x1 > |xi2|/2``)."""
    return brownian_symbol(np.subtract(x1, 0.5 * np.asarray(xi2)), np.add(x2, 0.5 * np.asarray(xi1))) * \
        brownian_symbol(np.add(x1, 0.5 * np.asarray(xi2)), np.subtract(x2, 0.5 * np.asarray(xi1)))


def stationary_sigma_w(mu: SpectralDensity | Callable, x1, x2, xi1, xi2):
    """``mu(x2 + xi1/2) mu(x2 - xi1/2)``, broadcast over all four arguments."""
    x1, x2, xi1, xi2 = np.broadcast_arrays(*(np.asarray(t, float) for t in (x1, x2, xi1, xi2)))
    return np.asarray(mu(x2 + 0.5 * xi1)) * np.asarray(mu(x2 - 0.5 * xi1))


def freq_stationary_sigma_w(mu_hat: SpectralDensity | Callable, x1, x2, xi1, xi2):
    """``mu_hat(-x1 + xi2/2) mu_hat(-x1 - xi2/2)``, broadcast over all four arguments."""
    x1, x2, xi1, xi2 = np.broadcast_arrays(*(np.asarray(t, float) for t in (x1, x2, xi1, xi2)))
    return np.asarray(mu_hat(-x1 + 0.5 * xi2)) * np.asarray(mu_hat(-x1 - 0.5 * xi2))


def _gauss(t, var):
    return np.exp(-0.5 * t * t / var) / np.sqrt(2 * np.pi * var)


def shift_spectrum(model: ShiftModel) -> PhaseField:
    """Wigner spectrum of the random-shift process, ``p * W(f)``.

    Separable discrete convolution with weights ``dx/2`` and ``dxi``,
    zero extension outside the lattice.
    """
    W = wigner(model.template)
    pg = W.pgrid
    G1 = 0.5 * pg.dx * _gauss(np.subtract.outer(pg.x, pg.x), model.a)
    G2 = pg.dxi * _gauss(np.subtract.outer(pg.xi, pg.xi), model.b)
    return PhaseField(pg, G1 @ W.values.real @ G2.T)


def evaluator_of(model: ProcessModel, kind: str = "closed") -> SymbolEvaluator:
    """Symbol evaluator for a model.

    ``kind="closed"`` uses the closed form of the model family when one
    exists; ``"interpolated"`` (and custom models) interpolate
    ``kernel_to_symbol(K)``.
    """
    if kind == "closed":
        if model.kind == "white-noise":
            return SymbolEvaluator.constant(model.power)
        if model.kind == "brownian":
            return SymbolEvaluator(brownian_symbol, "closed-form:brownian")
        if model.kind == "stationary" and model.density is not None:
            mu = model.density
            return SymbolEvaluator(lambda x, xi: mu(xi), "closed-form:stationary")
        if model.kind == "freq-stationary" and model.density is not None:
            mu = model.density
            return SymbolEvaluator(lambda x, xi: mu(-x), "closed-form:freq-stationary")
    return SymbolEvaluator.from_field(kernel_to_symbol(model.kernel))


def relative_l2(a: np.ndarray, b: np.ndarray) -> float:
    """``||a - b|| / ||b||`` (``||a||`` if ``b`` vanishes)."""
    den = np.linalg.norm(b)
    if den == 0:
        den = np.linalg.norm(a)
    return float(np.linalg.norm(a - b) / den) if den else 0.0


def axis_variation(values: np.ndarray, axis: int) -> float:
    """Largest spread along ``axis`` of the interior block, relative to its max modulus."""
    I = np.real(values[interior_slices(values.shape)])
    m = np.abs(I).max()
    if m == 0:
        return 0.0
    return float((I.max(axis=axis) - I.min(axis=axis)).max() / m)


@dataclass
class TheoremReport:
    """Comparison of the propagated symbol with the product formula."""

    rel_error_interior: float
    boundary_mask: str
    exact: Symbol4 = field(repr=False)
    formula: Symbol4 = field(repr=False)
    imag_defect: float = 0.0

    def variation(self, axis: int) -> float:
        return axis_variation(self.exact.values, axis)


def theorem_check(model: ProcessModel, evaluator: str = "closed") -> TheoremReport:
    """Propagate ``K`` exactly and compare with the product formula on the interior."""
    K = model.kernel
    _check_cov(K)
    exact = kernel4_to_symbol4(exact_wigner_covariance(K, check=False))
    formula = product_formula_symbol(evaluator_of(model, evaluator), exact.pgrid)
    sl = interior_slices(exact.values.shape)
    err = relative_l2(exact.values[sl].real, np.real(formula.values[sl]))
    mask = "interior half of each axis: indices [len//4, 3*len//4) on axes (x1, x2, xi1, xi2) " \
           f"of shape {exact.values.shape}"
    return TheoremReport(err, mask, exact, formula, exact.imag_defect())
