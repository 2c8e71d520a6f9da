"""Covariance kernels of Gaussian symmetric processes and path sampling.

Processes are circularly symmetric complex Gaussian vectors ``u`` with
``E[u u^*] = K`` and ``E[u u^T] = 0``.  Paths are drawn as ``u = L z``
with ``K = L L^*`` and ``z`` having i.i.d. entries ``(g1 + i g2)/sqrt(2)``.
Path ``i`` depends only on ``(seed, i)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import linalg

from .numgrid import Grid1D, Kernel, ModelError, ParameterError, Signal
from .spectral import dft_matrix, freq_grid

__all__ = [
    "SpectralDensity", "ProcessModel", "ShiftModel", "PsdFactor",
    "white_noise_kernel", "brownian_kernel", "stationary_kernel",
    "freq_stationary_kernel", "freq_stationary", "white_noise", "brownian", "stationary", "custom",
    "psd_factor", "path_rng", "sample_paths", "sample_shift_process",
]


@dataclass(frozen=True)
class SpectralDensity:
    """Non-negative spectral density ``mu``.

    Either a callable ``func(xi)`` or a table ``(xi, mu)`` interpolated
    linearly with zero extension.  ``autocov``, if given, is the closed form
    of ``h(t) = (2 pi)^(-1) * integral mu(xi) exp(i xi t) dxi``.
    """

    func: Callable | None = None
    table: tuple[np.ndarray, np.ndarray] | None = None
    autocov: Callable | None = None
    label: str = "custom"

    def __post_init__(self):
        if (self.func is None) == (self.table is None):
            raise ParameterError("give exactly one of func or table")
        if self.table is not None:
            xi, mu = (np.asarray(t, float) for t in self.table)
            if xi.shape != mu.shape or xi.ndim != 1 or xi.size < 2:
                raise ParameterError("density table must be two equal 1-d columns")
            if np.any(np.diff(xi) <= 0):
                raise ParameterError("density table frequencies must increase")
            if np.any(mu < 0) or not np.all(np.isfinite(mu)):
                raise ParameterError("spectral density must be non-negative")
            object.__setattr__(self, "table", (xi, mu))

    def __call__(self, xi):
        xi = np.asarray(xi, float)
        if self.table is not None:
            t, m = self.table
            return np.interp(xi, t, m, left=0.0, right=0.0)
        return np.broadcast_to(np.asarray(self.func(xi), float), xi.shape)

    @classmethod
    def constant(cls, p: float) -> "SpectralDensity":
        if p <= 0:
            raise ParameterError("power must be positive")
        return cls(func=lambda xi: np.full(np.shape(xi), float(p)), label=f"constant({p})")

    @classmethod
    def gaussian(cls, amplitude: float = np.sqrt(2 * np.pi), width: float = 1.0) -> "SpectralDensity":
        """``mu(xi) = amplitude * exp(-xi^2 / (2 width^2))``.

        The default gives ``h(t) = exp(-t^2/2)``.
        """
        A, w = float(amplitude), float(width)
        if A < 0 or w <= 0:
            raise ParameterError("invalid Gaussian density parameters")
        return cls(func=lambda xi: A * np.exp(-0.5 * (np.asarray(xi) / w) ** 2),
                   autocov=lambda t: A * w / np.sqrt(2 * np.pi) * np.exp(-0.5 * (w * np.asarray(t)) ** 2),
                   label=f"gaussian({A:.17g},{w:.17g})")


@dataclass(frozen=True)
class ProcessModel:
    """A zero-mean symmetric Gaussian process on a grid."""

    kind: str
    grid: Grid1D
    kernel: Kernel
    power: float | None = None
    density: SpectralDensity | None = None

    def describe(self) -> dict:
        d = {"kind": self.kind}
        if self.power is not None:
            d["power"] = self.power
        if self.density is not None:
            d["density"] = self.density.label
        return d


@dataclass(frozen=True)
class ShiftModel:
    """Random time-frequency shift ``u = M_eta T_y f`` with Gaussian ``(y, eta)``.

    ``y ~ N(0, a)`` and ``eta ~ N(0, b)`` (``a``, ``b`` are variances).
    """

    template: Signal
    a: float
    b: float

    def __post_init__(self):
        if not (self.a > 0 and self.b > 0):
            raise ParameterError("shift widths a, b must be positive")
        if not np.any(self.template.values):
            raise ParameterError("template signal must be nonzero")


@dataclass(frozen=True)
class PsdFactor:
    """``K ~= L L^*`` after clipping small negative eigenvalues."""

    L: np.ndarray = field(repr=False)
    clipped: int
    clip_mass: float
    min_eigenvalue: float


def white_noise_kernel(grid: Grid1D, p: float = 1.0) -> Kernel:
    """``(p/dx) * I``: the grid surrogate of ``p delta(x - y)``."""
    if not p > 0:
        raise ParameterError("power must be positive")
    return Kernel(grid, np.eye(grid.n) * (p / grid.dx))


def brownian_kernel(grid: Grid1D) -> Kernel:
    """``min(x, y)`` for ``x, y >= 0`` and 0 otherwise."""
    x = grid.points
    xp = np.where(x >= 0, x, 0.0)
    K = np.minimum.outer(xp, xp)
    K[x < 0, :] = 0.0
    K[:, x < 0] = 0.0
    return Kernel(grid, K)


def _autocov_quadrature(mu: SpectralDensity, t: np.ndarray, dx: float, n: int,
                        band: float | None = None, oversample: int = 8) -> np.ndarray:
    # h(t) = (2 pi)^-1 int_{-B}^{B} mu(xi) exp(i xi t) dxi, trapezoid rule
    B = np.pi / dx if band is None else float(band)
    if mu.table is not None and band is None:
        B = max(B, np.abs(mu.table[0]).max())
    m = int(np.ceil(oversample * 2 * n * B * dx / np.pi)) + 1
    xi = np.linspace(-B, B, 2 * m + 1)
    w = np.full(xi.size, xi[1] - xi[0])
    w[0] = w[-1] = 0.5 * w[0]
    vals = mu(xi)
    if np.any(vals < 0):
        raise ParameterError("spectral density must be non-negative")
    return (np.exp(1j * np.outer(t, xi)) @ (w * vals)) / (2 * np.pi)


def stationary_kernel(grid: Grid1D, mu: SpectralDensity, band: float | None = None) -> Kernel:
    """``K[a, b] = h(x_a - x_b)`` for the spectral density ``mu``.

    Uses ``mu.autocov`` when available, otherwise trapezoid quadrature of
    the inverse transform over ``[-band, band]`` (default the full grid band
    ``pi/dx``) with at least 8x oversampling of the lag range.
    """
    n, dx = grid.n, grid.dx
    lags = dx * np.arange(-(n - 1), n)
    if mu.autocov is not None:
        h = np.asarray(mu.autocov(lags), complex)
    else:
        h = _autocov_quadrature(mu, lags, dx, n, band)
    idx = np.subtract.outer(np.arange(n), np.arange(n)) + (n - 1)
    return Kernel(grid, h[idx])


def freq_stationary_kernel(grid: Grid1D, mu_hat: SpectralDensity) -> Kernel:
    """Kernel of ``u = idft(v)`` where ``v`` is stationary with density ``mu_hat``.

    ``v`` lives on the frequency grid dual to ``grid``; covariance is
    propagated exactly through the inverse DFT matrix.
    """
    fg = freq_grid(grid)
    Kv = stationary_kernel(fg, mu_hat).values
    # idft matrix: f = (dxi/sqrt(2 pi)) exp(i x xi) F
    Finv = dft_matrix(grid).conj().T * (fg.dx / grid.dx)
    return Kernel(grid, Finv @ Kv @ Finv.conj().T)


def white_noise(grid: Grid1D, p: float = 1.0) -> ProcessModel:
    return ProcessModel("white-noise", grid, white_noise_kernel(grid, p), power=float(p))


def brownian(grid: Grid1D) -> ProcessModel:
    return ProcessModel("brownian", grid, brownian_kernel(grid))


def stationary(grid: Grid1D, mu: SpectralDensity) -> ProcessModel:
    return ProcessModel("stationary", grid, stationary_kernel(grid, mu), density=mu)


def freq_stationary(grid: Grid1D, mu_hat: SpectralDensity) -> ProcessModel:
    return ProcessModel("freq-stationary", grid, freq_stationary_kernel(grid, mu_hat), density=mu_hat)


def custom(K: Kernel) -> ProcessModel:
    K.check_covariance()
    return ProcessModel("custom", K.grid, K)


def psd_factor(K: Kernel, rtol: float = 1e-10) -> PsdFactor:
    """Eigen-factor ``K = L L^*`` clipping eigenvalues above ``-rtol * lambda_max``.

    Rows of ``L`` where ``K[a, a] == 0`` are set to zero exactly (a PSD
    kernel with a zero diagonal entry has a zero row).

    Raises
    ------
    ModelError
        If ``K`` is not Hermitian or has an eigenvalue below ``-rtol * lambda_max``.
    """
    V = K.values
    scale = np.abs(V).max()
    if scale == 0:
        return PsdFactor(np.zeros_like(V), 0, 0.0, 0.0)
    if not K.is_hermitian(1e-10):
        raise ModelError(f"kernel not Hermitian (defect {K.hermitian_defect():.3g})")
    lam, Q = linalg.eigh(0.5 * (V + V.conj().T))
    lmax = max(lam[-1], 0.0)
    neg = lam < 0
    if lam[0] < -rtol * max(lmax, scale):
        raise ModelError(
            f"kernel not PSD: min eigenvalue {lam[0]:.6g}, lambda_max {lmax:.6g}, "
            f"{int(neg.sum())} negative eigenvalues (clip mass {-lam[neg].sum():.3g})")
    clip_mass = float(-lam[neg].sum())
    L = Q * np.sqrt(np.where(neg, 0.0, lam))
    L[np.real(np.diag(V)) <= 0, :] = 0.0
    return PsdFactor(L, int(neg.sum()), clip_mass, float(lam[0]))


def path_rng(seed: int, i: int) -> np.random.Generator:
    """Independent generator for path ``i`` of a run with ``seed``."""
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(int(i),)))


def _circular_normals(seed: int, start: int, count: int, n: int) -> np.ndarray:
    Z = np.empty((count, n), complex)
    for r in range(count):
        g = path_rng(seed, start + r).standard_normal(2 * n)
        Z[r] = (g[:n] + 1j * g[n:]) / np.sqrt(2)
    return Z


def sample_paths(model: ProcessModel | Kernel, count: int, seed: int, start: int = 0,
                 factor: PsdFactor | None = None) -> np.ndarray:
    """Draw paths ``start .. start+count-1``.

    Returns
    -------
    ndarray, shape (count, n)
        Row ``r`` is path ``start + r``; it depends only on ``(seed, start + r)``.
    """
    K = model.kernel if isinstance(model, ProcessModel) else model
    if count < 1:
        raise ParameterError("count must be >= 1")
    fac = factor or psd_factor(K)
    Z = _circular_normals(seed, start, count, K.grid.n)
    return Z @ fac.L.T


def sample_shift_process(model: ShiftModel, count: int, seed: int, start: int = 0) -> np.ndarray:
    """Paths ``exp(i eta x) f(x - y)`` with ``y ~ N(0, a)``, ``eta ~ N(0, b)``.

    ``f`` is evaluated off-grid by linear interpolation with zero extension.
    Variances are clamped below at ``1e-8``.
    """
    g = model.template.grid
    x = g.points
    fr, fi = model.template.values.real, model.template.values.imag
    sa = np.sqrt(max(model.a, 1e-8))
    sb = np.sqrt(max(model.b, 1e-8))
    out = np.empty((count, g.n), complex)
    for r in range(count):
        y, eta = path_rng(seed, start + r).standard_normal(2) * (sa, sb)
        xs = x - y
        f = np.interp(xs, x, fr, left=0.0, right=0.0) + 1j * np.interp(xs, x, fi, left=0.0, right=0.0)
        out[r] = np.exp(1j * eta * x) * f
    return out


def as_signals(paths: np.ndarray, grid: Grid1D) -> list[Signal]:
    return [Signal(grid, u) for u in paths]
