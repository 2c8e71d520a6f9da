"""Sampling lattices and array containers.

Every array in the package lives on one of the lattices defined here:

* ``Grid1D``: position samples ``x_a = x0 + a*dx`` for ``a = 0..n-1``.
* ``PhaseGrid``: the half-spaced midpoint axis ``x0 + s*dx/2`` for
  ``s = 0..2n-2`` together with the centered frequency axis
  ``xi_k = (k - n/2) * pi / (n*dx)``.

The containers (``Signal``, ``Kernel``, ``PhaseField``, ``CovTensor4``,
``Symbol4``) are thin frozen dataclasses that validate shape and
finiteness and store read-only complex arrays.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "GridError", "ParameterError", "ContractError", "ModelError",
    "Grid1D", "PhaseGrid", "Signal", "Kernel", "PhaseField",
    "CovTensor4", "Symbol4", "make_grid", "make_phase_grid", "axis_freq",
    "interior_slices", "CONVENTION",
]

CONVENTION = "halfgrid-v1"


class GridError(ValueError):
    """Base class for invalid inputs."""


class ParameterError(GridError):
    """Invalid parameter value (bad size, spacing, index, ...)."""


class ContractError(GridError):
    """Input violates a documented precondition (Hermitian, PSD, ...)."""


class ModelError(GridError):
    """A process model cannot be realized (e.g. kernel not PSD)."""


def axis_freq(N: int, h: float) -> np.ndarray:
    """Centered frequency lattice conjugate to a half-grid axis.

    For an axis of ``N`` points with spacing ``h`` the anti-diagonal
    offsets ``j`` run in steps of 2 inside each parity class, so the
    conjugate band is ``[-pi/(2h), pi/(2h))`` sampled at ``N`` points::

        omega_K = (K - N//2) * pi / (N*h)

    For even ``N`` this is the ``(k - n/2)`` rule of ``PhaseGrid``.
    """
    return (np.arange(N) - N // 2) * np.pi / (N * h)


def _frozen(a, dtype=complex) -> np.ndarray:
    arr = np.array(a, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Grid1D:
    """Uniform position lattice with an even number of points."""

    n: int
    dx: float
    x0: float = 0.0

    def __post_init__(self):
        n = self.n
        if isinstance(n, (bool, np.bool_)) or int(n) != n:
            raise ParameterError(f"n must be an integer, got {n!r}")
        if n < 2 or n % 2:
            raise ParameterError(f"n must be even and >= 2, got {n}")
        if not np.isfinite(self.dx) or self.dx <= 0:
            raise ParameterError(f"dx must be positive, got {self.dx}")
        if not np.isfinite(self.x0):
            raise ParameterError("x0 must be finite")
        object.__setattr__(self, "n", int(n))
        object.__setattr__(self, "dx", float(self.dx))
        object.__setattr__(self, "x0", float(self.x0))

    @property
    def points(self) -> np.ndarray:
        return self.x0 + self.dx * np.arange(self.n)

    @property
    def length(self) -> float:
        return self.n * self.dx

    def index_of(self, x: float) -> int:
        """Index of the grid point closest to ``x``."""
        return int(np.clip(np.rint((x - self.x0) / self.dx), 0, self.n - 1))


def make_grid(n: int, dx: float, x0: float = 0.0) -> Grid1D:
    """Build a ``Grid1D``; raises ``ParameterError`` for odd ``n`` or ``dx <= 0``."""
    return Grid1D(n, dx, x0)


@dataclass(frozen=True)
class PhaseGrid:
    """Phase-space lattice attached to a position grid.

    Attributes
    ----------
    base : Grid1D
    s_count : int
        ``2n - 1`` points on the half-spaced symbol axis.
    xi_count : int
        ``n`` frequency points.
    dxi : float
        Frequency spacing ``pi / (n*dx)``.
    """

    base: Grid1D

    @property
    def n(self) -> int:
        return self.base.n

    @property
    def dx(self) -> float:
        return self.base.dx

    @property
    def s_count(self) -> int:
        return 2 * self.base.n - 1

    @property
    def xi_count(self) -> int:
        return self.base.n

    @property
    def dxi(self) -> float:
        return np.pi / (self.base.n * self.base.dx)

    @property
    def x(self) -> np.ndarray:
        """Symbol-axis points ``x0 + s*dx/2``."""
        return self.base.x0 + 0.5 * self.base.dx * np.arange(self.s_count)

    @property
    def xi(self) -> np.ndarray:
        return axis_freq(self.base.n, self.base.dx)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.s_count, self.xi_count)

    # 4-axis lattices, see Symbol4
    @property
    def symbol4_axes(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        n, dx = self.n, self.dx
        dxi = self.dxi
        N1 = 2 * n - 1
        x1 = self.base.x0 + 0.25 * dx * np.arange(2 * N1 - 1)
        x2 = self.xi[0] + 0.5 * dxi * np.arange(2 * n - 1)
        xi1 = axis_freq(N1, 0.5 * dx)
        xi2 = axis_freq(n, dxi)
        return x1, x2, xi1, xi2

    @property
    def symbol4_shape(self) -> tuple[int, int, int, int]:
        return tuple(len(a) for a in self.symbol4_axes)

    @property
    def cov4_shape(self) -> tuple[int, int, int, int]:
        return (self.s_count, self.xi_count, self.s_count, self.xi_count)


def make_phase_grid(g: Grid1D) -> PhaseGrid:
    """Phase lattice of ``g``."""
    if not isinstance(g, Grid1D):
        raise ParameterError("expected a Grid1D")
    return PhaseGrid(g)


def _check_finite(values, what):
    if not np.all(np.isfinite(values)):
        raise ParameterError(f"{what} contains non-finite entries")


@dataclass(frozen=True)
class Signal:
    """Complex samples of a function on ``grid``."""

    grid: Grid1D
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = _frozen(self.values)
        if v.shape != (self.grid.n,):
            raise ParameterError(f"signal length {v.shape} does not match grid n={self.grid.n}")
        _check_finite(v, "signal")
        object.__setattr__(self, "values", v)

    @classmethod
    def from_function(cls, grid: Grid1D, func) -> "Signal":
        return cls(grid, func(grid.points))


@dataclass(frozen=True)
class Kernel:
    """Two-point function on ``grid``; ``values[a, b]`` approximates ``k(x_a, x_b)``.

    Operators act with the quadrature weight ``dx``: ``(K f)[a] = dx * sum_b K[a,b] f[b]``.
    """

    grid: Grid1D
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = _frozen(self.values)
        n = self.grid.n
        if v.shape != (n, n):
            raise ParameterError(f"kernel shape {v.shape} does not match ({n}, {n})")
        _check_finite(v, "kernel")
        object.__setattr__(self, "values", v)

    def hermitian_defect(self) -> float:
        v = self.values
        scale = max(np.abs(v).max(), np.finfo(float).tiny)
        return float(np.abs(v - v.conj().T).max() / scale)

    def is_hermitian(self, tol: float = 1e-12) -> bool:
        return self.hermitian_defect() <= tol

    def min_eigenvalue(self) -> float:
        h = 0.5 * (self.values + self.values.conj().T)
        return float(np.linalg.eigvalsh(h)[0])

    def is_psd(self, rtol: float = 1e-10) -> bool:
        """Hermitian and eigenvalues >= ``-rtol * max|entry|``."""
        if not self.is_hermitian(1e-10):
            return False
        scale = np.abs(self.values).max()
        if scale == 0:
            return True
        return self.min_eigenvalue() >= -rtol * scale

    def check_covariance(self, rtol: float = 1e-10) -> None:
        if not self.is_psd(rtol):
            raise ContractError(
                "kernel is not a covariance (Hermitian PSD): "
                f"hermitian defect {self.hermitian_defect():.3g}, "
                f"min eigenvalue {self.min_eigenvalue():.3g}")


@dataclass(frozen=True)
class PhaseField:
    """Field on the phase lattice, ``values[s, k]`` at ``(x0 + s*dx/2, xi_k)``."""

    pgrid: PhaseGrid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = _frozen(self.values)
        if v.shape != self.pgrid.shape:
            raise ParameterError(f"field shape {v.shape} does not match {self.pgrid.shape}")
        _check_finite(v, "phase field")
        object.__setattr__(self, "values", v)

    @property
    def real(self) -> np.ndarray:
        return self.values.real


@dataclass(frozen=True)
class CovTensor4:
    """Covariance of a phase field, indexed ``(s, k, s', k')``."""

    pgrid: PhaseGrid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = _frozen(self.values)
        if v.shape != self.pgrid.cov4_shape:
            raise ParameterError(f"tensor shape {v.shape} does not match {self.pgrid.cov4_shape}")
        _check_finite(v, "4-axis tensor")
        object.__setattr__(self, "values", v)

    def as_matrix(self) -> np.ndarray:
        """Flatten to a ``P x P`` matrix over phase points ``p = (s, k)``."""
        P = self.pgrid.s_count * self.pgrid.xi_count
        return self.values.reshape(P, P)

    def hermitian_defect(self) -> float:
        m = self.as_matrix()
        scale = max(np.abs(m).max(), np.finfo(float).tiny)
        return float(np.abs(m - m.conj().T).max() / scale)


@dataclass(frozen=True)
class Symbol4:
    """Weyl symbol of an operator on phase fields, axes ``(x1, x2, xi1, xi2)``.

    ``x1`` is the doubled symbol axis (spacing ``dx/4``), ``x2`` the doubled
    frequency axis (spacing ``dxi/2``); ``xi1`` and ``xi2`` are their
    conjugate frequency lattices.  Coordinates: ``pgrid.symbol4_axes``.
    """

    pgrid: PhaseGrid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = _frozen(self.values)
        if v.shape != self.pgrid.symbol4_shape:
            raise ParameterError(f"symbol shape {v.shape} does not match {self.pgrid.symbol4_shape}")
        _check_finite(v, "4-axis symbol")
        object.__setattr__(self, "values", v)

    def imag_defect(self) -> float:
        scale = max(np.abs(self.values).max(), np.finfo(float).tiny)
        return float(np.abs(self.values.imag).max() / scale)


def interior_slices(shape) -> tuple[slice, ...]:
    """Central half ``[len//4, 3*len//4)`` of each axis."""
    return tuple(slice(L // 4, (3 * L) // 4) for L in shape)
