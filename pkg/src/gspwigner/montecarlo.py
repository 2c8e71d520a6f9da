"""Monte Carlo estimators of the Wigner spectrum and of the Wigner covariance.

Paths are processed in fixed chunks of path indices.  Each chunk fills
its own ``MomentAccumulator`` and chunks are merged in index order, so
the result does not depend on how chunks are scheduled over threads.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .analysis import exact_wigner_covariance, expected_wigner, relative_l2, shift_spectrum
from .gspmodel import ProcessModel, ShiftModel, psd_factor, sample_paths, sample_shift_process
from .numgrid import ParameterError, PhaseField, PhaseGrid, interior_slices, make_phase_grid
from .wigner import wigner_batch

__all__ = ["MomentAccumulator", "SpectrumEstimate", "CovarianceEstimate",
           "default_subset", "estimate_wigner_spectrum", "estimate_wigner_covariance",
           "convergence_report", "exact_subset_covariance"]


def _neumaier(s, c, x):
    """Add ``x`` to the compensated pair ``(s, c)`` elementwise."""
    t = s + x
    big = np.abs(s) >= np.abs(x)
    c = c + np.where(big, (s - t) + x, (x - t) + s)
    return t, c


@dataclass
class MomentAccumulator:
    """Compensated first and second moments of Wigner fields.

    Values are accumulated as deviations ``d = W - ref`` from a reference
    field (the exact mean when known, else zero).  Second moments are
    kept for the whole field (diagonal) and as a full outer product over
    ``subset``.
    """

    shape: tuple
    subset: np.ndarray
    ref: np.ndarray = field(repr=False)
    count: int = 0
    seed: int | None = None
    paths: list = field(default_factory=list)

    def __post_init__(self):
        self.subset = np.asarray(self.subset, int).reshape(-1, 2)
        P = len(self.subset)
        z = lambda *s: np.zeros(s, float)
        self._s1, self._c1 = z(*self.shape), z(*self.shape)
        self._s2, self._c2 = z(*self.shape), z(*self.shape)
        self._o, self._co = np.zeros((P, P), complex), np.zeros((P, P), complex)
        self._v, self._cv = np.zeros(P, complex), np.zeros(P, complex)

    def add(self, W: np.ndarray) -> "MomentAccumulator":
        """Add a batch of fields, shape ``(m,) + shape``."""
        W = np.asarray(W)
        if W.shape[1:] != tuple(self.shape):
            raise ParameterError("field batch shape mismatch")
        d = W - self.ref
        self._s1, self._c1 = _neumaier(self._s1, self._c1, d.sum(axis=0))
        self._s2, self._c2 = _neumaier(self._s2, self._c2, (d * d).sum(axis=0))
        if len(self.subset):
            D = d[:, self.subset[:, 0], self.subset[:, 1]]
            self._v, self._cv = _neumaier(self._v, self._cv, D.sum(axis=0))
            self._o, self._co = _neumaier(self._o, self._co, D.T @ D.conj())
        self.count += W.shape[0]
        return self

    def merge(self, other: "MomentAccumulator") -> "MomentAccumulator":
        """Accumulator of the union of both sample sets."""
        if tuple(other.shape) != tuple(self.shape) or not np.array_equal(other.subset, self.subset):
            raise ParameterError("accumulators are not compatible")
        out = MomentAccumulator(self.shape, self.subset, self.ref, seed=self.seed)
        for s_name, c_name in (("_s1", "_c1"), ("_s2", "_c2"), ("_o", "_co"), ("_v", "_cv")):
            s, c = _neumaier(getattr(self, s_name), getattr(self, c_name), getattr(other, s_name))
            s, c = _neumaier(s, c, getattr(other, c_name))
            setattr(out, s_name, s)
            setattr(out, c_name, c)
        out.count = self.count + other.count
        out.paths = self.paths + other.paths
        return out

    @property
    def sum(self):
        return self._s1 + self._c1

    def mean(self) -> np.ndarray:
        return self.ref + self.sum / self.count

    def stderr(self) -> np.ndarray:
        M = self.count
        s1 = self.sum
        var = (self._s2 + self._c2 - s1 * s1 / M) / (M - 1)
        return np.sqrt(np.maximum(var, 0.0) / M)

    def covariance(self, known_mean: bool = True) -> np.ndarray:
        """Covariance over ``subset``; with ``known_mean`` the reference is the mean."""
        M = self.count
        O = self._o + self._co
        if known_mean:
            return O / M
        v = self._v + self._cv
        return (O - np.outer(v, v.conj()) / M) / (M - 1)


@dataclass
class SpectrumEstimate:
    field: PhaseField
    stderr: np.ndarray = field(repr=False)
    count: int = 0
    seed: int = 0


@dataclass
class CovarianceEstimate:
    matrix: np.ndarray = field(repr=False)
    subset: np.ndarray = field(repr=False)
    mean: str = "known"
    count: int = 0
    seed: int = 0


def default_subset(pgrid: PhaseGrid, size: int = 4) -> np.ndarray:
    """Centered ``size x size`` block of phase points ``(s, k)``."""
    s0 = pgrid.s_count // 2 - size // 2
    k0 = pgrid.xi_count // 2 - size // 2
    S, Kk = np.meshgrid(np.arange(s0, s0 + size), np.arange(k0, k0 + size), indexing="ij")
    return np.stack([S.ravel(), Kk.ravel()], axis=-1)


def _check_subset(subset, pgrid):
    sub = np.asarray(subset, int).reshape(-1, 2)
    if sub.size == 0:
        raise ParameterError("subset must not be empty")
    if np.any(sub < 0) or np.any(sub[:, 0] >= pgrid.s_count) or np.any(sub[:, 1] >= pgrid.xi_count):
        raise ParameterError("subset index out of range")
    return sub


def _grid_of(model):
    return model.template.grid if isinstance(model, ShiftModel) else model.grid


def _accumulate(model, M: int, seed: int, subset, ref, chunk: int, workers: int):
    g = _grid_of(model)
    pg = make_phase_grid(g)
    if M < 2:
        raise ParameterError("need at least two samples")
    fac = None if isinstance(model, ShiftModel) else psd_factor(model.kernel)

    def work(start):
        m = min(chunk, M - start)
        if fac is None:
            U = sample_shift_process(model, m, seed, start=start)
        else:
            U = sample_paths(model, m, seed, start=start, factor=fac)
        acc = MomentAccumulator(pg.shape, subset, ref, seed=seed, paths=[(start, m)])
        return acc.add(wigner_batch(U, g.dx))

    starts = range(0, M, chunk)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            parts = list(ex.map(work, starts))
    else:
        parts = [work(s) for s in starts]
    acc = parts[0]
    for p in parts[1:]:
        acc = acc.merge(p)
    return acc


def _exact_mean(model):
    if isinstance(model, ShiftModel):
        return None
    return expected_wigner(model.kernel).values.real


def estimate_wigner_spectrum(model, M: int, seed: int, chunk: int = 2000,
                             workers: int = 1) -> SpectrumEstimate:
    """Sample mean of ``wigner(u_i)`` over ``M`` paths with per-point standard errors."""
    pg = make_phase_grid(_grid_of(model))
    ref = np.zeros(pg.shape)
    acc = _accumulate(model, M, seed, np.zeros((0, 2), int), ref, chunk, workers)
    return SpectrumEstimate(PhaseField(pg, acc.mean()), acc.stderr(), acc.count, seed)


def estimate_wigner_covariance(model, M: int, seed: int, subset=None, chunk: int = 2000,
                               workers: int = 1, mean: str = "auto") -> CovarianceEstimate:
    """Empirical ``Cov(W0[p], W0[q])`` over a subset of phase points.

    ``mean="auto"`` centers with the exact discrete mean
    ``(2 pi)^(-1/2) kernel_to_symbol(K)`` for Gaussian models and with
    the empirical mean for shift models.
    """
    pg = make_phase_grid(_grid_of(model))
    sub = _check_subset(default_subset(pg) if subset is None else subset, pg)
    exact = _exact_mean(model) if mean in ("auto", "known") else None
    if mean == "known" and exact is None:
        raise ParameterError("no exact mean for this model")
    ref = exact if exact is not None else np.zeros(pg.shape)
    acc = _accumulate(model, M, seed, sub, ref, chunk, workers)
    C = acc.covariance(known_mean=exact is not None)
    return CovarianceEstimate(C, sub, "known" if exact is not None else "empirical", acc.count, seed)


def exact_subset_covariance(model: ProcessModel, subset) -> np.ndarray:
    """Restriction of ``exact_wigner_covariance`` to ``subset``."""
    T = exact_wigner_covariance(model.kernel).values
    sub = np.asarray(subset, int).reshape(-1, 2)
    return T[sub[:, 0][:, None], sub[:, 1][:, None], sub[:, 0][None, :], sub[:, 1][None, :]]


def convergence_report(model, M_list, seed: int, subset=None, workers: int = 1) -> dict:
    """Relative errors of the spectrum and covariance estimates versus the exact values.

    Returns a dict with one row per ``M`` and a monotone-trend flag.
    """
    g = _grid_of(model)
    pg = make_phase_grid(g)
    sub = _check_subset(default_subset(pg) if subset is None else subset, pg)
    if isinstance(model, ShiftModel):
        exact_mean = shift_spectrum(model).values.real
        exact_cov = None
    else:
        exact_mean = _exact_mean(model)
        exact_cov = exact_subset_covariance(model, sub)
    rows = []
    sl = interior_slices(pg.shape)
    for M in M_list:
        est = estimate_wigner_spectrum(model, M, seed, workers=workers)
        row = {"M": int(M), "spectrum_rel_error": relative_l2(est.field.values.real[sl], exact_mean[sl])}
        if exact_cov is not None:
            cov = estimate_wigner_covariance(model, M, seed, subset=sub, workers=workers)
            row["covariance_rel_error"] = relative_l2(cov.matrix, exact_cov)
        rows.append(row)
    keys = [k for k in rows[0] if k.endswith("rel_error")]
    monotone = all(all(a[k] >= b[k] for a, b in zip(rows, rows[1:])) for k in keys)
    return {"rows": rows, "monotone": monotone}
