"""Fractional Brownian sheet on a uniform grid.

The covariance of the sheet factorizes, ``E B(t,s) B(u,v) = R_a(t,u) R_b(s,v)``,
so the covariance of the rectangular increments over grid cells is the
Kronecker product of two one-dimensional increment covariances. Sampling is
then exact: ``dB = L_t G L_s^T`` with ``G`` a matrix of iid standard normals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DomainError,
    FactorizationFailure,
    GridMismatch,
    InsufficientSamples,
    NonFiniteInput,
)
from .rng import substream

THEOREM_UPPER = 5.0 / 8.0


@dataclass(frozen=True)
class HurstPair:
    """Hurst exponents of the sheet in the two directions.

    Simulation needs ``1/2 < alpha, beta < 1``. The asymptotic results for
    the estimator need the narrower range ``(1/2, 5/8)``, reported by
    :attr:`theorem_regime`.
    """

    alpha: float
    beta: float

    def __post_init__(self):
        for name in ("alpha", "beta"):
            v = getattr(self, name)
            if not math.isfinite(v):
                raise NonFiniteInput(f"{name} must be finite")
            if not 0.5 < v < 1.0:
                raise DomainError(f"{name}={v} outside the simulation range (1/2, 1)")

    @property
    def theorem_regime(self) -> bool:
        return 0.5 < self.alpha < THEOREM_UPPER and 0.5 < self.beta < THEOREM_UPPER

    @property
    def c_alpha(self) -> float:
        return self.alpha * (2 * self.alpha - 1)

    @property
    def c_beta(self) -> float:
        return self.beta * (2 * self.beta - 1)


@dataclass(frozen=True)
class GridSpec:
    """Uniform grid on ``[0, T] x [0, S]`` with ``cells_t x cells_s`` cells.

    Nodes are ``(i*h_t, j*h_s)``; a cell is indexed by its lower-left node.
    """

    horizon_t: float
    horizon_s: float
    cells_t: int
    cells_s: int

    def __post_init__(self):
        for name in ("horizon_t", "horizon_s"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise DomainError(f"{name} must be a positive finite number")
        for name in ("cells_t", "cells_s"):
            v = getattr(self, name)
            if int(v) != v or v < 1:
                raise DomainError(f"{name} must be a positive integer")

    @classmethod
    def from_step(cls, horizon_t: float, horizon_s: float, step: float) -> "GridSpec":
        """Grid with (approximately) square cells of side ``step``."""
        nt = max(1, int(round(horizon_t / step)))
        ns = max(1, int(round(horizon_s / step)))
        return cls(float(horizon_t), float(horizon_s), nt, ns)

    @property
    def h_t(self) -> float:
        return self.horizon_t / self.cells_t

    @property
    def h_s(self) -> float:
        return self.horizon_s / self.cells_s

    @property
    def area(self) -> float:
        return self.h_t * self.h_s

    @property
    def shape(self) -> tuple[int, int]:
        return (self.cells_t, self.cells_s)

    @property
    def n_cells(self) -> int:
        return self.cells_t * self.cells_s

    def nodes_t(self) -> np.ndarray:
        return self.h_t * np.arange(self.cells_t + 1)

    def nodes_s(self) -> np.ndarray:
        return self.h_s * np.arange(self.cells_s + 1)


@dataclass(frozen=True)
class SheetIncrements:
    values: np.ndarray
    grid: GridSpec | None = None

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 2:
            raise GridMismatch("increments must be a 2-D array")
        if self.grid is not None and v.shape != self.grid.shape:
            raise GridMismatch(f"increments of shape {v.shape} do not match grid {self.grid.shape}")
        object.__setattr__(self, "values", v)

    def cumulate(self) -> "SheetPath":
        return SheetPath(cumulate(self.values), self.grid)


@dataclass(frozen=True)
class SheetPath:
    """Node values, first row and column identically zero."""

    values: np.ndarray
    grid: GridSpec | None = None

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 2 or v.shape[0] < 2 or v.shape[1] < 2:
            raise GridMismatch("node values must be a 2-D array with at least 2x2 nodes")
        if self.grid is not None and v.shape != (self.grid.cells_t + 1, self.grid.cells_s + 1):
            raise GridMismatch(f"node array {v.shape} does not match grid {self.grid.shape}")
        object.__setattr__(self, "values", v)

    def increments(self) -> SheetIncrements:
        return SheetIncrements(rect_increments(self.values), self.grid)


def cumulate(incr: np.ndarray) -> np.ndarray:
    """Node values from cell increments, with a zero first row and column."""
    n, m = incr.shape[-2:]
    out = np.zeros(incr.shape[:-2] + (n + 1, m + 1))
    out[..., 1:, 1:] = np.cumsum(np.cumsum(incr, axis=-2), axis=-1)
    return out


def rect_increments(x: np.ndarray) -> np.ndarray:
    return x[..., 1:, 1:] - x[..., :-1, 1:] - x[..., 1:, :-1] + x[..., :-1, :-1]


@dataclass
class IncrementCovariance:
    """Covariance of cell increments, ``cov_t (x) cov_s``."""

    cov_t: np.ndarray
    cov_s: np.ndarray
    _chol: tuple | None = field(default=None, repr=False, compare=False)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.cov_t.shape[0], self.cov_s.shape[0])

    def dense(self) -> np.ndarray:
        """The full ``n_t*n_s`` square matrix; only for small grids and tests."""
        return np.kron(self.cov_t, self.cov_s)

    def factors(self) -> tuple[np.ndarray, np.ndarray]:
        if self._chol is None:
            self._chol = (cholesky_jitter(self.cov_t), cholesky_jitter(self.cov_s))
        return self._chol


def cov_r(t, u, h: float):
    """``R(t,u) = (t^2h + u^2h - |t-u|^2h) / 2``."""
    t = np.asarray(t, dtype=np.float64)
    u = np.asarray(u, dtype=np.float64)
    if not (np.all(np.isfinite(t)) and np.all(np.isfinite(u))):
        raise NonFiniteInput("times must be finite")
    if np.any(t < 0) or np.any(u < 0):
        raise DomainError("times must be non-negative")
    if not 0 < h < 1:
        raise DomainError("Hurst exponent must lie in (0, 1)")
    e = 2.0 * h
    val = 0.5 * (t**e + u**e - np.abs(t - u) ** e)
    return float(val) if val.ndim == 0 else val


def increment_cov_1d(horizon: float, cells: int, h: float) -> np.ndarray:
    """Covariance of fBm increments over ``cells`` equal steps of ``[0, horizon]``.

    Uses the stationary form ``step^2h * (|d+1|^2h - 2|d|^2h + |d-1|^2h) / 2``
    rather than differencing ``R`` directly, which would lose digits to
    cancellation for long horizons.
    """
    step = horizon / cells
    d = np.abs(np.subtract.outer(np.arange(cells), np.arange(cells))).astype(np.float64)
    e = 2.0 * h
    return step**e * 0.5 * ((d + 1) ** e - 2 * d**e + np.abs(d - 1) ** e)


def increment_cov(grid: GridSpec, hurst: HurstPair) -> IncrementCovariance:
    return IncrementCovariance(
        increment_cov_1d(grid.horizon_t, grid.cells_t, hurst.alpha),
        increment_cov_1d(grid.horizon_s, grid.cells_s, hurst.beta),
    )


def cholesky_jitter(a: np.ndarray) -> np.ndarray:
    """Lower Cholesky factor; one retry with ``1e-12 * trace/n`` on the diagonal."""
    try:
        return np.linalg.cholesky(a)
    except np.linalg.LinAlgError:
        pass
    n = a.shape[0]
    jitter = 1e-12 * np.trace(a) / n
    try:
        return np.linalg.cholesky(a + jitter * np.eye(n))
    except np.linalg.LinAlgError as exc:
        raise FactorizationFailure(
            f"Cholesky failed even with diagonal jitter {jitter:.3g}"
        ) from exc


def sample_increments(cov: IncrementCovariance, seed: int, replication: int = 0, *, block: int = 0) -> np.ndarray:
    lt, ls = cov.factors()
    g = substream(seed, replication, block).standard_normal(cov.shape)
    return lt @ g @ ls.T


def sample_sheet(
    grid: GridSpec,
    hurst: HurstPair,
    seed: int,
    replication: int = 0,
    *,
    block: int = 0,
    cov: IncrementCovariance | None = None,
) -> tuple[SheetIncrements, SheetPath]:
    """Draw one sheet on ``grid``.

    Parameters
    ----------
    seed, replication, block : int
        Select the random stream (see :func:`fou_sheet.rng.substream`).
    cov : IncrementCovariance, optional
        Precomputed covariance for ``grid``; reused across calls to avoid
        refactorizing.
    """
    if cov is None:
        cov = increment_cov(grid, hurst)
    elif cov.shape != grid.shape:
        raise GridMismatch("covariance does not match the grid")
    d = sample_increments(cov, seed, replication, block=block)
    return SheetIncrements(d, grid), SheetPath(cumulate(d), grid)


def sample_sheets(grid: GridSpec, hurst: HurstPair, seed: int, replications, *, block: int = 0) -> np.ndarray:
    """Node values for several replications, shape ``(R, n_t+1, n_s+1)``."""
    cov = increment_cov(grid, hurst)
    reps = range(replications) if isinstance(replications, int) else replications
    d = np.stack([sample_increments(cov, seed, r, block=block) for r in reps])
    return cumulate(d)


def empirical_cov(samples, pairs) -> list[tuple[float, float]]:
    """Sample covariance of node values with a Monte Carlo standard error.

    Parameters
    ----------
    samples : sequence of SheetPath or array of shape (R, n+1, m+1)
    pairs : list of ((i, j), (k, l)) node index pairs

    Returns
    -------
    list of (estimate, standard_error)
        The estimate is the unbiased sample covariance; the error is the
        standard deviation of the centered products divided by ``sqrt(R)``.
    """
    if isinstance(samples, np.ndarray):
        arr = np.asarray(samples, dtype=np.float64)
    else:
        arr = np.stack([s.values if isinstance(s, SheetPath) else np.asarray(s) for s in samples])
    r = arr.shape[0]
    if r < 2:
        raise InsufficientSamples("need at least 2 samples")
    out = []
    for (i, j), (k, l) in pairs:
        if not (0 <= i < arr.shape[1] and 0 <= k < arr.shape[1] and 0 <= j < arr.shape[2] and 0 <= l < arr.shape[2]):
            raise IndexError(f"node pair {((i, j), (k, l))} out of range")
        a = arr[:, i, j] - arr[:, i, j].mean()
        b = arr[:, k, l] - arr[:, k, l].mean()
        prod = a * b
        est = prod.sum() / (r - 1)
        se = prod.std(ddof=1) / math.sqrt(r)
        out.append((float(est), float(se)))
    return out
