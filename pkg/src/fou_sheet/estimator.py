"""Least-squares drift estimation.

From the Langevin equation, ``int X dX = -theta int X^2 + int X dB``, so the
least-squares estimator ``-int X dX / int X^2`` satisfies

    theta_hat - theta = -F / D,   F = int X dB,   D = int int X^2.

With ``dB`` fractional the stochastic integral ``F`` is a divergence
integral, a centered element of the second chaos, evaluated here as the
Wick quadratic form ``dB^T H dB - tr(H C)``. Computing it needs the model
kernel, hence the true ``theta``; :func:`lse_oracle` is that estimator.
:func:`lse_pathwise` uses the raw product sum ``sum X dX`` and differs from
it by a trace term.
"""

from __future__ import annotations

import logging
from concurrent.futures import Executor
from dataclasses import dataclass, field

import numpy as np

from .chaos import KernelMatrix, kernel_matrix
from .errors import DenominatorZero, DimensionMismatch, GridMismatch
from .fbs import (
    GridSpec,
    HurstPair,
    IncrementCovariance,
    SheetIncrements,
    cumulate,
    increment_cov,
    sample_increments,
)
from .ou_sheet import (
    _check_incr,
    _check_path,
    _theta_value,
    discrete_resolvent,
    solve_by_fixed_point,
    solve_by_kernel,
)

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class EstimateResult:
    theta_hat: float
    nominator: float
    denominator: float
    grid: GridSpec | None = None
    hurst: HurstPair | None = None
    seed: int | None = None


@dataclass(frozen=True)
class HorizonSummary:
    horizon_t: float
    horizon_s: float
    cells_t: int
    cells_s: int
    median_abs_error: float
    iqr: float
    mean_error: float
    failures: int
    errors: tuple = field(repr=False, default=())


@dataclass(frozen=True)
class ConsistencyReport:
    replications: int
    seed: int
    summaries: tuple

    @property
    def horizons(self):
        return [(s.horizon_t, s.horizon_s) for s in self.summaries]

    @property
    def failed(self) -> bool:
        return any(s.failures > 0 for s in self.summaries)


def wick_double_integral(kernel: KernelMatrix, incr, cov: IncrementCovariance):
    """``dB^T H dB - tr(H C)``; ``incr`` may be a batch ``(R, n_t, n_s)``."""
    d = incr.values if isinstance(incr, SheetIncrements) else np.asarray(incr, dtype=np.float64)
    if d.shape[-2:] != kernel.shape or cov.shape != kernel.shape:
        raise DimensionMismatch(
            f"kernel {kernel.shape}, increments {d.shape[-2:]}, covariance {cov.shape} disagree"
        )
    return kernel.quad_form(d) - kernel.trace_with(cov)


def path_denominator(x: np.ndarray, grid: GridSpec) -> float:
    """``int int X^2`` with ``X`` taken at each cell's lower-left node."""
    return float(np.sum(x[:-1, :-1] ** 2) * grid.area)


def _checked_denominator(x, grid):
    d = path_denominator(x, grid)
    if not d > 0:
        raise DenominatorZero("the path is identically zero on the grid")
    return d


def lse_oracle(
    incr,
    grid: GridSpec,
    hurst: HurstPair,
    theta_true,
    *,
    kernel: KernelMatrix | None = None,
    cov: IncrementCovariance | None = None,
    seed: int | None = None,
) -> EstimateResult:
    """``theta_hat = theta - F / D`` with ``F`` the Wick form and ``X`` from the kernel solver.

    ``kernel`` and ``cov`` may be passed to reuse them across replications.
    """
    th = _theta_value(theta_true)
    d = _check_incr(incr, grid)
    kernel = kernel_matrix(grid, th) if kernel is None else kernel
    cov = increment_cov(grid, hurst) if cov is None else cov
    x = solve_by_kernel(d, grid, th).values
    den = _checked_denominator(x, grid)
    f = wick_double_integral(kernel, d, cov)
    return EstimateResult(th - f / den, f, den, grid, hurst, seed)


def lse_pathwise(x, grid: GridSpec) -> EstimateResult:
    """``-sum X_ll dX / sum X_ll^2 h_t h_s`` over cells, ``X_ll`` the lower-left node.

    Not a consistent estimator when the noise has correlated increments: the
    product sum omits the trace correction that centers the divergence
    integral.
    """
    xv = _check_path(x, grid)
    if np.any(xv[0, :] != 0) or np.any(xv[:, 0] != 0):
        raise GridMismatch("path must vanish on the axes")
    dx = xv[1:, 1:] - xv[:-1, 1:] - xv[1:, :-1] + xv[:-1, :-1]
    den = _checked_denominator(xv, grid)
    nom = float(np.sum(xv[:-1, :-1] * dx))
    return EstimateResult(-nom / den, nom, den, grid)


def resolvent_kernel(grid: GridSpec, theta) -> KernelMatrix:
    """Kernel of the fixed-point solution at lower-left nodes (strictly causal)."""
    return KernelMatrix(grid.shape, table=discrete_resolvent(grid, theta))


def lse_oracle_discrete(incr, grid: GridSpec, hurst: HurstPair, theta_true, cov: IncrementCovariance | None = None) -> EstimateResult:
    """Oracle estimator built entirely on the fixed-point discretization.

    ``X`` solves the discrete Langevin equation and ``F`` uses the discrete
    resolvent as kernel. Then ``lse_pathwise(X)`` differs from this result
    by exactly ``-tr(H C) / D``.
    """
    th = _theta_value(theta_true)
    d = _check_incr(incr, grid)
    cov = increment_cov(grid, hurst) if cov is None else cov
    x = solve_by_fixed_point(cumulate(d), grid, th).values
    den = _checked_denominator(x, grid)
    f = wick_double_integral(resolvent_kernel(grid, th), d, cov)
    return EstimateResult(th - f / den, f, den, grid, hurst)


def _one_replication(args):
    grid, hurst, th, kernel, cov, seed, rep, block = args
    d = sample_increments(cov, seed, rep, block=block)
    try:
        return lse_oracle(d, grid, hurst, th, kernel=kernel, cov=cov, seed=seed).theta_hat - th
    except DenominatorZero:
        return None


def mc_consistency(
    horizons,
    hurst: HurstPair,
    theta,
    replications: int,
    seed: int,
    executor: Executor | None = None,
) -> ConsistencyReport:
    """Monte Carlo distribution of ``theta_hat - theta`` per horizon.

    Horizon ``b`` and replication ``r`` draw from ``substream(seed, r, b)``.
    Results are reduced in replication order, so the report does not depend
    on ``executor``.
    """
    th = _theta_value(theta)
    if replications < 1:
        raise ValueError("replications must be >= 1")
    grids = list(horizons)
    steps = {(round(g.h_t, 12), round(g.h_s, 12)) for g in grids}
    if len(steps) > 1:
        log.warning("horizons do not share one cell step: %s", sorted(steps))
    summaries = []
    for b, grid in enumerate(grids):
        cov = increment_cov(grid, hurst)
        cov.factors()
        kernel = kernel_matrix(grid, th)
        jobs = [(grid, hurst, th, kernel, cov, seed, r, b) for r in range(replications)]
        mapper = map if executor is None else executor.map
        raw = list(mapper(_one_replication, jobs))
        errs = np.array([e for e in raw if e is not None])
        fails = len(raw) - errs.size
        if fails:
            log.error("%d replications hit a zero denominator at T=%g, S=%g", fails, grid.horizon_t, grid.horizon_s)
        if errs.size:
            q1, q3 = np.percentile(errs, [25, 75])
            med, iqr, mean = float(np.median(np.abs(errs))), float(q3 - q1), float(errs.mean())
        else:
            med = iqr = mean = float("nan")
        summaries.append(
            HorizonSummary(grid.horizon_t, grid.horizon_s, grid.cells_t, grid.cells_s, med, iqr, mean, fails, tuple(errs.tolist()))
        )
    return ConsistencyReport(replications, seed, tuple(summaries))
