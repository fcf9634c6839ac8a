"""The fractional Ornstein-Uhlenbeck sheet.

``X`` solves ``X(t,s) = -theta * int_0^t int_0^s X + B(t,s)`` with zero
boundary. Two constructions are provided:

* :func:`solve_by_kernel` integrates the Bessel kernel
  ``f(t,s,u,v) = J0(2 sqrt(theta (t-u)(s-v)))`` against the noise
  increments, the kernel taken at cell midpoints;
* :func:`solve_by_fixed_point` iterates the integral equation directly.

They share no code beyond the grid, so their agreement is a check on both.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _backend
from .errors import DomainError, GridMismatch, MaxIterExceeded, NonFiniteInput
from .fbs import GridSpec, SheetIncrements, SheetPath, cumulate
from .specfun import j0


@dataclass(frozen=True)
class DriftParam:
    theta: float

    def __post_init__(self):
        if not math.isfinite(self.theta):
            raise NonFiniteInput("theta must be finite")
        if not self.theta > 0:
            raise DomainError("theta must be > 0")


def _theta_value(theta, allow_zero=False) -> float:
    if isinstance(theta, DriftParam):
        return theta.theta
    th = float(theta)
    if not math.isfinite(th):
        raise NonFiniteInput("theta must be finite")
    if th < 0 or (th == 0 and not allow_zero):
        raise DomainError("theta must be > 0")
    return th


def kernel_f(t, s, u, v, theta) -> float:
    """``1{u<=t} 1{v<=s} J0(2 sqrt(theta (t-u)(s-v)))``."""
    th = _theta_value(theta)
    if min(t, s, u, v) < 0:
        raise DomainError("coordinates must be non-negative")
    if u > t or v > s:
        return 0.0
    return j0(2.0 * math.sqrt(th * (t - u) * (s - v)))


def gap_table(lags_t: np.ndarray, lags_s: np.ndarray, theta: float) -> np.ndarray:
    """``g[p, q] = J0(2 sqrt(theta * lags_t[p] * lags_s[q]))``."""
    return j0(2.0 * np.sqrt(theta * np.multiply.outer(lags_t, lags_s)))


def node_gap_table(grid: GridSpec, theta: float) -> np.ndarray:
    """Kernel from a cell midpoint to a node ``p + 1/2`` cells above and right of it."""
    pt = (np.arange(grid.cells_t) + 0.5) * grid.h_t
    ps = (np.arange(grid.cells_s) + 0.5) * grid.h_s
    return gap_table(pt, ps, theta)


def midpoint_gap_table(grid: GridSpec, theta: float) -> np.ndarray:
    """Kernel between two cell midpoints ``(p, q)`` cells apart."""
    pt = np.arange(grid.cells_t) * grid.h_t
    ps = np.arange(grid.cells_s) * grid.h_s
    return gap_table(pt, ps, theta)


def _check_incr(incr, grid: GridSpec) -> np.ndarray:
    d = incr.values if isinstance(incr, SheetIncrements) else np.asarray(incr, dtype=np.float64)
    if d.shape != grid.shape:
        raise GridMismatch(f"increments {d.shape} do not match grid {grid.shape}")
    return d


def _check_path(x, grid: GridSpec) -> np.ndarray:
    v = x.values if isinstance(x, SheetPath) else np.asarray(x, dtype=np.float64)
    if v.shape != (grid.cells_t + 1, grid.cells_s + 1):
        raise GridMismatch(f"node array {v.shape} does not match grid {grid.shape}")
    return v


def solve_by_kernel(incr, grid: GridSpec, theta) -> SheetPath:
    """``X(t_i, s_j) = sum_{k<i, l<j} f(t_i, s_j, mid_k, mid_l) dB[k, l]``.

    ``theta = 0`` is accepted here (the kernel is then identically one and
    ``X`` is the cumulated noise).
    """
    th = _theta_value(theta, allow_zero=True)
    d = _check_incr(incr, grid)
    x = np.zeros((grid.cells_t + 1, grid.cells_s + 1))
    x[1:, 1:] = _backend.causal_conv2d(node_gap_table(grid, th), d)
    return SheetPath(x, grid)


def lower_left_sum(x: np.ndarray, area: float) -> np.ndarray:
    """``Q[i, j] = area * sum_{k<i, l<j} x[k, l]``, the lower-left rule on each cell."""
    q = np.zeros_like(x)
    q[1:, 1:] = np.cumsum(np.cumsum(x[:-1, :-1], axis=0), axis=1) * area
    return q


def solve_by_fixed_point(sheet_b, grid: GridSpec, theta, max_iter: int = 1000, tol: float = 1e-12) -> SheetPath:
    """Picard iteration ``X <- B - theta * Q(X)`` on the node values.

    ``Q`` integrates each cell by its lower-left node value, so node
    ``(i, j)`` only sees nodes strictly below and to the left. The map is
    therefore nilpotent and the iteration is exact after at most
    ``min(n_t, n_s) + 1`` steps; ``tol`` only matters for early exit.
    """
    th = _theta_value(theta)
    b = _check_path(sheet_b, grid)
    if not tol > 0:
        raise ValueError("tol must be positive")
    if np.any(b[0, :] != 0) or np.any(b[:, 0] != 0):
        raise DomainError("driving sheet must vanish on the axes")
    x = b.copy()
    for _ in range(max_iter):
        nxt = b - th * lower_left_sum(x, grid.area)
        diff = np.max(np.abs(nxt - x))
        x = nxt
        if diff < tol:
            return SheetPath(x, grid)
    raise MaxIterExceeded(f"no convergence to tol={tol:g} in {max_iter} iterations")


def langevin_residual(x, sheet_b, grid: GridSpec, theta) -> float:
    """``max |X + theta * Q(X) - B|`` over the nodes, ``Q`` as in the solver."""
    th = _theta_value(theta)
    xv = _check_path(x, grid)
    bv = _check_path(sheet_b, grid)
    return float(np.max(np.abs(xv + th * lower_left_sum(xv, grid.area) - bv)))


def discrete_resolvent(grid: GridSpec, theta) -> np.ndarray:
    """Lag table ``r`` with ``X[i, j] = sum r[i-k, j-l] dB[k, l]`` for the fixed-point solution.

    The discrete equation is translation invariant, so the response to a
    unit increment in cell ``(0, 0)`` gives every lag at once. ``r[0, :]``
    and ``r[:, 0]`` vanish.
    """
    impulse = np.zeros(grid.shape)
    impulse[0, 0] = 1.0
    x = solve_by_fixed_point(cumulate(impulse), grid, theta).values
    return x[:-1, :-1].copy()
