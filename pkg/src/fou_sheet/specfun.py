"""Bessel function of the first kind, order zero.

Three independent routes are provided so that each can check the others:

* the power series ``sum (-1)^n / (n!)^2 (x/2)^(2n)``, summed in
  double-double arithmetic (terms peak near ``n = x/2`` and reach ~1e15 at
  ``x = 40``, which plain doubles cannot cancel accurately);
* the integral ``(1/pi) int_0^pi cos(x sin r) dr`` with the periodic
  trapezoid rule, which converges spectrally for this integrand;
* the large-argument form ``sqrt(2/(pi x)) cos(x - pi/4)``, kept only for
  envelope checks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _backend
from .errors import DomainError, NonFiniteInput, SeriesRangeError

SERIES_MAX_X = 40.0


@dataclass(frozen=True)
class BesselConfig:
    series_tol: float = 1e-17
    quad_nodes: int = 64
    switch_point: float = 25.0

    def __post_init__(self):
        if not self.series_tol > 0:
            raise ValueError("series_tol must be positive")
        if int(self.quad_nodes) != self.quad_nodes or self.quad_nodes < 16:
            raise ValueError("quad_nodes must be an integer >= 16")
        if not 0 < self.switch_point <= SERIES_MAX_X:
            raise ValueError(f"switch_point must lie in (0, {SERIES_MAX_X}]")


DEFAULT = BesselConfig()


def _check_args(x, allow_zero=True):
    arr = np.asarray(x, dtype=np.float64)
    if not np.all(np.isfinite(arr)):
        raise NonFiniteInput("argument must be finite")
    if allow_zero:
        if np.any(arr < 0):
            raise DomainError("argument must be >= 0")
    elif np.any(arr <= 0):
        raise DomainError("argument must be > 0")
    return arr


def _out(arr, like):
    return np.asarray(arr).item() if np.ndim(like) == 0 else arr


def j0_series(x, cfg: BesselConfig = DEFAULT):
    """J0 by its power series, for ``0 <= x <= 40``.

    Truncates at the first term smaller than ``cfg.series_tol`` in
    magnitude. Accepts scalars or arrays.
    """
    arr = _check_args(x)
    if np.any(arr > SERIES_MAX_X):
        raise SeriesRangeError(
            f"series evaluation is only stable for x <= {SERIES_MAX_X}; "
            "use j0_integral or j0"
        )
    return _out(_backend.j0_series_dd(arr, cfg.series_tol), x)


def _trapezoid(arr: np.ndarray, nodes: int) -> np.ndarray:
    rho = np.pi * np.arange(nodes) / nodes
    vals = np.cos(np.multiply.outer(arr, np.sin(rho)))
    return vals.sum(axis=-1) / nodes


def j0_integral(x, cfg: BesselConfig = DEFAULT, nodes: int | None = None):
    """J0 from its integral representation.

    The integrand has period pi in the angle, so the trapezoid rule on
    ``nodes`` equispaced points (default ``cfg.quad_nodes``) is exact up to
    the Fourier mode ``2 * nodes``; its error is of the order of
    ``J_{2 nodes}(x)``.
    """
    arr = _check_args(x)
    n = cfg.quad_nodes if nodes is None else int(nodes)
    if n < 16:
        raise ValueError("need at least 16 quadrature nodes")
    return _out(_trapezoid(arr, n), x)


def integral_nodes_for(x: float, cfg: BesselConfig = DEFAULT) -> int:
    return max(cfg.quad_nodes, 64, 8 * math.ceil(x))


def j0(x, cfg: BesselConfig = DEFAULT):
    """J0 for any finite ``x >= 0``: series below the switch point, integral above."""
    arr = _check_args(x)
    flat = arr.ravel()
    out = np.empty_like(flat)
    low = flat < cfg.switch_point
    if low.any():
        out[low] = _backend.j0_series_dd(flat[low], cfg.series_tol)
    high = np.flatnonzero(~low)
    if high.size:
        # group by node count so each group is one vectorized trapezoid sum
        counts = np.array([integral_nodes_for(v, cfg) for v in flat[high]])
        for n in np.unique(counts):
            idx = high[counts == n]
            out[idx] = _trapezoid(flat[idx], int(n))
    return _out(out.reshape(arr.shape), x)


def j0_asymptotic(x):
    """``sqrt(2/(pi x)) cos(x - pi/4)``, the leading large-argument term."""
    arr = _check_args(x, allow_zero=False)
    val = np.sqrt(2.0 / (np.pi * arr)) * np.cos(arr - np.pi / 4)
    return _out(val, x)
