"""Exact second-chaos functionals on a grid.

The nominator of the estimator is a double Wiener integral, which on the
grid becomes the Wick quadratic form ``F = dB^T H dB - tr(H C)`` with
``C = cov_t (x) cov_s``. Its law is fixed by the spectrum of ``M = H C``::

    E F^2         = 2 tr(M^2)
    kappa_4(F)    = 48 tr(M^4)
    gap           = tr(M^4) / tr(M^2)^2

so every functional below is a trace, computed without sampling.

Conventions: a cell is indexed ``c = i * n_s + j``. ``H[c, c']`` is the
symmetrized kernel at the two cell midpoints. No cell-area factor enters
``H`` since the increments ``dB`` already carry the cell measure, so
``H[c, c] = J0(0) = 1``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _backend
from .errors import DimensionMismatch, RegimeError, ZeroVariance
from .fbs import GridSpec, HurstPair, IncrementCovariance, increment_cov
from .ou_sheet import _theta_value, midpoint_gap_table

DENSE_CELL_CAP = 32 * 32


class KernelMatrix:
    """Symmetric kernel on cell pairs.

    Either structured, from a lag table ``g`` with
    ``K[(i,j),(k,l)] = g[i-k, j-l] * 1{k<=i, l<=j}`` and ``H = (K + K^T)/2``,
    or given directly as a dense symmetric matrix.
    """

    def __init__(self, shape, table=None, dense=None):
        self.shape = (int(shape[0]), int(shape[1]))
        if (table is None) == (dense is None):
            raise ValueError("give exactly one of table or dense")
        self.table = None if table is None else np.asarray(table, dtype=np.float64)
        self._dense = None
        if dense is not None:
            h = np.asarray(dense, dtype=np.float64)
            n = self.n_cells
            if h.shape != (n, n):
                raise DimensionMismatch(f"dense kernel must be {n}x{n}, got {h.shape}")
            self._dense = 0.5 * (h + h.T)
        elif self.table.shape != self.shape:
            raise DimensionMismatch("lag table must have the grid's cell shape")

    @classmethod
    def from_dense(cls, h, shape=None) -> "KernelMatrix":
        h = np.asarray(h, dtype=np.float64)
        if shape is None:
            shape = (h.shape[0], 1)
        return cls(shape, dense=h)

    @property
    def n_cells(self) -> int:
        return self.shape[0] * self.shape[1]

    def causal(self) -> np.ndarray:
        """The unsymmetrized ``K`` (structured kernels only)."""
        if self.table is None:
            raise ValueError("dense kernel has no causal part")
        nt, ns = self.shape
        di = np.subtract.outer(np.arange(nt), np.arange(nt))
        dj = np.subtract.outer(np.arange(ns), np.arange(ns))
        k4 = self.table[np.clip(di, 0, None)[:, None, :, None], np.clip(dj, 0, None)[None, :, None, :]]
        k4 = k4 * ((di >= 0)[:, None, :, None] & (dj >= 0)[None, :, None, :])
        return k4.reshape(self.n_cells, self.n_cells)

    @property
    def values(self) -> np.ndarray:
        if self._dense is None:
            k = self.causal()
            self._dense = 0.5 * (k + k.T)
        return self._dense

    def _check(self, arr_shape):
        if tuple(arr_shape) != self.shape:
            raise DimensionMismatch(f"expected cell shape {self.shape}, got {tuple(arr_shape)}")

    def quad_form(self, incr: np.ndarray) -> np.ndarray:
        """``dB^T H dB`` for one increment matrix or a batch ``(R, n_t, n_s)``."""
        d = np.asarray(incr, dtype=np.float64)
        self._check(d.shape[-2:])
        if self.table is not None:
            # dB^T H dB = dB^T K dB and K dB is a causal convolution
            if d.ndim == 2:
                return float(np.sum(d * _backend.causal_conv2d(self.table, d)))
            return np.array([np.sum(x * _backend.causal_conv2d(self.table, x)) for x in d])
        flat = d.reshape(d.shape[:-2] + (self.n_cells,))
        out = np.einsum("...i,ij,...j->...", flat, self._dense, flat)
        return float(out) if d.ndim == 2 else out

    def trace_with(self, cov: IncrementCovariance) -> float:
        """``tr(H C)``."""
        self._check(cov.shape)
        if self.table is not None:
            # tr(K C) = sum_{p,q} g[p,q] * dt[p] * ds[q], dt[p] the p-th diagonal sum of cov_t
            dt = np.array([np.trace(cov.cov_t, offset=p) for p in range(self.shape[0])])
            ds = np.array([np.trace(cov.cov_s, offset=q) for q in range(self.shape[1])])
            return float(dt @ self.table @ ds)
        return float(np.sum(self._dense * cov.dense()))


def kernel_matrix(grid: GridSpec, theta) -> KernelMatrix:
    th = _theta_value(theta)
    return KernelMatrix(grid.shape, table=midpoint_gap_table(grid, th))


def kron_right(a: np.ndarray, cov: IncrementCovariance, shape) -> np.ndarray:
    """``A @ (cov_t (x) cov_s)`` without forming the Kronecker product."""
    nt, ns = shape
    n = nt * ns
    a4 = a.reshape(a.shape[0], nt, ns)
    out = np.tensordot(a4, cov.cov_t, axes=([1], [0]))  # (r, l, m)
    out = np.tensordot(out, cov.cov_s, axes=([1], [0]))  # (r, m, n)
    return out.reshape(a.shape[0], n)


@dataclass(frozen=True)
class ChaosDiagnostics:
    sigma2: float
    kappa4: float
    normality_gap: float
    tr_m2: float
    tr_m4: float
    horizon: tuple | None = None
    scaled_sigma2: float | None = None


def _m_matrix(h: KernelMatrix, cov: IncrementCovariance) -> np.ndarray:
    if h.shape != cov.shape:
        raise DimensionMismatch(f"kernel cells {h.shape} vs covariance cells {cov.shape}")
    return kron_right(h.values, cov, h.shape)


def variance_f(h: KernelMatrix, cov: IncrementCovariance) -> float:
    """``E F^2 = 2 tr((H C)^2)``."""
    m = _m_matrix(h, cov)
    return float(2.0 * np.sum(m * m.T))


def normality_gap(h: KernelMatrix, cov: IncrementCovariance, horizon=None) -> ChaosDiagnostics:
    """Variance, fourth cumulant and normality gap of ``F``.

    Writing ``F = z^T A z - tr A`` with ``z`` standard normal and
    ``A = C^(1/2) H C^(1/2)`` (same spectrum as ``M = HC``), the Malliavin
    derivative is ``DF = 2 A z``, so ``|DF|^2 = 4 z^T A^2 z`` and
    ``Var |DF|^2 = 32 tr(M^4)``. For ``G = F / sigma`` with
    ``sigma^2 = 2 tr(M^2)`` this gives::

        E |DG|^2   = 2
        Var |DG|^2 = 8 * gap
        kappa_4(G) = 12 * gap

    The gap lies in ``(0, 1]``: 1 for rank one (a centered chi-square), ``1/n``
    for ``n`` equal eigenvalues.
    """
    m = _m_matrix(h, cov)
    tr2 = float(np.sum(m * m.T))
    if not tr2 > 0:
        raise ZeroVariance("the quadratic form has zero variance")
    m2 = m @ m
    tr4 = float(np.sum(m2 * m2.T))
    return ChaosDiagnostics(
        sigma2=2.0 * tr2,
        kappa4=48.0 * tr4,
        normality_gap=tr4 / tr2**2,
        tr_m2=tr2,
        tr_m4=tr4,
        horizon=None if horizon is None else tuple(horizon),
    )


def chaos_diagnostics(grid: GridSpec, hurst: HurstPair, theta, cov: IncrementCovariance | None = None) -> ChaosDiagnostics:
    """All trace quantities for the OU-sheet kernel on ``grid``."""
    cov = increment_cov(grid, hurst) if cov is None else cov
    d = normality_gap(kernel_matrix(grid, theta), cov, horizon=(grid.horizon_t, grid.horizon_s))
    scaled = None
    if hurst.theorem_regime and grid.horizon_t > 1 and grid.horizon_s > 1:
        scaled = scaled_variance(d, hurst, 0.0)
    return ChaosDiagnostics(**{**d.__dict__, "scaled_sigma2": scaled})


def _require_regime(hurst: HurstPair):
    if not hurst.theorem_regime:
        raise RegimeError(
            f"(alpha, beta) = ({hurst.alpha}, {hurst.beta}) outside the theorem regime (1/2, 5/8)^2"
        )


def scaled_variance(diag: ChaosDiagnostics, hurst: HurstPair, epsilon: float = 0.0) -> float:
    """``sigma^2 * T^(-4a + 1/2 - 2 eps) * S^(-4b + 1/2 - 2 eps)``.

    Bounded in ``T, S`` for ``eps = 0`` and tends to zero for ``eps > 0``.
    """
    _require_regime(hurst)
    if not epsilon >= 0:
        raise ValueError("epsilon must be >= 0")
    if diag.horizon is None:
        raise ValueError("diagnostics carry no horizon")
    t, s = diag.horizon
    if not (t > 1 and s > 1):
        raise ValueError("scaling needs T, S > 1")
    et = -4 * hurst.alpha + 0.5 - 2 * epsilon
    es = -4 * hurst.beta + 0.5 - 2 * epsilon
    return diag.sigma2 * t**et * s**es


def mean_square_field(grid: GridSpec, theta, cov: IncrementCovariance) -> np.ndarray:
    """``E X^2`` at each cell midpoint, shape ``(n_t, n_s)``.

    ``X(mid_c) = sum_{c' <= c} f(mid_c, mid_c') dB_{c'}``, so
    ``E X(mid_c)^2 = (K C K^T)[c, c]``.
    """
    km = kernel_matrix(grid, theta)
    if cov.shape != grid.shape:
        raise DimensionMismatch("covariance does not match the grid")
    k = km.causal()
    kc = kron_right(k, cov, grid.shape)
    return np.sum(kc * k, axis=1).reshape(grid.shape)


def mean_denominator(grid: GridSpec, theta, cov: IncrementCovariance) -> float:
    """Midpoint-rule value of ``E int int X^2``."""
    return float(mean_square_field(grid, theta, cov).sum() * grid.area)


def normalized_mean_denominator(grid: GridSpec, theta, cov: IncrementCovariance, hurst: HurstPair, epsilon: float) -> float:
    """``E int int X^2 / (T^(2a + 1/2 - eps) S^(2b + 1/2 - eps))``."""
    t, s = grid.horizon_t, grid.horizon_s
    scale = t ** (2 * hurst.alpha + 0.5 - epsilon) * s ** (2 * hurst.beta + 0.5 - epsilon)
    return mean_denominator(grid, theta, cov) / scale


def cost_estimate(grid: GridSpec) -> float:
    """Rough flop count of the dense trace computation."""
    return 2.0 * float(grid.n_cells) ** 3


def check_dense_cap(grid: GridSpec, force: bool = False):
    if grid.n_cells > DENSE_CELL_CAP and not force:
        raise ValueError(
            f"{grid.cells_t}x{grid.cells_s} cells exceed the exact-trace cap of "
            f"{DENSE_CELL_CAP} cells (~{cost_estimate(grid):.1e} flops)"
        )


__all__ = [
    "ChaosDiagnostics",
    "KernelMatrix",
    "chaos_diagnostics",
    "kernel_matrix",
    "mean_denominator",
    "mean_square_field",
    "normality_gap",
    "normalized_mean_denominator",
    "scaled_variance",
    "variance_f",
]
