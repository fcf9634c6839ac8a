"""NumPy implementations of the inner loops.

These are the fallback for ``_kernels_c``. Every floating-point operation is
done in the same order as in the compiled version, so the two backends agree
bit for bit (neither uses fused multiply-add).
"""

from __future__ import annotations

import numpy as np

_SPLITTER = 134217729.0  # 2**27 + 1
MAX_SERIES_TERMS = 400


def _split(a):
    t = _SPLITTER * a
    hi = t - (t - a)
    return hi, a - hi


def _two_prod(a, b):
    p = a * b
    ah, al = _split(a)
    bh, bl = _split(b)
    err = ((ah * bh - p) + ah * bl + al * bh) + al * bl
    return p, err


def _two_sum(a, b):
    s = a + b
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


def _quick_two_sum(a, b):
    s = a + b
    return s, b - (s - a)


def _dd_mul(ah, al, bh, bl):
    p, e = _two_prod(ah, bh)
    e = e + (ah * bl + al * bh)
    return _quick_two_sum(p, e)


def _dd_div_d(ah, al, b):
    q1 = ah / b
    p1, p2 = _two_prod(q1, b)
    s, e = _two_sum(ah, -p1)
    e = e + al
    e = e - p2
    q2 = (s + e) / b
    return _quick_two_sum(q1, q2)


def _dd_add(ah, al, bh, bl):
    s, e = _two_sum(ah, bh)
    t, f = _two_sum(al, bl)
    e = e + t
    s, e = _quick_two_sum(s, e)
    e = e + f
    return _quick_two_sum(s, e)


def j0_series_dd(x: np.ndarray, tol: float) -> np.ndarray:
    """Sum the J0 power series in double-double arithmetic, elementwise.

    Each element stops at the first term whose magnitude drops below `tol`;
    that term is not added.
    """
    x = np.ascontiguousarray(x, dtype=np.float64)
    hx = 0.5 * x
    q_hi, q_lo = _two_prod(hx, hx)
    s_hi = np.ones_like(x)
    s_lo = np.zeros_like(x)
    t_hi = np.ones_like(x)
    t_lo = np.zeros_like(x)
    active = np.ones(x.shape, dtype=bool)
    n = 0
    while active.any():
        n += 1
        if n > MAX_SERIES_TERMS:
            raise ArithmeticError("J0 series did not reach tolerance")
        t_hi, t_lo = _dd_mul(t_hi, t_lo, q_hi, q_lo)
        t_hi, t_lo = _dd_div_d(t_hi, t_lo, float(n * n))
        t_hi = -t_hi
        t_lo = -t_lo
        active &= ~(np.abs(t_hi) < tol)
        new_hi, new_lo = _dd_add(s_hi, s_lo, t_hi, t_lo)
        s_hi = np.where(active, new_hi, s_hi)
        s_lo = np.where(active, new_lo, s_lo)
    return s_hi + s_lo


def causal_conv2d(g: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Y[i, j] = sum over p <= i, q <= j of g[p, q] * x[i - p, j - q]."""
    x = np.asarray(x, dtype=np.float64)
    g = np.asarray(g, dtype=np.float64)
    n, m = x.shape
    if g.shape[0] < n or g.shape[1] < m:
        raise ValueError("kernel table smaller than the input grid")
    y = np.zeros((n, m))
    for p in range(n):
        for q in range(m):
            y[p:, q:] += g[p, q] * x[: n - p, : m - q]
    return y
