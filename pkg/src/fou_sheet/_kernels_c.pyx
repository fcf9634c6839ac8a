# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inner loops; see ``_kernels_py`` for the reference versions.

Operation order matches the NumPy fallback exactly.
"""

import numpy as np
from libc.math cimport fabs

cdef double SPLITTER = 134217729.0
cdef int MAX_SERIES_TERMS = 400


cdef inline void _split(double a, double* hi, double* lo) noexcept nogil:
    cdef double t = SPLITTER * a
    hi[0] = t - (t - a)
    lo[0] = a - hi[0]


cdef inline void _two_prod(double a, double b, double* p, double* err) noexcept nogil:
    cdef double ah, al, bh, bl
    p[0] = a * b
    _split(a, &ah, &al)
    _split(b, &bh, &bl)
    err[0] = ((ah * bh - p[0]) + ah * bl + al * bh) + al * bl


cdef inline void _two_sum(double a, double b, double* s, double* err) noexcept nogil:
    cdef double bb
    s[0] = a + b
    bb = s[0] - a
    err[0] = (a - (s[0] - bb)) + (b - bb)


cdef inline void _quick_two_sum(double a, double b, double* s, double* err) noexcept nogil:
    s[0] = a + b
    err[0] = b - (s[0] - a)


cdef inline void _dd_mul(double ah, double al, double bh, double bl,
                         double* rh, double* rl) noexcept nogil:
    cdef double p, e
    _two_prod(ah, bh, &p, &e)
    e = e + (ah * bl + al * bh)
    _quick_two_sum(p, e, rh, rl)


cdef inline void _dd_div_d(double ah, double al, double b,
                           double* rh, double* rl) noexcept nogil:
    cdef double q1, q2, p1, p2, s, e
    q1 = ah / b
    _two_prod(q1, b, &p1, &p2)
    _two_sum(ah, -p1, &s, &e)
    e = e + al
    e = e - p2
    q2 = (s + e) / b
    _quick_two_sum(q1, q2, rh, rl)


cdef inline void _dd_add(double ah, double al, double bh, double bl,
                         double* rh, double* rl) noexcept nogil:
    cdef double s, e, t, f
    _two_sum(ah, bh, &s, &e)
    _two_sum(al, bl, &t, &f)
    e = e + t
    _quick_two_sum(s, e, &s, &e)
    e = e + f
    _quick_two_sum(s, e, rh, rl)


cdef int _j0_one(double x, double tol, double* out) noexcept nogil:
    cdef double hx = 0.5 * x
    cdef double q_hi, q_lo, s_hi = 1.0, s_lo = 0.0, t_hi = 1.0, t_lo = 0.0
    cdef int n = 0
    _two_prod(hx, hx, &q_hi, &q_lo)
    while True:
        n += 1
        if n > MAX_SERIES_TERMS:
            return -1
        _dd_mul(t_hi, t_lo, q_hi, q_lo, &t_hi, &t_lo)
        _dd_div_d(t_hi, t_lo, <double>(n * n), &t_hi, &t_lo)
        t_hi = -t_hi
        t_lo = -t_lo
        if fabs(t_hi) < tol:
            break
        _dd_add(s_hi, s_lo, t_hi, t_lo, &s_hi, &s_lo)
    out[0] = s_hi + s_lo
    return 0


def j0_series_dd(x, double tol):
    cdef double[::1] xv = np.ascontiguousarray(x, dtype=np.float64).ravel()
    out = np.empty(xv.shape[0], dtype=np.float64)
    cdef double[::1] ov = out
    cdef Py_ssize_t i
    cdef int bad = 0
    with nogil:
        for i in range(xv.shape[0]):
            if _j0_one(xv[i], tol, &ov[i]) != 0:
                bad = 1
                break
    if bad:
        raise ArithmeticError("J0 series did not reach tolerance")
    return out.reshape(np.shape(x))


def causal_conv2d(g, x):
    cdef double[:, ::1] gv = np.ascontiguousarray(g, dtype=np.float64)
    cdef double[:, ::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef Py_ssize_t n = xv.shape[0], m = xv.shape[1]
    if gv.shape[0] < n or gv.shape[1] < m:
        raise ValueError("kernel table smaller than the input grid")
    out = np.zeros((n, m), dtype=np.float64)
    cdef double[:, ::1] yv = out
    cdef Py_ssize_t i, j, p, q
    cdef double acc
    with nogil:
        for i in range(n):
            for j in range(m):
                acc = 0.0
                for p in range(i + 1):
                    for q in range(j + 1):
                        acc += gv[p, q] * xv[i - p, j - q]
                yv[i, j] = acc
    return out
