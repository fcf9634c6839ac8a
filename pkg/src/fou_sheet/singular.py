"""Singular deterministic integrals behind the variance bound.

The eight-dimensional integral

    I(a, b) = int ((t-u)(s-v)(t0-u0)(s0-v0))^(-1/4)
                  |t-t0|^(2a-2) |u-u0|^(2a-2) |s-s0|^(2b-2) |v-v0|^(2b-2)

over ``0 < u < t < 1``, ``0 < u0 < t0 < 1`` (and the same for ``s, v``)
splits into a product ``J(a) J(b)`` of two four-dimensional blocks. Each
block has four singular factors sitting on the edges of the cycle

    t --A-- u --D-- u0 --B-- t0 --C-- t

(A, B carry exponent -1/4; C, D carry 2h-2). The Monte Carlo sampler draws
each block from an equal mixture of four path densities, each following
three of the four edges with conditionals ``~ |x - c|^e``. Every singular
factor is matched by three of the four components, which keeps the weights
bounded.

Gamma and Beta functions are implemented here: a Lanczos Gamma, and an
incomplete Beta by Gauss-Legendre quadrature on geometrically graded
panels, with the substitution ``w = z^a`` removing the endpoint
singularity. The two are independent, so ``B(x, y) = Gamma(x) Gamma(y) / Gamma(x + y)`` is a real check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DomainError, NonFiniteInput
from .rng import substream

# Lanczos approximation, g = 7, n = 9
_LANCZOS_G = 7.0
_LANCZOS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)


def gamma(x: float) -> float:
    """Gamma function for real ``x`` away from the non-positive integers."""
    x = float(x)
    if not math.isfinite(x):
        raise NonFiniteInput("argument must be finite")
    if x <= 0 and x == int(x):
        raise DomainError("Gamma has poles at the non-positive integers")
    if x < 0.5:
        return math.pi / (math.sin(math.pi * x) * gamma(1.0 - x))
    x -= 1.0
    acc = _LANCZOS[0]
    for i in range(1, 9):
        acc += _LANCZOS[i] / (x + i)
    t = x + _LANCZOS_G + 0.5
    return math.sqrt(2 * math.pi) * t ** (x + 0.5) * math.exp(-t) * acc


def lgamma(x: float) -> float:
    """``log Gamma(x)`` for ``x > 0``."""
    x = float(x)
    if not x > 0:
        raise DomainError("lgamma is implemented for x > 0 only")
    if x < 0.5:
        return math.log(math.pi / math.sin(math.pi * x)) - lgamma(1.0 - x)
    x -= 1.0
    acc = _LANCZOS[0]
    for i in range(1, 9):
        acc += _LANCZOS[i] / (x + i)
    t = x + _LANCZOS_G + 0.5
    return 0.5 * math.log(2 * math.pi) + (x + 0.5) * math.log(t) - t + math.log(acc)


def beta_fn(x: float, y: float) -> float:
    """``B(x, y) = Gamma(x) Gamma(y) / Gamma(x + y)`` for ``x, y > 0``."""
    if not (x > 0 and y > 0):
        raise DomainError("Beta needs positive arguments")
    if x + y < 100:
        return gamma(x) * gamma(y) / gamma(x + y)
    return math.exp(lgamma(x) + lgamma(y) - lgamma(x + y))


@lru_cache(maxsize=8)
def _leggauss(n: int):
    return np.polynomial.legendre.leggauss(n)


_LEVELS = 60


def _piece(lo: float, hi: float, p: float, q: float, nodes: int) -> float:
    """``int_lo^hi z^(p-1) (1-z)^(q-1) dz`` for ``0 <= lo < hi <= 1/2``.

    Panels shrink geometrically (ratio 1/5) from ``hi`` toward ``lo``, so each
    one is well separated from the singular point 0 relative to its width.
    For ``p < 1`` each panel is mapped by ``w = z^p``, which turns
    ``z^(p-1) dz`` into ``dw / p`` and leaves a smooth integrand.
    """
    if hi <= lo:
        return 0.0
    k = np.arange(_LEVELS + 1, dtype=np.float64)
    edges = hi * 0.2**k
    edges = np.concatenate((edges[edges > lo], [lo]))
    right, left = edges[:-1], edges[1:]
    x, w = _leggauss(nodes)
    if p < 1:
        wl, wr = left**p, right**p
        mid, half = 0.5 * (wr + wl), 0.5 * (wr - wl)
        z = (mid[:, None] + half[:, None] * x[None, :]) ** (1.0 / p)
        vals = (1.0 - z) ** (q - 1.0) / p
    else:
        mid, half = 0.5 * (right + left), 0.5 * (right - left)
        z = mid[:, None] + half[:, None] * x[None, :]
        vals = z ** (p - 1.0) * (1.0 - z) ** (q - 1.0)
    return float(np.sum(half[:, None] * w[None, :] * vals))


def beta_inc_quad(a: float, b: float, x: float, nodes: int = 24) -> float:
    """Unnormalized incomplete Beta ``int_0^x z^(a-1) (1-z)^(b-1) dz`` by quadrature.

    ``[1/2, 1]`` is reflected onto ``[0, 1/2]`` so that each endpoint
    singularity is treated by :func:`_piece` at the origin.
    Independent of :func:`gamma`.
    """
    if not (a > 0 and b > 0):
        raise DomainError("incomplete Beta needs positive parameters")
    if not 0 <= x <= 1:
        raise DomainError("x must lie in [0, 1]")
    if x <= 0.5:
        return _piece(0.0, x, a, b, nodes)
    # int_{1/2}^x z^(a-1) (1-z)^(b-1) dz = int_{1-x}^{1/2} y^(b-1) (1-y)^(a-1) dy
    return _piece(0.0, 0.5, a, b, nodes) + _piece(1.0 - x, 0.5, b, a, nodes)


def beta_quad(a: float, b: float, nodes: int = 24) -> float:
    return beta_inc_quad(a, b, 1.0, nodes)


def beta_reduction_check(beta: float, v: float, s0: float, quad_nodes: int = 24) -> tuple[float, float]:
    """Compare ``int_0^s0 |v - v0|^(2b-2) (s0 - v0)^(-1/4) dv0`` with its Beta bound.

    Returns
    -------
    lhs : float
        The integral, computed by quadrature after the substitutions
        ``z = (s0 - v0)/(v - v0)`` (when ``s0 < v``) or
        ``z = (v - v0)/(s0 - v0)`` and an exact Beta piece (when ``v < s0``).
    rhs : float
        ``|v - s0|^(2b - 5/4)`` times ``B(3/4, 5/4 - 2b)`` for ``s0 < v``, or
        times ``B(2b - 1, 5/4 - 2b) + B(3/4, 2b - 1)`` for ``v < s0``, with
        Beta from Gamma.
    """
    if not 0.5 < beta < 0.625:
        raise DomainError(f"beta={beta} outside (1/2, 5/8)")
    if not (0 < v < 1 and 0 < s0 < 1):
        raise DomainError("v and s0 must lie in (0, 1)")
    if v == s0:
        raise DomainError("v == s0 is degenerate")
    e = 2 * beta - 1.25
    if s0 < v:
        scale = (v - s0) ** e
        lhs = scale * beta_inc_quad(0.75, 1.25 - 2 * beta, s0 / v, quad_nodes)
        rhs = scale * beta_fn(0.75, 1.25 - 2 * beta)
    else:
        scale = (s0 - v) ** e
        near = beta_inc_quad(2 * beta - 1, 1.25 - 2 * beta, v / s0, quad_nodes)
        far = beta_quad(2 * beta - 1, 0.75, quad_nodes)
        lhs = scale * (near + far)
        rhs = scale * (beta_fn(2 * beta - 1, 1.25 - 2 * beta) + beta_fn(0.75, 2 * beta - 1))
    return lhs, rhs


# ---------------------------------------------------------------------------
# eight-dimensional integral

_NAMES = ("t", "u", "t0", "u0", "s", "v", "s0", "v0")


def _check_point(point, alpha, beta):
    p = np.asarray(point, dtype=np.float64)
    if p.shape[-1] != 8:
        raise DomainError("a point has 8 coordinates (t, u, t0, u0, s, v, s0, v0)")
    if not np.all(np.isfinite(p)):
        raise NonFiniteInput("coordinates must be finite")
    if np.any(p <= 0) or np.any(p >= 1):
        raise DomainError("coordinates must lie in (0, 1)")
    t, u, t0, u0, s, v, s0, v0 = np.moveaxis(p, -1, 0)
    if np.any(t <= u) or np.any(t0 <= u0) or np.any(s <= v) or np.any(s0 <= v0):
        raise DomainError("need t > u, t0 > u0, s > v, s0 > v0 strictly")
    for h in (alpha, beta):
        if not 0.5 < h < 1:
            raise DomainError("Hurst exponents must lie in (1/2, 1)")
    return t, u, t0, u0, s, v, s0, v0


def _block(t, u, t0, u0, h):
    e = 2 * h - 2
    return ((t - u) * (t0 - u0)) ** -0.25 * np.abs(t - t0) ** e * np.abs(u - u0) ** e


def integrand_I(point, alpha: float, beta: float):
    """Integrand of ``I`` at ``(t, u, t0, u0, s, v, s0, v0)``; vectorized over leading axes."""
    t, u, t0, u0, s, v, s0, v0 = _check_point(point, alpha, beta)
    # the integrand is +inf where t = t0 or u = u0
    with np.errstate(divide="ignore"):
        val = _block(t, u, t0, u0, alpha) * _block(s, v, s0, v0, beta)
    return float(val) if np.ndim(val) == 0 else val


def _gfun(y, k):
    """Antiderivative of ``|y|^(k-1)``: ``sign(y) |y|^k / k``."""
    return np.sign(y) * np.abs(y) ** k / k


def _draw_gap(rng, c, lo, hi, e):
    """Draw ``d = x - c`` with density ``~ |d|^e`` on ``(lo - c, hi - c)``.

    Returns the gap and ``log Z``. Sampling the gap rather than ``x`` keeps
    tiny gaps exact, where ``c + d`` would round to ``c``.
    """
    k = e + 1.0
    ga, gb = _gfun(lo - c, k), _gfun(hi - c, k)
    z = gb - ga
    w = ga + rng.random(np.shape(c)) * z
    d = np.sign(w) * np.abs(w * k) ** (1.0 / k)
    # keep the draw inside the interval despite rounding
    d = np.clip(d, lo - c, hi - c)
    return d, np.log(z)


def _log_z(c, lo, hi, e):
    k = e + 1.0
    return np.log(_gfun(hi - c, k) - _gfun(lo - c, k))


# Each component follows three edges; the fourth ("left out") is named first.
# Steps are (variable, parent, edge, lo, hi) with lo/hi a variable name or constant.
_COMPONENTS = {
    "A": ("u", [("u0", "u", "D", 0.0, 1.0), ("t0", "u0", "B", "u0", 1.0), ("t", "t0", "C", "u", 1.0)]),
    "B": ("u0", [("u", "u0", "D", 0.0, 1.0), ("t", "u", "A", "u", 1.0), ("t0", "t", "C", "u0", 1.0)]),
    "C": ("t", [("u", "t", "A", 0.0, "t"), ("u0", "u", "D", 0.0, 1.0), ("t0", "u0", "B", "u0", 1.0)]),
    "D": ("u", [("t", "u", "A", "u", 1.0), ("t0", "t", "C", 0.0, 1.0), ("u0", "t0", "B", 0.0, "t0")]),
}
_EDGES = {"A": ("t", "u"), "B": ("t0", "u0"), "C": ("t", "t0"), "D": ("u", "u0")}
_ORDER = ("A", "B", "C", "D")


def _edge_exp(edge, h):
    return -0.25 if edge in ("A", "B") else 2 * h - 2


def _val(spec, x):
    return x[spec] if isinstance(spec, str) else spec


def _sample_block(rng, n: int, h: float, constant: bool):
    """``n`` weights ``f/q`` for one four-dimensional block."""
    comp = rng.integers(0, 4, size=n)
    x = {name: np.empty(n) for name in ("t", "u", "t0", "u0")}
    gaps = {e: np.empty(n) for e in _ORDER}
    for ci, key in enumerate(_ORDER):
        sel = np.flatnonzero(comp == ci)
        if sel.size == 0:
            continue
        root, steps = _COMPONENTS[key]
        xs = {root: rng.random(sel.size)}
        gs = {}
        for var, parent, edge, lo, hi in steps:
            c = xs[parent]
            d, _ = _draw_gap(rng, c, _val(lo, xs), _val(hi, xs), _edge_exp(edge, h))
            xs[var] = c + d
            gs[edge] = np.abs(d)
        a, b = _EDGES[key]
        gs[key] = np.abs(xs[a] - xs[b])
        for name in x:
            x[name][sel] = xs[name]
        for e in _ORDER:
            gaps[e][sel] = gs[e]
    # log q_k = sum over followed edges of e*log(gap) - log Z; log f = sum over all edges.
    # log(f / q) = -logsumexp_k(log(1/4) - e_k log gap_k - log Z_k) when f is the integrand.
    with np.errstate(divide="ignore"):
        loggap = {e: np.log(gaps[e]) for e in _ORDER}
    terms = []
    for key in _ORDER:
        root, steps = _COMPONENTS[key]
        logz = sum(_log_z(x[parent], _val(lo, x), _val(hi, x), _edge_exp(edge, h)) for _, parent, edge, lo, hi in steps)
        # left-out edge contributes |gap|^(-e) <= 1; a gap rounded to zero gives exp(-inf) = 0
        left = -_edge_exp(key, h) * loggap[key]
        left = np.where(np.isneginf(loggap[key]), -np.inf, left)
        followed = sum(_edge_exp(edge, h) * loggap[edge] for _, _, edge, _, _ in steps)
        terms.append(np.log(0.25) + (followed if constant else 0.0) + (0.0 if constant else left) - logz)
    terms = np.stack(terms)
    top = terms.max(axis=0)
    lse = top + np.log(np.exp(terms - top).sum(axis=0))
    return np.exp(-lse)


@dataclass(frozen=True)
class SingularMCResult:
    estimate: float
    standard_error: float
    n_samples: int
    alpha: float
    beta: float
    seed: int
    in_regime: bool = True


def integral_I_mc(
    alpha: float,
    beta: float,
    n_samples: int,
    seed: int,
    *,
    swap_streams: bool = False,
    constant: bool = False,
) -> SingularMCResult:
    """Importance-sampled Monte Carlo estimate of ``I(alpha, beta)``.

    Parameters
    ----------
    swap_streams : bool
        Draw the ``alpha`` block from the stream normally used by the
        ``beta`` block and vice versa. By the symmetry of the integrand this
        gives another valid estimate.
    constant : bool
        Integrate the constant 1 instead (exact value 1/16); checks that the
        weights cancel the proposal density.
    """
    if int(n_samples) != n_samples or n_samples < 2:
        raise ValueError("n_samples must be an integer >= 2")
    for h in (alpha, beta):
        if not 0.5 < h < 1:
            raise DomainError("Hurst exponents must lie in (1/2, 1)")
    blocks = (1, 0) if swap_streams else (0, 1)
    wa = _sample_block(substream(seed, 0, blocks[0]), n_samples, alpha, constant)
    wb = _sample_block(substream(seed, 0, blocks[1]), n_samples, beta, constant)
    w = wa * wb
    est = float(w.mean())
    se = float(w.std(ddof=1) / math.sqrt(n_samples))
    regime = 0.5 < alpha < 0.625 and 0.5 < beta < 0.625
    return SingularMCResult(est, se, int(n_samples), alpha, beta, seed, regime)


def finiteness_scan(alphas, betas, n_samples: int, seed: int) -> list[list]:
    """Grid of :func:`integral_I_mc` results, rows over ``alphas``.

    Every cell uses the same seed (common random numbers), which makes
    differences between cells far less noisy than the cells themselves.
    A cell that raises holds the exception instead of a result.
    """
    alphas, betas = list(alphas), list(betas)
    if not alphas or not betas:
        raise ValueError("parameter lists must be non-empty")
    table = []
    for a in alphas:
        row = []
        for b in betas:
            try:
                row.append(integral_I_mc(a, b, n_samples, seed))
            except (DomainError, ValueError) as exc:
                row.append(exc)
        table.append(row)
    return table
