import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import quad
from scipy.special import beta as sp_beta
from scipy.special import betainc

from fou_sheet.errors import DomainError
from fou_sheet.singular import (
    beta_fn,
    beta_inc_quad,
    beta_quad,
    beta_reduction_check,
    finiteness_scan,
    gamma,
    integral_I_mc,
    integrand_I,
    lgamma,
)

SEPARATED = (0.9, 0.1, 0.8, 0.2, 0.9, 0.1, 0.8, 0.2)
INTEGRAND_AT_SEPARATED = 5746.182052134544  # tests/oracles.py


def _direct(beta, v, s0):
    """lhs by adaptive quadrature with algebraic endpoint weights (independent oracle)."""
    e = 2 * beta - 2
    if s0 < v:
        val, _ = quad(lambda x: (v - x) ** e, 0, s0, weight="alg", wvar=(0.0, -0.25))
        return val
    near, _ = quad(lambda x: (s0 - x) ** -0.25, 0, v, weight="alg", wvar=(0.0, e))
    far, _ = quad(lambda x: 1.0, v, s0, weight="alg", wvar=(e, -0.25))
    return near + far


def test_gamma_exact_values():
    for n in range(1, 12):
        assert gamma(n) == pytest.approx(math.factorial(n - 1), rel=1e-13)
    assert gamma(0.5) == pytest.approx(math.sqrt(math.pi), rel=1e-14)
    assert gamma(1.5) == pytest.approx(0.5 * math.sqrt(math.pi), rel=1e-14)
    assert gamma(-0.5) == pytest.approx(-2 * math.sqrt(math.pi), rel=1e-13)
    assert lgamma(10.5) == pytest.approx(math.lgamma(10.5), rel=1e-14)
    with pytest.raises(DomainError):
        gamma(-2.0)


def test_beta_identity_random_pairs():
    rng = np.random.default_rng(909)
    for x, y in rng.uniform(0.1, 3.0, size=(20, 2)):
        assert abs(beta_quad(x, y) - gamma(x) * gamma(y) / gamma(x + y)) < 1e-10 * max(1.0, beta_fn(x, y))


@given(st.floats(0.1, 3.0), st.floats(0.1, 3.0), st.floats(0.0, 1.0))
def test_incomplete_beta_against_scipy(a, b, x):
    want = betainc(a, b, x) * sp_beta(a, b)
    assert beta_inc_quad(a, b, x) == pytest.approx(want, rel=1e-10, abs=1e-14)


def test_reduction_example():
    lhs, rhs = beta_reduction_check(0.55, 0.8, 0.4)
    assert rhs == pytest.approx(0.4**-0.15 * beta_fn(0.75, 0.15), rel=1e-14)
    assert lhs <= rhs
    assert lhs == pytest.approx(_direct(0.55, 0.8, 0.4), rel=1e-9)


def test_reduction_vanishes_with_s0():
    vals = [beta_reduction_check(0.55, 0.8, s0)[0] for s0 in (1e-2, 1e-4, 1e-8)]
    assert vals[0] > vals[1] > vals[2] > 0
    assert vals[2] < 1e-5


def test_reduction_rejects():
    with pytest.raises(DomainError):
        beta_reduction_check(0.7, 0.8, 0.4)
    with pytest.raises(DomainError):
        beta_reduction_check(0.55, 0.4, 0.4)


@given(st.floats(0.505, 0.62), st.floats(0.01, 0.99), st.floats(0.01, 0.99))
def test_reduction_matches_direct_quadrature(beta, v, s0):
    if abs(v - s0) < 1e-3:
        return
    lhs, rhs = beta_reduction_check(beta, v, s0)
    assert lhs == pytest.approx(_direct(beta, v, s0), rel=1e-7)
    assert lhs <= rhs * (1 + 1e-8)


def test_reduction_lhs_diverges_at_diagonal():
    # the integral blows up like |v - s0|^(2 beta - 5/4) from both sides
    b = 0.55
    for d in (1e-2, 1e-4):
        below = beta_reduction_check(b, 0.5, 0.5 - d)[0]
        above = beta_reduction_check(b, 0.5, 0.5 + d)[0]
        assert below > 0.5 * d ** (2 * b - 1.25) and above > 0.5 * d ** (2 * b - 1.25)


def test_integrand_examples():
    val = integrand_I(SEPARATED, 0.55, 0.55)
    assert val == pytest.approx(INTEGRAND_AT_SEPARATED, rel=1e-12)
    p = np.array(SEPARATED)
    swapped = p[[2, 3, 0, 1, 6, 7, 4, 5]]
    assert integrand_I(swapped, 0.55, 0.55) == pytest.approx(val, rel=1e-14)
    with pytest.raises(DomainError):
        integrand_I((0.1, 0.1, 0.8, 0.2, 0.9, 0.1, 0.8, 0.2), 0.55, 0.55)
    with pytest.raises(DomainError):
        integrand_I(SEPARATED, 0.5, 0.55)


@given(st.lists(st.floats(0.01, 0.99), min_size=8, max_size=8), st.floats(0.51, 0.95), st.floats(0.51, 0.95))
def test_integrand_block_symmetry(raw, a, b):
    t, u, t0, u0, s, v, s0, v0 = raw
    t, u = max(t, u), min(t, u)
    t0, u0 = max(t0, u0), min(t0, u0)
    s, v = max(s, v), min(s, v)
    s0, v0 = max(s0, v0), min(s0, v0)
    if t == u or t0 == u0 or s == v or s0 == v0:
        return
    p = (t, u, t0, u0, s, v, s0, v0)
    q = (t0, u0, t, u, s0, v0, s, v)
    assert integrand_I(q, a, b) == pytest.approx(integrand_I(p, a, b), rel=1e-12)


def test_integrand_decreasing_in_hurst():
    # every singular base is below 1, so larger exponents give smaller values
    vals = [integrand_I(SEPARATED, 0.55, b) for b in (0.52, 0.56, 0.60, 0.62)]
    assert all(b < a for a, b in zip(vals, vals[1:]))


def test_constant_integrand_volume():
    r = integral_I_mc(0.55, 0.55, 200000, 3, constant=True)
    assert abs(r.estimate - 1 / 16) < 3 * r.standard_error


def test_swapped_streams_agree():
    a = integral_I_mc(0.55, 0.58, 100000, 12)
    b = integral_I_mc(0.55, 0.58, 100000, 12, swap_streams=True)
    assert a.estimate != b.estimate
    assert abs(a.estimate - b.estimate) < 3 * math.hypot(a.standard_error, b.standard_error)


def test_se_scaling_stable():
    a = integral_I_mc(0.55, 0.55, 50000, 21)
    b = integral_I_mc(0.55, 0.55, 200000, 21)
    ra = a.standard_error * math.sqrt(a.n_samples)
    rb = b.standard_error * math.sqrt(b.n_samples)
    assert 0.5 < rb / ra < 2.0


def test_mc_decreasing_in_beta():
    vals = [integral_I_mc(0.55, b, 50000, 4).estimate for b in (0.52, 0.56, 0.60, 0.62)]
    assert all(b < a for a, b in zip(vals, vals[1:]))


def test_mc_flags_and_errors():
    assert not integral_I_mc(0.55, 0.7, 1000, 1).in_regime
    assert integral_I_mc(0.55, 0.6, 1000, 1).in_regime
    with pytest.raises(ValueError):
        integral_I_mc(0.55, 0.55, 1, 1)
    with pytest.raises(DomainError):
        integral_I_mc(0.5, 0.55, 100, 1)


def test_scan():
    single = finiteness_scan([0.55], [0.56], 5000, 8)
    assert single[0][0] == integral_I_mc(0.55, 0.56, 5000, 8)
    table = finiteness_scan([0.55, 0.6], [0.52, 0.4, 0.6], 5000, 8)
    assert isinstance(table[0][1], DomainError)
    assert table[1][2] == integral_I_mc(0.6, 0.6, 5000, 8)
    # common random numbers: monotone in both parameters
    ests = np.array([[c.estimate for c in row] for row in finiteness_scan([0.53, 0.57, 0.61], [0.53, 0.57, 0.61], 20000, 8)])
    assert np.all(np.diff(ests, axis=0) < 0) and np.all(np.diff(ests, axis=1) < 0)
