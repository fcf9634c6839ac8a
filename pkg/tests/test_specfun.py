import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fou_sheet.errors import DomainError, NonFiniteInput, SeriesRangeError
from fou_sheet.specfun import BesselConfig, j0, j0_asymptotic, j0_integral, j0_series

# frozen from tests/oracles.py (exact rational series, mpmath quadrature)
J0_2 = 0.22389077914123567
J0_FIRST_ZERO = 2.404825557695773
J0_ORACLE = {
    24.9: 0.0832459683530155,
    25.1: 0.10827567149994945,
    100.0: 0.019985850304223122,
    10.0: -0.24593576445134835,
    20.0: 0.16702466434058316,
    50.0: 0.055812327669251816,
}


def test_series_at_zero():
    assert j0_series(0.0) == 1.0


def test_series_at_two():
    assert j0_series(2.0) == pytest.approx(J0_2, abs=1e-15)


def test_series_first_zero():
    assert abs(j0_series(2.404826)) < 1e-5
    assert abs(j0_series(J0_FIRST_ZERO)) < 1e-14


def test_integral_at_zero():
    assert j0_integral(0.0) == 1.0


def test_integral_matches_series_at_two():
    assert abs(j0_integral(2.0) - j0_series(2.0)) < 1e-10


def test_integral_large_argument_against_asymptotic():
    assert abs(j0_integral(50.0, nodes=512) - j0_asymptotic(50.0)) <= 50.0**-1.5


@pytest.mark.parametrize("x", sorted(J0_ORACLE))
def test_dispatcher_against_oracle(x):
    assert j0(x) == pytest.approx(J0_ORACLE[x], abs=1e-10)


def test_dispatcher_continuous_at_switch():
    cfg = BesselConfig()
    below = j0(np.nextafter(cfg.switch_point, 0))
    above = j0(cfg.switch_point)
    assert abs(below - above) < 1e-9
    assert abs(j0(24.9) - J0_ORACLE[24.9]) < 1e-10
    assert abs(j0(25.1) - J0_ORACLE[25.1]) < 1e-10


def test_asymptotic_at_quarter_pi():
    assert j0_asymptotic(math.pi / 4) == pytest.approx(math.sqrt(8 / math.pi**2), rel=1e-15)


@pytest.mark.parametrize("x", [10.0, 20.0, 50.0, 100.0])
def test_asymptotic_envelope_points(x):
    assert abs(j0(x) - j0_asymptotic(x)) <= x**-1.5


def test_array_input_keeps_shape():
    x = np.linspace(0, 60, 12).reshape(3, 4)
    out = j0(x)
    assert out.shape == (3, 4)
    assert out[0, 0] == 1.0


@pytest.mark.parametrize("fn", [j0_series, j0_integral, j0])
@pytest.mark.parametrize("bad", [float("nan"), float("inf")])
def test_non_finite_rejected(fn, bad):
    with pytest.raises(NonFiniteInput):
        fn(bad)


@pytest.mark.parametrize("fn", [j0_series, j0_integral, j0])
def test_negative_rejected(fn):
    with pytest.raises(DomainError):
        fn(-1.0)


def test_series_range_error():
    with pytest.raises(SeriesRangeError):
        j0_series(40.5)
    j0_series(40.0)


def test_asymptotic_rejects_nonpositive():
    with pytest.raises(DomainError):
        j0_asymptotic(0.0)


@pytest.mark.parametrize("kw", [{"series_tol": 0.0}, {"quad_nodes": 8}, {"switch_point": -1.0}, {"switch_point": 41.0}])
def test_config_invariants(kw):
    with pytest.raises(ValueError):
        BesselConfig(**kw)


def test_integral_error_decreases_with_nodes():
    x = 30.0
    errs = [abs(j0_integral(x, nodes=n) - j0(x)) for n in (16, 20, 24, 32)]
    assert errs[0] > errs[1] > errs[2]
    assert errs[-1] < 1e-12


@given(st.floats(min_value=0.0, max_value=25.0))
def test_representations_agree(x):
    assert abs(j0_series(x) - j0_integral(x)) < 1e-10


@given(st.floats(min_value=0.0, max_value=2.0))
def test_alternating_bracket(x):
    # consecutive partial sums of the series bracket the limit
    q = (x / 2) ** 2
    term, partial = 1.0, 1.0
    limit = j0_series(x)
    for n in range(1, 12):
        term = -term * q / (n * n)
        nxt = partial + term
        lo, hi = min(partial, nxt), max(partial, nxt)
        assert lo - 1e-15 <= limit <= hi + 1e-15
        partial = nxt


@given(st.floats(min_value=10.0, max_value=200.0))
def test_asymptotic_envelope(x):
    assert abs(j0(x) - j0_asymptotic(x)) <= 1.0 * x**-1.5


@given(st.floats(min_value=0.0, max_value=500.0))
def test_bounded_by_one(x):
    assert abs(j0(x)) <= 1.0


@given(st.floats(min_value=1e-3, max_value=1e6))
def test_asymptotic_amplitude(x):
    assert abs(j0_asymptotic(x)) * math.sqrt(x) <= math.sqrt(2 / math.pi) * (1 + 1e-15)
