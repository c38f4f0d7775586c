import math

import mpmath
import pytest
from hypothesis import given
from hypothesis import strategies as st

from erltel.algebra_series import evaluate, generate_table
from erltel.closed_form import ModelParams, gc_normalized
from erltel.quadrature import (
    INTEGRAL_IDENTITIES,
    QuadratureError,
    QuadratureSpec,
    integrate,
    integrate_support,
    normalization_check,
    u_integral,
)


@pytest.fixture(scope="module")
def table():
    return generate_table(2, 4)


def test_constant():
    value, err = integrate(lambda x: 1.0, 0, 1)
    assert value == pytest.approx(1.0, abs=1e-14)
    assert err >= 0


def test_listed_integrals(table):
    assert u_integral(table, 0, 0, 1)[0] == pytest.approx(2.0166722, abs=1e-7)
    assert u_integral(table, 3, 2, 1)[0] == pytest.approx(2 * math.cosh(1) + 2 * math.cos(1) - 4, abs=1e-10)
    assert u_integral(table, 3, 2, 1)[0] == pytest.approx(0.1667659, abs=1e-7)


@pytest.mark.parametrize("key", sorted(INTEGRAL_IDENTITIES))
@pytest.mark.parametrize("t", [0.5, 1.0, 2.0])
def test_identities(table, key, t):
    l, k = key
    value, err = u_integral(table, l, k, t)
    exact = INTEGRAL_IDENTITIES[key](t)
    assert abs(value - exact) < 1e-8
    # error estimate honesty: the reported bound covers the actual error
    assert abs(value - exact) <= max(err, 1e-12)


@given(a=st.floats(-3, 3), width=st.floats(0.01, 5), c=st.floats(0.1, 3))
def test_error_estimate_covers_error(a, width, c):
    b = a + width
    value, err = integrate(lambda x: math.exp(c * x) * math.cos(x), a, b)
    exact = float(mpmath.quad(lambda x: mpmath.exp(c * x) * mpmath.cos(x), [a, b]))
    assert abs(value - exact) <= max(err, QuadratureSpec().abs_tol)


@pytest.mark.parametrize("m", [1, 2])
@pytest.mark.parametrize("t", [0.5, 1.0, 2.0, 5.0])
def test_normalization(m, t):
    total, dev = normalization_check(ModelParams(m), t)
    assert dev < 1e-8
    assert total == pytest.approx(1.0, abs=1e-8)


def test_normalization_small_t_is_atom():
    total, dev = normalization_check(ModelParams(2), 1e-3)
    assert dev < 1e-8


def test_normalization_scaled_params():
    total, _ = normalization_check(ModelParams(1, 2.0, 3.0), 1.5)
    assert total == pytest.approx(1.0, abs=1e-8)


@pytest.mark.parametrize("m, extra", [(1, 0.0), (2, 1.0)])
def test_normalized_integral_of_g(m, extra):
    # int g dy = e^t - 1 (m = 1) and e^t - 1 - t (m = 2)
    for t in (0.5, 2.0):
        value, _ = integrate_support(lambda y: gc_normalized(m, t, min(max(y, -t), t)), t)
        assert value == pytest.approx(math.exp(t) - 1 - extra * t, rel=1e-10)


def test_failure_raises():
    spec = QuadratureSpec(abs_tol=1e-14, rel_tol=1e-14, max_subdivisions=3)
    with pytest.raises(QuadratureError) as info:
        integrate(lambda x: math.sin(1 / x) if x else 0.0, 1e-6, 1, spec)
    assert info.value.err_est >= 0


def test_bad_interval_and_settings():
    with pytest.raises(ValueError):
        integrate(lambda x: x, 1, 0)
    with pytest.raises(ValueError):
        QuadratureSpec(abs_tol=0)
    with pytest.raises(ValueError):
        normalization_check(ModelParams(3), 1)
