import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pseudolap.numerics import (
    ConvergenceError,
    Tolerance,
    bessel_k0,
    bracketed_root,
    deterministic_sum,
    heat_integral_identity_check,
    quad,
)


@pytest.mark.parametrize("x, expected", [
    (1.0, 0.42102443824070833),
    (10.0, 1.7780062316167652e-05),
])
def test_k0_reference_values(x, expected):
    assert bessel_k0(x) == pytest.approx(expected, rel=1e-14)


@settings(max_examples=60, deadline=None)
@given(st.floats(min_value=1e-6, max_value=700.0))
def test_k0_matches_mpmath(x):
    ref = float(mpmath.besselk(0, x))
    assert bessel_k0(x) == pytest.approx(ref, rel=5e-14)


def test_k0_both_regimes_accurate_at_crossover():
    xs = [2.0 - 1e-12, 2.0, 2.0 + 1e-12]
    for x, got in zip(xs, bessel_k0(np.array(xs))):
        assert got == pytest.approx(float(mpmath.besselk(0, x)), rel=1e-14)


def test_k0_vectorized_and_underflow():
    out = bessel_k0(np.array([[0.5, 1.0], [800.0, 3.0]]))
    assert out.shape == (2, 2)
    assert out[1, 0] == 0.0
    assert isinstance(bessel_k0(1.5), float)


@pytest.mark.parametrize("bad", [0.0, -1.0, float("nan")])
def test_k0_rejects_nonpositive(bad):
    with pytest.raises(ValueError):
        bessel_k0(bad)


@pytest.mark.parametrize("d", [0.5, 1.0, 2.0])
@pytest.mark.parametrize("lam", [-1.0, -10.0, -100.0])
def test_heat_integral_identity(d, lam):
    exact = 2 * math.sqrt(math.pi) / d * math.exp(-d * math.sqrt(-lam))
    res = heat_integral_identity_check(d, lam)
    assert res.value == pytest.approx(exact, rel=1e-12)
    assert res.evaluations > 0


@pytest.mark.parametrize("d, lam, expected", [
    (1.0, -1.0, 1.3040986643465844),
    (2.0, -4.0, 0.032463624680131724),
])
def test_heat_integral_mpmath_values(d, lam, expected):
    assert heat_integral_identity_check(d, lam).value == pytest.approx(expected, rel=1e-12)


def test_heat_integral_preconditions():
    with pytest.raises(ValueError):
        heat_integral_identity_check(0.0, -1.0)
    with pytest.raises(ValueError):
        heat_integral_identity_check(1.0, 0.5)


def test_quad_and_failure():
    assert quad(math.exp, 0.0, 1.0).value == pytest.approx(math.e - 1, rel=1e-14)
    with pytest.raises(ConvergenceError):
        quad(lambda x: math.sin(1.0 / x) / x, 1e-9, 1.0, Tolerance(1e-14, 1e-14, 5))


def test_tolerance_validation():
    with pytest.raises(ValueError):
        Tolerance(abs_tol=-1.0)
    with pytest.raises(ValueError):
        Tolerance(0.0, 0.0)
    with pytest.raises(ValueError):
        Tolerance(max_iter=0)
    assert Tolerance(1e-3, 0.0).accepts(5e-4, 10.0)


def test_bracketed_root():
    assert bracketed_root(lambda x: x * x - 2, 0.0, 2.0) == pytest.approx(math.sqrt(2), rel=1e-12)
    with pytest.raises(ValueError):
        bracketed_root(lambda x: x * x + 1, -1.0, 1.0)


def test_deterministic_sum_is_order_independent():
    terms = [1e16, 1.0, -1e16, 1e-3] * 50
    assert deterministic_sum(terms) == deterministic_sum(reversed(terms)) == pytest.approx(50.05)
