import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pseudolap import ManifoldModel
from pseudolap.scattering import (
    ExtensionParam,
    PoleError,
    f_asymptotic,
    f_closed,
    f_diff_spectral,
    f_prime,
    f_remainder,
    krein_coefficient,
    raw_value,
    shift_derivative,
)

PI = math.pi


def test_sphere_closed_form_mpmath(sphere):
    # (q/4pi) coth(pi q), q = sqrt(-lam-1)
    assert f_closed(sphere, -2.0).value == pytest.approx(0.07987524035383605, rel=1e-14)
    assert f_closed(sphere, -0.001).value == pytest.approx(-50.62255155318, rel=1e-11)
    assert f_prime(sphere, -2.0).value == pytest.approx(-0.03900040167570960, rel=1e-13)


@pytest.mark.parametrize("lam", [-1.0, -1.0 + 1e-9, -0.5, 2.0, 7.9])
def test_sphere_continuation_matches_mpmath(sphere, lam):
    s = mpmath.sqrt(mpmath.mpf(lam) + 1)
    ref = mpmath.mpf(1) / (4 * mpmath.pi ** 2) if s == 0 else s * mpmath.cot(mpmath.pi * s) / (4 * mpmath.pi)
    assert f_closed(sphere, lam).value == pytest.approx(float(ref), rel=1e-12, abs=1e-15)


def test_square_torus_mpmath(square):
    assert f_closed(square, -100.0).value == pytest.approx(0.34800525434579425, rel=1e-14)
    assert f_closed(square, -400.0).value == pytest.approx(0.45833452537329158, rel=1e-14)


def test_cube_brute_force_image_sum(cube):
    n = np.arange(-32, 33)
    x, y, z = np.meshgrid(n, n, n, indexing="ij")
    r = np.sqrt(x ** 2 + y ** 2 + z ** 2).ravel()
    r = r[(r > 0) & (r <= 32)]
    k = math.sqrt(2.0)
    ref = k / (4 * PI) - math.fsum(np.exp(-k * r) / r) / (4 * PI)
    assert f_closed(cube, -2.0).value == pytest.approx(ref, rel=1e-13)
    assert ref == pytest.approx(-0.25352433920506556, rel=1e-13)


@pytest.mark.parametrize("lam", [-50.0, -3.0, -0.2])
def test_ewald_agrees_with_image_sum(cube, square, lam):
    from pseudolap.scattering import _ewald, _evaluate

    for m in (cube, square):
        assert _ewald(m, lam)[0] == pytest.approx(_evaluate(m, lam, False)[0], abs=1e-13)
        assert _ewald(m, lam, True)[0] == pytest.approx(_evaluate(m, lam, True)[0], abs=1e-13)


@settings(max_examples=30, deadline=None)
@given(st.floats(min_value=-300.0, max_value=300.0), st.sampled_from(["sphere3", "torus3", "torus2"]))
def test_derivative_matches_finite_difference(lam, name):
    model = {"sphere3": ManifoldModel.sphere3(), "torus3": ManifoldModel.unit_torus(3),
             "torus2": ManifoldModel.unit_torus(2)}[name]
    h = 1e-6 * max(1.0, abs(lam))
    try:
        d = f_prime(model, lam).value
        fd = (f_closed(model, lam + h).value - f_closed(model, lam - h).value) / (2 * h)
    except PoleError:
        return
    # stay away from poles where the difference quotient is meaningless
    if abs(d) > 50.0:
        return
    assert d < 0
    assert fd == pytest.approx(d, rel=1e-5, abs=1e-8)


@pytest.mark.parametrize("lam", [-2.0, -5.0, -20.0, -100.0, 13.3])
def test_spectral_difference_agrees(all_models, lam):
    for m in all_models.values():
        ref = f_closed(m, lam).value - f_closed(m, -1.0).value
        got = f_diff_spectral(m, lam, -1.0)
        assert got.method == "spectral_sum"
        assert abs(got.value - ref) <= 1e-12
        assert got.error_bound < 1e-12


def test_spectral_difference_table_too_short(cube):
    from pseudolap.models import enumerate_levels

    with pytest.raises(ValueError, match="cutoff too small"):
        f_diff_spectral(cube, -2.0, -5.0, table=enumerate_levels(cube, 100.0))


def test_poles_raise(sphere, cube):
    with pytest.raises(PoleError):
        f_closed(sphere, 3.0)
    with pytest.raises(PoleError):
        f_closed(cube, 0.0)
    with pytest.raises(PoleError):
        f_prime(cube, 4 * PI ** 2)
    # close but outside the guard band
    assert math.isfinite(f_closed(sphere, 3.0 + 1e-6).value)


def test_remainder_forms(sphere, cube, square):
    for m, lam in ((sphere, -50.0), (cube, -30.0), (square, -30.0)):
        r, dr = f_remainder(m, lam)
        x = -lam
        if m.dimension == 3:
            lead, dlead = math.sqrt(x) / (4 * PI), -1 / (8 * PI * math.sqrt(x))
        else:
            lead, dlead = math.log(x) / (4 * PI) + (0.5772156649015329 - math.log(2)) / (2 * PI), 1 / (4 * PI * lam)
        assert r == pytest.approx(f_closed(m, lam).value - lead, abs=1e-15)
        assert dr == pytest.approx(f_prime(m, lam).value - dlead, abs=1e-15)
    with pytest.raises(ValueError):
        f_remainder(sphere, -0.5)


def test_asymptotic_forms(sphere, cube, square):
    assert f_asymptotic(square, -100.0).value == pytest.approx(0.34802065207500214, rel=1e-14)
    assert f_asymptotic(square, -400.0).value == pytest.approx(0.45833477359185962, rel=1e-14)
    assert abs(f_asymptotic(sphere, -100.0).value - f_closed(sphere, -100.0).value) < 1e-13
    assert abs(f_asymptotic(cube, -400.0).value - f_closed(cube, -400.0).value) < 1e-9
    with pytest.raises(ValueError):
        f_asymptotic(cube, -5.0)


def test_extension_param():
    assert ExtensionParam(0.0).friedrichs and ExtensionParam(0.0).cot_alpha is None
    assert ExtensionParam(PI / 4).cot_alpha == pytest.approx(1.0)
    assert ExtensionParam.from_degrees(90).alpha == pytest.approx(PI / 2)
    for bad in (-0.1, PI, 4.0):
        with pytest.raises(ValueError):
            ExtensionParam(bad)


def test_krein_and_shift(sphere):
    ext = ExtensionParam(PI / 4)
    f = f_closed(sphere, -2.0).value
    assert krein_coefficient(sphere, -2.0, ext) == pytest.approx(1 / (f - 1), rel=1e-14)
    assert krein_coefficient(sphere, -2.0, ext) == pytest.approx(-1.0868091413870355, rel=1e-13)
    assert krein_coefficient(sphere, -2.0, ExtensionParam(PI / 2)) == pytest.approx(1 / f, rel=1e-14)
    assert krein_coefficient(sphere, -2.0, ExtensionParam(0.0)) == 0.0
    assert shift_derivative(sphere, -2.0, ExtensionParam(PI / 2)) == pytest.approx(0.48826647034729811, rel=1e-13)
    assert shift_derivative(sphere, -2.0, ExtensionParam(0.0)) == 0.0


def test_krein_pole_at_new_eigenvalue(sphere):
    with pytest.raises(PoleError):
        krein_coefficient(sphere, -0.75, ExtensionParam(PI / 2))
    assert raw_value(sphere, -0.75) == pytest.approx(0.0, abs=1e-15)
