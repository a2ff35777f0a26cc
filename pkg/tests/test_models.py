import itertools
import json
import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pseudolap.models import (
    CutoffTooLargeError,
    Kind,
    LatticeBasis,
    ManifoldModel,
    enumerate_levels,
    heat_trace,
    heat_trace_direct,
    heat_trace_dual,
    heat_trace_main,
    resolvent_kernel,
    weyl_count,
)

FOUR_PI_SQ = 4 * math.pi ** 2


def brute_levels(basis_rows, cutoff, nmax=12):
    dual = np.linalg.inv(np.array(basis_rows, dtype=float)).T
    counts = {}
    d = len(basis_rows)
    for n in itertools.product(range(-nmax, nmax + 1), repeat=d):
        k = np.array(n) @ dual
        mu = FOUR_PI_SQ * float(k @ k)
        if mu <= cutoff * (1 + 1e-12):
            key = round(mu, 9)
            counts[key] = counts.get(key, 0) + 1
    return sorted(counts.items())


def test_cube_levels_brute_force(cube):
    table = enumerate_levels(cube, 5 * FOUR_PI_SQ)
    got = [(round(float(v), 9), int(m)) for v, m in zip(table.values, table.multiplicities)]
    assert got == brute_levels(np.eye(3), 5 * FOUR_PI_SQ)
    assert [m for _, m in got] == [1, 6, 12, 8, 6, 24]


def test_skewed_torus_levels_brute_force():
    rows = [[1.0, 0.0], [0.3, 1.2]]
    model = ManifoldModel.flat_torus(rows)
    table = enumerate_levels(model, 300.0)
    got = [(round(float(v), 6), int(m)) for v, m in zip(table.values, table.multiplicities)]
    want = [(round(v, 6), m) for v, m in brute_levels(rows, 300.0)]
    assert got == want


def test_sphere_and_square_levels(sphere, square):
    t = enumerate_levels(sphere, 15.0)
    assert list(zip(t.values, t.multiplicities)) == [(0, 1), (3, 4), (8, 9), (15, 16)]
    s = enumerate_levels(square, FOUR_PI_SQ)
    assert list(s.multiplicities) == [1, 4]
    assert s.values[1] == pytest.approx(FOUR_PI_SQ)


def test_table_serialisation(sphere):
    t = enumerate_levels(sphere, 8.0)
    assert t.to_csv().splitlines() == ["mu,multiplicity", "0,1", "3,4", "8,9"]
    payload = json.loads(t.to_json())
    assert payload["model"] == "sphere3" and payload["levels"][2] == [8.0, 9]
    assert t.count() == 14
    assert len(t.truncate(3.0)) == 2
    with pytest.raises(ValueError):
        t.truncate(100.0)


def test_weyl_law(cube, sphere):
    cutoff = 1e4
    assert enumerate_levels(cube, cutoff).count() / weyl_count(cube, cutoff) == pytest.approx(1.0, abs=2e-3)
    assert enumerate_levels(sphere, cutoff).count() / weyl_count(sphere, cutoff) == pytest.approx(1.0, abs=2e-2)


@pytest.mark.parametrize("rows", [
    np.eye(3).tolist(),
    [[1.0, 0.0], [0.0, 1.0]],
    [[1.0, 0.2, 0.0], [0.0, 1.1, 0.3], [0.1, 0.0, 0.9]],
])
def test_heat_trace_direct_equals_dual_at_split(rows):
    model = ManifoldModel.flat_torus(rows)
    assert heat_trace_direct(model, 1.0) == pytest.approx(heat_trace_dual(model, 1.0), abs=1e-12)


@settings(max_examples=25, deadline=None)
@given(st.floats(min_value=0.05, max_value=3.0))
def test_sphere_heat_trace_poisson(t):
    model = ManifoldModel.sphere3()
    assert heat_trace_direct(model, t) == pytest.approx(heat_trace_dual(model, t), rel=1e-12)


def test_heat_trace_small_time_limit(cube, sphere):
    t = 1e-4
    assert heat_trace(cube, t) / heat_trace_main(cube, t) == pytest.approx(1.0, abs=1e-12)
    assert heat_trace(sphere, t) * (4 * math.pi * t) ** 1.5 / sphere.volume == pytest.approx(math.exp(t), rel=1e-12)


def test_sphere_resolvent_value(sphere):
    # distance pi/2 on S^3, closed form via sinh kernel
    assert resolvent_kernel(sphere, math.pi / 2, -2.0) == pytest.approx(0.015857276041301533, rel=1e-13)


def test_torus_resolvent_image_sum_mpmath(cube):
    x = np.array([0.25, 0.0, 0.0])
    k = mpmath.mpf(10)
    total = mpmath.mpf(0)
    rng = range(-4, 5)
    for n in itertools.product(rng, repeat=3):
        r = mpmath.sqrt(sum((mpmath.mpf(x[i]) + n[i]) ** 2 for i in range(3)))
        total += mpmath.exp(-k * r) / (4 * mpmath.pi * r)
    assert resolvent_kernel(cube, 0.25, -100.0) == pytest.approx(float(total), rel=1e-12)
    assert resolvent_kernel(cube, x, -100.0) == pytest.approx(float(total), rel=1e-12)


def test_model_validation():
    with pytest.raises(ValueError):
        LatticeBasis(((1.0, 0.0), (2.0, 0.0)))
    with pytest.raises(ValueError):
        ManifoldModel(Kind.FLAT_TORUS3, LatticeBasis.parse("1,0;0,1"))
    with pytest.raises(ValueError):
        ManifoldModel(Kind.SPHERE3, LatticeBasis.parse("1,0;0,1"))
    with pytest.raises(ValueError):
        enumerate_levels(ManifoldModel.sphere3(), 0.0)
    assert issubclass(CutoffTooLargeError, ValueError)


def test_model_properties(cube, sphere, square):
    assert sphere.volume == pytest.approx(2 * math.pi ** 2)
    assert sphere.shortest_period == pytest.approx(2 * math.pi)
    assert cube.shortest_period == pytest.approx(1.0)
    assert square.dimension == 2 and cube.describe()["volume"] == pytest.approx(1.0)
