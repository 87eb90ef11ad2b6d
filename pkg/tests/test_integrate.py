import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from smpath.errors import DomainError
from smpath.integrate import (IntegrandSpec, catalogue_integrand, constant, indicator, integrate,
                              integrate_grid, integrate_lebesgue, integrate_rademacher, integrate_step_function,
                              polynomial, series_integral, sine, snap_to_grid, trig_moments)
from smpath.models import LebesgueMeasure, PathSample, RademacherRealization, SMModelSpec, realize, sample_path
from smpath.rng import RngStream


@pytest.fixture(scope="module")
def rad():
    return realize(SMModelSpec("rademacher", K=128, T=2.0), RngStream(17))


def _x_integral(r):
    # int_0^T s dmu = sum_k eps_k k^(-4/3) T / (c_k + 1)
    k = np.arange(1, r.K + 1)
    return float(np.sum(r.signs * k ** (-4 / 3) * r.T / (k ** (-1 / 3) + 1)))


def test_rademacher_identity_integral(rad):
    assert integrate_rademacher(rad, polynomial([0, 1])) == pytest.approx(_x_integral(rad), abs=rad.K * 1e-10)


@pytest.mark.parametrize("a, b", [(0.0, 2.0), (0.3, 1.1), (1.9, 2.0), (0.5, 0.5)])
def test_rademacher_constant_matches_interval_measure(rad, a, b):
    assert integrate_rademacher(rad, constant(1.0), (a, b)) == pytest.approx(rad.interval_measure(a, b), abs=1e-9)


def test_linearity_in_integrand(rad):
    f, g = sine(2.0), polynomial([1.0, -0.5, 0.25])
    lhs = integrate_rademacher(rad, f.scaled(3.0) + g)
    rhs = 3.0 * integrate_rademacher(rad, f) + integrate_rademacher(rad, g)
    assert lhs == pytest.approx(rhs, abs=1e-8)


def test_linearity_in_measure():
    a = realize(SMModelSpec("rademacher", K=64), RngStream(1))
    b = realize(SMModelSpec("rademacher", K=64), RngStream(2))
    f = sine(3.0)
    joint = series_integral(a.signs + b.signs, 1.0, f)
    assert joint == pytest.approx(integrate_rademacher(a, f) + integrate_rademacher(b, f), abs=1e-8)


def test_lebesgue_exact():
    m = LebesgueMeasure(4.0)
    assert integrate_lebesgue(m, polynomial([0, 1])) == pytest.approx(8.0, abs=1e-12)
    assert integrate_lebesgue(m, sine(1.0), (0.0, math.pi)) == pytest.approx(2.0, abs=1e-12)


def test_grid_left_sum_oracle():
    # left sum of x against dx on n intervals of [0, T]: T^2/2 - T h / 2
    T, n = 2.0, 100
    path = sample_path(SMModelSpec("lebesgue", T=T), RngStream(0), n)
    assert integrate_grid(path, polynomial([0, 1])) == pytest.approx(T * T / 2 - T * (T / n) / 2, abs=1e-13)
    assert integrate_grid(path, constant(1.0)) == pytest.approx(T, abs=1e-14)


@settings(max_examples=30, deadline=None)
@given(st.floats(-3, 3), st.floats(-3, 3))
def test_grid_integral_is_linear(a, b):
    path = sample_path(SMModelSpec("wiener"), RngStream(4), 512)
    f, g = sine(3.0), polynomial([0.0, 1.0])
    lhs = integrate_grid(path, f.scaled(a) + g.scaled(b))
    assert lhs == pytest.approx(a * integrate_grid(path, f) + b * integrate_grid(path, g), abs=1e-10)


def test_zero_integrand_and_zero_measure(rad):
    assert integrate_rademacher(rad, constant(0.0)) == 0.0
    flat = PathSample(np.linspace(0, 1, 9), np.zeros(9))
    assert integrate_grid(flat, sine(1.0)) == 0.0


def test_trig_moments_fft_matches_direct_sums():
    path = sample_path(SMModelSpec("wiener", T=2 * math.pi), RngStream(2), 1024)
    cos_m, sin_m = trig_moments(path, 40)
    for k in (0, 1, 17, 40):
        assert cos_m[k] == pytest.approx(integrate_grid(path, lambda s: np.cos(k * s)), abs=1e-11)
        assert sin_m[k] == pytest.approx(integrate_grid(path, lambda s: np.sin(k * s)), abs=1e-11)


def test_trig_moments_general_horizon():
    path = sample_path(SMModelSpec("wiener", T=3.0), RngStream(2), 300)
    cos_m, sin_m = trig_moments(path, 5)
    assert sin_m[5] == pytest.approx(integrate_grid(path, lambda s: np.sin(5 * s)), abs=1e-12)


def test_step_function_exact_and_grid(rad):
    b, lv = [0.0, 0.5, 1.25, 2.0], [1.0, -2.0, 0.5]
    exact = integrate_step_function(rad, b, lv)
    assert exact == pytest.approx(sum(l * rad.interval_measure(lo, hi) for l, lo, hi in zip(lv, b[:-1], b[1:])), abs=1e-15)
    path = sample_path(SMModelSpec("rademacher", K=128, T=2.0), RngStream(17), 2**12)
    assert integrate_step_function(path, b, lv) == pytest.approx(exact, abs=1e-12)


def test_snap_distance():
    path = sample_path(SMModelSpec("lebesgue"), RngStream(0), 10)
    idx, dist = snap_to_grid(path, [0.0, 0.33, 1.0])
    assert idx.tolist() == [0, 3, 10]
    assert dist == pytest.approx(0.03)


def test_step_function_validation(rad):
    with pytest.raises(DomainError):
        integrate_step_function(rad, [0.0, 0.5, 0.4], [1.0, 1.0])
    with pytest.raises(DomainError):
        integrate_step_function(rad, [0.0, 0.5], [1.0, 1.0])
    with pytest.raises(DomainError):
        integrate_step_function(rad, [0.0, 3.0], [1.0])


def test_set_outside_horizon(rad):
    with pytest.raises(DomainError):
        integrate_rademacher(rad, constant(1.0), (0.0, 2.5))


@pytest.mark.parametrize("name, params, x, value", [
    ("const", (2.0,), 0.3, 2.0),
    ("x", (), 0.3, 0.3),
    ("zero", (), 0.3, 0.0),
    ("sin", (2.0,), 0.3, math.sin(0.6)),
    ("cos", (1.0,), 0.3, math.cos(0.3)),
    ("poly", (1.0, 0.0, 2.0), 0.5, 1.5),
    ("indicator", (0.2, 0.4), 0.3, 1.0),
    ("indicator", (0.2, 0.4), 0.2, 0.0),
])
def test_catalogue(name, params, x, value):
    assert float(catalogue_integrand(name, *params)(x)) == pytest.approx(value)


def test_catalogue_unknown():
    with pytest.raises(DomainError):
        catalogue_integrand("bessel")


def test_non_vectorized_integrand():
    f = IntegrandSpec(lambda x: x * x if x < 0.5 else 0.0, vectorized=False)
    np.testing.assert_allclose(f(np.array([0.25, 0.75])), [0.0625, 0.0])


def test_dispatch(rad):
    path = sample_path(SMModelSpec("lebesgue"), RngStream(0), 8)
    assert integrate(LebesgueMeasure(1.0), constant(1.0)) == pytest.approx(1.0)
    assert integrate(path, constant(1.0)) == pytest.approx(1.0)
    assert integrate(rad, indicator(0.0, 2.0)) == pytest.approx(rad.interval_measure(0.0, 2.0), abs=1e-8)
    with pytest.raises(TypeError):
        integrate(object(), constant(1.0))
