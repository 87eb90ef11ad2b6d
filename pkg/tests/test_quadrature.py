import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from smpath.errors import DomainError, QuadratureError
from smpath.quadrature import (GAUSS_WEIGHTS, KRONROD_WEIGHTS, NODES, QuadratureConfig, adaptive_gk, quad,
                               singular_weight_quadrature, singular_weight_quadrature_batch)


def test_rule_weights():
    assert KRONROD_WEIGHTS.sum() == pytest.approx(2.0, abs=1e-15)
    assert GAUSS_WEIGHTS.sum() == pytest.approx(2.0, abs=1e-15)
    # K15 is exact for degree 22, G7 for degree 13
    assert KRONROD_WEIGHTS @ NODES ** 22 == pytest.approx(2 / 23, abs=1e-15)
    assert GAUSS_WEIGHTS @ NODES ** 12 == pytest.approx(2 / 13, abs=1e-15)


@pytest.mark.parametrize("f, a, b, exact", [
    (lambda x: x ** 5, 0.0, 1.0, 1 / 6),
    (np.sin, 0.0, math.pi, 2.0),
    (lambda x: np.sqrt(x), 0.0, 1.0, 2 / 3),
    (lambda x: np.abs(x - 1 / 3), 0.0, 1.0, (1 / 3) ** 2 / 2 + (2 / 3) ** 2 / 2),
    (np.exp, -1.0, 2.0, math.exp(2) - math.exp(-1)),
])
def test_quad(f, a, b, exact):
    assert quad(f, a, b) == pytest.approx(exact, abs=1e-10)


def test_batched_problems_are_independent():
    k = np.arange(1, 40, dtype=float)
    got = adaptive_gk(lambda x, ids: np.sin(k[ids][:, None] * x), np.zeros(k.size), math.pi, 1e-12)
    np.testing.assert_allclose(got, (1 - np.cos(k * math.pi)) / k, atol=1e-11)


def test_zero_length_problem():
    assert adaptive_gk(lambda x, ids: x, [1.0, 0.0], [1.0, 2.0], 1e-12).tolist() == pytest.approx([0.0, 2.0])


@settings(max_examples=40, deadline=None)
@given(st.floats(0.05, 1.0))
def test_singular_power(c):
    # int_0^1 x^(c-1) dx = 1/c and int_0^1 x * x^(c-1) dx = 1/(c+1)
    assert singular_weight_quadrature(np.ones_like, c, 0.0, 1.0) == pytest.approx(1 / c, abs=1e-9)
    assert singular_weight_quadrature(lambda x: x, c, 0.0, 1.0) == pytest.approx(1 / (c + 1), abs=1e-9)


def test_singular_exponential_series():
    # int_0^1 e^x x^(c-1) dx = sum_n 1 / (n! (n + c))
    c = 0.2
    exact = sum(1 / (math.factorial(n) * (n + c)) for n in range(30))
    assert singular_weight_quadrature(np.exp, c, 0.0, 1.0) == pytest.approx(exact, abs=1e-10)


def test_singular_subinterval_batch():
    c = np.array([1.0, 0.5, 0.25])
    got = singular_weight_quadrature_batch(np.ones_like, c, 0.2, 0.7)
    np.testing.assert_allclose(got, (0.7 ** c - 0.2 ** c) / c, atol=1e-12)


@pytest.mark.parametrize("c", [0.0, -0.5, 1.5])
def test_singular_rejects_bad_exponents(c):
    with pytest.raises(DomainError):
        singular_weight_quadrature(np.ones_like, c, 0.0, 1.0)


def test_budget_exhaustion_reports_estimate():
    cfg = QuadratureConfig(abs_tol=1e-13, max_subdivisions=2)
    with pytest.raises(QuadratureError) as info:
        quad(lambda x: np.sin(1 / (x + 1e-3)), 0.0, 1.0, cfg)
    assert math.isfinite(info.value.estimate)


def test_nonfinite_integrand():
    with pytest.raises(QuadratureError):
        quad(lambda x: np.where(x > 0.5, np.inf, 0.0), 0.0, 1.0)


def test_config_validation():
    with pytest.raises(ValueError):
        QuadratureConfig(abs_tol=0.0)
