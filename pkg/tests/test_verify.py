import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from smpath.errors import DomainError
from smpath.integrate import IntegrandSpec, catalogue_integrand, constant, polynomial
from smpath.models import PathSample, SMModelSpec, sample_path
from smpath.rng import RngStream
from smpath.verify import (FunctionFamily, PASS_RULES, VerificationReport, cubic_increment_check,
                           cubic_increment_integral, exp_moment_constant, exp_moment_sharpness,
                           holder_bound_check, paley_zygmund_check, pz_exact_probability, resolve_threads,
                           signed_sums, sine_family, sum_squares_check, zero_family)

TWO_PI = 2 * math.pi


@pytest.mark.parametrize("lambdas, prob", [
    ([1.0], 1.0),
    ([1.0, 1.0], 0.5),
    ([1.0, 1.0, 1.0], 1.0),
    ([3.0, 1.0], 1.0),
    ([1.0, 1.0, 1.0, 1.0], 10 / 16),  # threshold 1; only the 6 zero sums miss it
])
def test_pz_enumeration(lambdas, prob):
    assert pz_exact_probability(lambdas) == prob


def test_signed_sums_enumerates_all_patterns():
    s = signed_sums([1.0, 2.0, 4.0])
    assert sorted(s.tolist()) == [-7, -5, -3, -1, 1, 3, 5, 7]


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(-10, 10, allow_nan=False), min_size=1, max_size=12))
def test_pz_bound_holds(lambdas):
    assert pz_exact_probability(lambdas) >= 1 / 8


def test_pz_monte_carlo_close_to_exact():
    lam = np.array([0.3, 1.2, -0.7, 2.0, 0.1, 0.9])
    rep = paley_zygmund_check(lam, 20000, RngStream(5))
    # binomial sd at 20000 draws is below 0.004
    assert rep.statistics["probability_estimate"] == pytest.approx(rep.statistics["probability_exact"], abs=0.02)
    assert rep.passed and rep.recompute_pass()


def test_pz_random_weights_and_limits():
    rep = paley_zygmund_check(m=5, stream=RngStream(2), replicates=100)
    assert rep.statistics["m"] == 5 and "probability_exact" in rep.statistics
    with pytest.raises(DomainError):
        pz_exact_probability(np.ones(21))
    with pytest.raises(DomainError):
        paley_zygmund_check()


def test_zero_family():
    rep = sum_squares_check(SMModelSpec("wiener", T=TWO_PI), zero_family(), [4, 16], 8, RngStream(0), 256)
    assert rep.statistics["quantiles"] == [0.0, 0.0]
    assert rep.passed


def test_lebesgue_sine_family_vanishes():
    rep = sum_squares_check(SMModelSpec("lebesgue", T=TWO_PI), sine_family(), [64, 1024], 2, RngStream(0), 2**14)
    assert max(rep.statistics["quantiles"]) < 1e-25


def test_generic_family_matches_trig_route():
    spec = SMModelSpec("wiener", T=TWO_PI)
    sine = sine_family()
    generic = FunctionFamily("sine-generic", sine.evaluate, sine.bound)
    a = sum_squares_check(spec, sine, [8, 32], 4, RngStream(3), 1024)
    b = sum_squares_check(spec, generic, [8, 32], 4, RngStream(3), 1024)
    np.testing.assert_allclose(a.per_replicate["T_32"], b.per_replicate["T_32"], rtol=1e-10)


def test_family_without_bound_rejected():
    with pytest.raises(DomainError):
        sum_squares_check(SMModelSpec("wiener"), FunctionFamily("raw", sine_family().evaluate, None), [1, 2], 1)


def test_sum_squares_thread_independent():
    spec = SMModelSpec("wiener", T=TWO_PI)
    a = sum_squares_check(spec, sine_family(), [16, 64], 12, RngStream(9), 1024, threads=1)
    b = sum_squares_check(spec, sine_family(), [16, 64], 12, RngStream(9), 1024, threads=4)
    assert a.to_json() == b.to_json()


def test_cubic_integral_lebesgue():
    path = sample_path(SMModelSpec("lebesgue", T=1.2), RngStream(0), 2**14)
    assert cubic_increment_integral(path, 1.0, 0.1) == pytest.approx(0.01, abs=1e-12)


def test_cubic_integral_zero_path():
    flat = PathSample(np.linspace(0, 2, 2049), np.zeros(2049))
    assert cubic_increment_integral(flat, 1.0, 0.05) == 0.0


def test_cubic_check_constant_and_limits():
    rep = cubic_increment_check(SMModelSpec("lebesgue", T=1.1), 1.0, (0.08, 0.04), 2, RngStream(0), 2**12)
    np.testing.assert_allclose(rep.statistics["medians"], [0.08**2, 0.04**2], atol=1e-12)
    assert rep.passed
    with pytest.raises(DomainError):
        cubic_increment_check(SMModelSpec("lebesgue", T=1.0), 1.0, (0.04,), 1)
    with pytest.raises(DomainError):
        cubic_increment_check(SMModelSpec("lebesgue", T=1.1), 1.0, (0.01,), 1, grid_size=256)


@pytest.mark.parametrize("k, lam, C, u", [
    (1, 1.0, 0.530738, 1.442695),
    (1, 1 / math.log(2), math.exp(-1), 1.0),
    (8, 1.0, 4.037, 3 / math.log(2)),
])
def test_exp_moment_constant(k, lam, C, u):
    got = exp_moment_constant(k, lam)
    assert got.C == pytest.approx(C, abs=1e-3 if k == 8 else 1e-6)
    assert got.u_star == pytest.approx(u, abs=1e-6)


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 100), st.floats(0.05, 5.0), st.floats(0.0, 200.0))
def test_exp_moment_bound(k, lam, u):
    C, u_star, m = exp_moment_constant(k, lam)
    assert u**m <= C * 2 ** (lam * u) * (1 + 1e-12)


def test_exp_moment_sharpness():
    rep = exp_moment_sharpness(8, 0.5, points=2**16 + 1)
    assert rep.passed
    assert rep.statistics["relative_error"] <= 1e-9


@pytest.mark.parametrize("f, k, lhs, rhs", [
    (constant(0.0), 1, 0.0, 0.0),
    (constant(1.0), 1, 1.0, 2.0),
    (polynomial([0, 1], upper=1.0), 8, 2 / 3, 4 * 0.25 ** (1 / 3)),
])
def test_holder_examples(f, k, lhs, rhs):
    rep = holder_bound_check(f, k, 1.0)
    assert rep.statistics["lhs"] == pytest.approx(lhs, abs=1e-9)
    assert rep.statistics["rhs"] == pytest.approx(rhs, abs=1e-9)
    assert rep.passed


def test_holder_equality_on_grid():
    # f(x) = 2x reaches u* = 1 / ln 2 at interior grid points for lam = 1, k = 1
    u_star = 1 / math.log(2)
    f = IntegrandSpec(lambda x: u_star * np.round(x * 4) / 2, "u* steps", 2 * u_star)
    rep = holder_bound_check(f, 1, 1.0)
    assert rep.statistics["grid_points_at_u_star"] > 0
    assert rep.passed


def test_holder_needs_bound():
    with pytest.raises(DomainError):
        holder_bound_check(IntegrandSpec(np.sin), 1, 1.0)


def test_report_roundtrip_and_rules():
    rep = paley_zygmund_check([1.0, 1.0])
    assert rep.to_json() == paley_zygmund_check([1.0, 1.0]).to_json()
    assert rep.to_dict()["pass"] is True
    broken = VerificationReport("paley_zygmund", {}, 0, {"probability": 0.1}, {"min_probability": 0.125}, True)
    assert broken.recompute_pass() is False
    assert set(PASS_RULES) == {"paley_zygmund", "sum_squares", "cubic_increment", "exp_moment_sharpness",
                               "holder_bound"}


def test_resolve_threads(monkeypatch):
    monkeypatch.setenv("SMPATH_THREADS", "3")
    assert resolve_threads() == 3
    assert resolve_threads(2) == 2
    with pytest.raises(DomainError):
        resolve_threads(0)
