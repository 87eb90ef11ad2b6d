"""Integrals of deterministic functions against stochastic measures.

Three routes, depending on what is known about the measure:

* exact measures (:class:`~smpath.models.RademacherRealization`,
  :class:`~smpath.models.LebesgueMeasure`): the defining series is
  integrated term by term with singularity-removing quadrature;
* grid samples (:class:`~smpath.models.PathSample`): left-tagged
  Riemann-Stieltjes sums ``sum_j f(t_j) (mu(t_{j+1}) - mu(t_j))``;
* step functions: exact interval measures, or grid differences after
  snapping breakpoints to the nearest grid point.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .errors import DomainError
from .models import LebesgueMeasure, PathSample, RademacherRealization
from .quadrature import (DEFAULT_QUADRATURE, QuadratureConfig, adaptive_gk,
                         singular_weight_quadrature_batch)

log = logging.getLogger(__name__)

ExactMeasure = Union[RademacherRealization, LebesgueMeasure]


@dataclass(frozen=True)
class IntegrandSpec:
    """A deterministic integrand.

    ``evaluator`` must accept numpy arrays unless ``vectorized`` is False;
    ``bound`` is an optional known bound on sup |f| over the domain of use.
    """

    evaluator: Callable
    description: str = ""
    bound: Optional[float] = None
    vectorized: bool = True

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        fn = self.evaluator if self.vectorized else np.vectorize(self.evaluator, otypes=[float])
        return np.broadcast_to(np.asarray(fn(x), dtype=float), x.shape)

    def __add__(self, other: "IntegrandSpec") -> "IntegrandSpec":
        bound = None if self.bound is None or other.bound is None else self.bound + other.bound
        return IntegrandSpec(lambda x: self(x) + other(x),
                             f"({self.description}) + ({other.description})", bound)

    def scaled(self, c: float) -> "IntegrandSpec":
        bound = None if self.bound is None else abs(c) * self.bound
        return IntegrandSpec(lambda x: c * self(x), f"{c!r} * ({self.description})", bound)

    def truncated(self, level: float) -> "IntegrandSpec":
        """f * 1{|f| <= level}."""
        return IntegrandSpec(lambda x: np.where(np.abs(self(x)) <= level, self(x), 0.0),
                             f"({self.description}) * 1{{|.| <= {level!r}}}",
                             None if self.bound is None else min(self.bound, level))


def as_integrand(f) -> IntegrandSpec:
    return f if isinstance(f, IntegrandSpec) else IntegrandSpec(f)


# -- named catalogue ---------------------------------------------------------

def constant(value: float = 1.0) -> IntegrandSpec:
    return IntegrandSpec(lambda x: np.full_like(x, value, dtype=float), f"{value!r}", abs(value))


def polynomial(coefficients: Sequence[float], upper: Optional[float] = None) -> IntegrandSpec:
    """sum_i coefficients[i] x^i; the bound is filled in when the domain [0, upper] is given."""
    coef = [float(c) for c in coefficients]
    bound = None
    if upper is not None:
        bound = sum(abs(c) * upper ** i for i, c in enumerate(coef))
    desc = " + ".join(f"{c!r}*x^{i}" for i, c in enumerate(coef)) or "0"
    return IntegrandSpec(lambda x: np.polynomial.polynomial.polyval(x, coef) + 0.0 * x, desc, bound)


def sine(k: float = 1.0, scale: float = 1.0) -> IntegrandSpec:
    return IntegrandSpec(lambda x: scale * np.sin(k * x), f"{scale!r}*sin({k!r} x)", abs(scale))


def cosine(k: float = 1.0, scale: float = 1.0, shift: float = 0.0) -> IntegrandSpec:
    """scale * (cos(k x) + shift)"""
    return IntegrandSpec(lambda x: scale * (np.cos(k * x) + shift),
                         f"{scale!r}*(cos({k!r} x) + {shift!r})", abs(scale) * (1 + abs(shift)))


def indicator(a: float, b: float) -> IntegrandSpec:
    """1 on (a, b]."""
    return IntegrandSpec(lambda x: ((x > a) & (x <= b)).astype(float), f"1_({a!r}, {b!r}]", 1.0)


CATALOGUE = {
    "const": constant,
    "poly": polynomial,
    "sin": sine,
    "cos": cosine,
    "indicator": indicator,
}


def catalogue_integrand(name: str, *params: float) -> IntegrandSpec:
    """Build a catalogue integrand, e.g. ``catalogue_integrand("sin", 3)``.

    ``"x"`` carries its sup bound over [0, 1]; the other bounds hold everywhere.
    """
    if name == "x":
        return polynomial([0.0, 1.0], upper=1.0)
    if name == "zero":
        return constant(0.0)
    try:
        factory = CATALOGUE[name]
    except KeyError:
        raise DomainError(f"unknown integrand {name!r}; choose from {sorted(CATALOGUE) + ['x', 'zero']}")
    if name == "poly":
        return polynomial(params)
    return factory(*params)


# -- exact measures ------------------------------------------------------------

def _unit_interval(A, T: float) -> tuple[float, float]:
    a, b = (0.0, T) if A is None else (float(A[0]), float(A[1]))
    if not (0.0 <= a <= b <= T):
        raise DomainError(f"integration set ({a}, {b}] must lie in (0, {T}]")
    return a / T, b / T


def series_integral(coefficients, T: float, f, A=None,
                    q: QuadratureConfig = DEFAULT_QUADRATURE) -> float:
    """``sum_k coefficients[k-1] k^(-4/3) int_{A/T} f(T x) x^(c_k - 1) dx``.

    With coefficients equal to a sign sequence this is the integral against a
    Rademacher realization; arbitrary coefficients give linear combinations of
    realizations (e.g. the sum of two measures).
    """
    coefficients = np.asarray(coefficients, dtype=float)
    f = as_integrand(f)
    xa, xb = _unit_interval(A, T)
    k = np.arange(1, coefficients.size + 1, dtype=float)
    active = np.flatnonzero(coefficients)
    if active.size == 0 or xa == xb:
        return 0.0
    c = np.power(k[active], -1.0 / 3.0)
    weight = coefficients[active] * np.power(k[active], -4.0 / 3.0)
    # term j to abs_tol / |weight_j|: the weighted errors then sum to <= K * abs_tol
    terms = singular_weight_quadrature_batch(lambda x: f(T * x), c, xa, xb, q,
                                             tolerances=q.abs_tol / np.abs(weight))
    return float(np.dot(weight, terms))


def integrate_rademacher(r: RademacherRealization, f, A=None,
                         q: QuadratureConfig = DEFAULT_QUADRATURE) -> float:
    """Integral of f over A = (a, b] against a Rademacher realization.

    Absolute error is at most ``r.K * q.abs_tol``.
    """
    return series_integral(r.signs, r.T, f, A, q)


def integrate_lebesgue(m: LebesgueMeasure, f, A=None,
                       q: QuadratureConfig = DEFAULT_QUADRATURE) -> float:
    f = as_integrand(f)
    a, b = (0.0, m.T) if A is None else (float(A[0]), float(A[1]))
    if not (0.0 <= a <= b <= m.T):
        raise DomainError(f"integration set ({a}, {b}] must lie in (0, {m.T}]")
    return float(adaptive_gk(lambda x, ids: f(x), [a], [b], q.abs_tol, q.max_subdivisions)[0])


# -- grid samples -------------------------------------------------------------

def integrate_grid(path: PathSample, f) -> float:
    """Left-tagged Riemann-Stieltjes sum of f against the sampled path."""
    f = as_integrand(f)
    tags = f(path.grid[:-1])
    return float(np.dot(tags, path.increments()))


def trig_moments(path: PathSample, K: int) -> tuple[np.ndarray, np.ndarray]:
    """Left-tagged sums of cos(ks) and sin(ks) against the path, k = 0..K.

    Identical to :func:`integrate_grid` with trigonometric integrands.  When the
    grid spans exactly [0, 2 pi] the sums are one FFT of the increments.
    """
    dmu = path.increments()
    n = dmu.size
    if math.isclose(path.T, 2 * math.pi, rel_tol=1e-12):
        spec = np.fft.fft(dmu)
        idx = np.arange(K + 1) % n
        # sum_j dmu_j exp(+i k t_j) = conj(fft)[k] since t_j = 2 pi j / n
        return spec.real[idx].copy(), -spec.imag[idx]
    k = np.arange(K + 1, dtype=float)
    cos_m = np.empty(K + 1)
    sin_m = np.empty(K + 1)
    tags = path.grid[:-1]
    rows = max(1, (1 << 22) // n)
    for start in range(0, K + 1, rows):
        phase = np.outer(k[start:start + rows], tags)
        cos_m[start:start + rows] = np.cos(phase) @ dmu
        sin_m[start:start + rows] = np.sin(phase) @ dmu
    return cos_m, sin_m


# -- step functions -----------------------------------------------------------

def snap_to_grid(path: PathSample, points) -> tuple[np.ndarray, float]:
    """Nearest grid indices for ``points`` and the largest snap distance."""
    points = np.asarray(points, dtype=float)
    idx = np.clip(np.rint(points / path.step).astype(int), 0, path.n)
    return idx, float(np.max(np.abs(path.grid[idx] - points), initial=0.0))


def integrate_step_function(source, breakpoints, levels) -> float:
    """sum_i levels[i] * mu((b_i, b_{i+1}]).

    Exact measures use their closed-form interval measures; paths use grid
    differences at breakpoints snapped to the nearest grid point (the snap
    distance is logged).
    """
    b = np.asarray(breakpoints, dtype=float)
    levels = np.asarray(levels, dtype=float)
    if b.ndim != 1 or b.size < 2 or np.any(np.diff(b) <= 0):
        raise DomainError("breakpoints must be strictly increasing with at least two entries")
    if levels.shape != (b.size - 1,):
        raise DomainError(f"need {b.size - 1} levels, got {levels.size}")
    T = source.T
    if b[0] < 0 or b[-1] > T:
        raise DomainError(f"breakpoints must lie in [0, {T}]")

    if isinstance(source, PathSample):
        idx, snap = snap_to_grid(source, b)
        if snap > 0:
            log.info("step function breakpoints snapped to grid, max distance %.3g", snap)
        pieces = source.values[idx[1:]] - source.values[idx[:-1]]
    else:
        pieces = np.array([source.interval_measure(lo, hi) for lo, hi in zip(b[:-1], b[1:])])
    return float(np.dot(levels, pieces))


def integrate(source, f, A=None, q: QuadratureConfig = DEFAULT_QUADRATURE) -> float:
    """Dispatch on the source type (exact measure or path)."""
    if isinstance(source, RademacherRealization):
        return integrate_rademacher(source, f, A, q)
    if isinstance(source, LebesgueMeasure):
        return integrate_lebesgue(source, f, A, q)
    if isinstance(source, PathSample):
        if A is not None:
            raise DomainError("grid integrals run over the whole path")
        return integrate_grid(source, f)
    raise TypeError(f"cannot integrate against {type(source).__name__}")
