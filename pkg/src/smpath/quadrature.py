"""Adaptive Gauss-Kronrod (7/15) quadrature, batched over many integrals.

All integrals in a batch are refined together: every pass evaluates the
integrand once on the 15 Kronrod nodes of every pending segment, accepts the
segments whose error estimate fits their share of the tolerance and bisects
the rest.  The estimate is QUADPACK's rescaled |K15 - G7|.  A segment of length ``len`` in a problem on ``[lo, hi]`` with tolerance
``tol`` is accepted when its error estimate is at most ``tol * len / (hi - lo)``,
so the accepted errors of one problem sum to at most ``tol``.  Segments whose
error is already at round-off level are accepted as they are, so tolerances
below round-off are not honoured.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DomainError, QuadratureError

_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

NODES = np.concatenate((-_XGK[:-1], _XGK[::-1]))
KRONROD_WEIGHTS = np.concatenate((_WGK[:-1], _WGK[::-1]))
# Gauss nodes are the odd-indexed Kronrod nodes (0.949..., 0.741..., ...)
GAUSS_WEIGHTS = np.zeros(15)
GAUSS_WEIGHTS[[1, 3, 5]] = _WG[:3]
GAUSS_WEIGHTS[7] = _WG[3]
GAUSS_WEIGHTS[[9, 11, 13]] = _WG[2::-1]

_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class QuadratureConfig:
    abs_tol: float = 1e-10
    max_subdivisions: int = 2 ** 20

    def __post_init__(self):
        if not self.abs_tol > 0:
            raise ValueError(f"abs_tol must be positive, got {self.abs_tol}")
        if self.max_subdivisions < 1:
            raise ValueError("max_subdivisions must be at least 1")


DEFAULT_QUADRATURE = QuadratureConfig()


def _qk15_error(fx, half, k15, g7):
    """QUADPACK's qk15 error estimate: |K15 - G7| rescaled by the integrand's spread."""
    mean = 0.5 * k15 / np.where(half != 0, half, 1.0)
    absh = np.abs(half)
    resabs = absh * (np.abs(fx) @ KRONROD_WEIGHTS)
    resasc = absh * (np.abs(fx - mean[:, None]) @ KRONROD_WEIGHTS)
    raw = np.abs(k15 - g7)
    safe = np.where(resasc > 0, resasc, 1.0)
    scaled = np.where((resasc > 0) & (raw > 0), resasc * np.minimum(1.0, (200.0 * raw / safe) ** 1.5), raw)
    floor = 50.0 * _EPS * resabs
    return np.maximum(scaled, floor), scaled <= floor


def adaptive_gk(func: Callable[[np.ndarray, np.ndarray], np.ndarray],
                lo, hi, tol, max_subdivisions: int = 2 ** 20) -> np.ndarray:
    """Integrate a batch of problems ``int_{lo[i]}^{hi[i]} func(x, i) dx``.

    ``func`` receives nodes of shape (m, 15) and problem ids of shape (m,)
    and must return values of shape (m, 15).  ``tol`` is the absolute
    tolerance per problem (scalar or array).  Raises QuadratureError when one
    problem needs more than ``max_subdivisions`` bisections.
    """
    lo, hi, tol = np.broadcast_arrays(np.atleast_1d(np.asarray(lo, dtype=float)),
                                      np.asarray(hi, dtype=float), np.asarray(tol, dtype=float))
    P = lo.size
    total = np.zeros(P)
    errors = np.zeros(P)
    length = hi - lo
    density = np.where(length > 0, tol / np.where(length > 0, length, 1.0), 0.0)

    ids = np.flatnonzero(length != 0)
    a, b = lo[ids], hi[ids]
    splits = np.zeros(P, dtype=np.int64)
    while ids.size:
        mid = 0.5 * (a + b)
        half = 0.5 * (b - a)
        x = mid[:, None] + half[:, None] * NODES[None, :]
        fx = np.asarray(func(x, ids), dtype=float)
        fx = np.broadcast_to(fx, x.shape)
        if not np.all(np.isfinite(fx)):
            raise QuadratureError("integrand is not finite on the integration interval",
                                  float("nan"), float("inf"))
        k15 = half * (fx @ KRONROD_WEIGHTS)
        g7 = half * (fx @ GAUSS_WEIGHTS)
        err, at_roundoff = _qk15_error(fx, half, k15, g7)
        done = ((err <= density[ids] * (b - a))
                | at_roundoff
                | (np.abs(half) <= 4 * _EPS * np.maximum(np.abs(mid), 1.0)))
        np.add.at(total, ids[done], k15[done])
        np.add.at(errors, ids[done], err[done])

        pending = ~done
        np.add.at(splits, ids[pending], 1)
        if pending.any() and splits.max() > max_subdivisions:
            np.add.at(total, ids[pending], k15[pending])
            np.add.at(errors, ids[pending], err[pending])
            worst = int(np.argmax(errors))
            raise QuadratureError("tolerance not reached within the subdivision budget",
                                  float(total[worst]), float(errors[worst]))
        ids = np.repeat(ids[pending], 2)
        left, right, m = a[pending], b[pending], mid[pending]
        a = np.column_stack((left, m)).ravel()
        b = np.column_stack((m, right)).ravel()
    return total


def singular_weight_quadrature_batch(f: Callable[[np.ndarray], np.ndarray], exponents,
                                     a: float, b: float,
                                     q: QuadratureConfig = DEFAULT_QUADRATURE,
                                     tolerances=None) -> np.ndarray:
    """``int_a^b f(x) x^(c-1) dx`` for every c in ``exponents``.

    Uses u = x^c, turning each integral into ``(1/c) int_{a^c}^{b^c} f(u^(1/c)) du``,
    which has no endpoint singularity.  Each entry is accurate to ``q.abs_tol``,
    or to the matching entry of ``tolerances`` when given.
    """
    c = np.atleast_1d(np.asarray(exponents, dtype=float))
    if not (0.0 <= a <= b <= 1.0):
        raise DomainError(f"need 0 <= a <= b <= 1, got ({a}, {b})")
    if np.any(c <= 0) or np.any(c > 1):
        raise DomainError("exponents must lie in (0, 1]")
    inv = 1.0 / c

    def g(u, ids):
        return f(np.power(u, inv[ids][:, None]))

    tol = q.abs_tol if tolerances is None else np.asarray(tolerances, dtype=float)
    raw = adaptive_gk(g, np.power(a, c), np.power(b, c), tol * c, q.max_subdivisions)
    return raw * inv


def singular_weight_quadrature(f: Callable[[np.ndarray], np.ndarray], c: float,
                               a: float, b: float,
                               q: QuadratureConfig = DEFAULT_QUADRATURE) -> float:
    return float(singular_weight_quadrature_batch(f, [c], a, b, q)[0])


def quad(f: Callable[[np.ndarray], np.ndarray], a: float, b: float,
         q: QuadratureConfig = DEFAULT_QUADRATURE) -> float:
    """Plain adaptive integral of a vectorized function over [a, b]."""
    return float(adaptive_gk(lambda x, ids: f(x), [a], [b], q.abs_tol, q.max_subdivisions)[0])
