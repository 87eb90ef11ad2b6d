"""Fourier expansion of mu(t) = mu((0, t]) on [0, 2 pi].

Coefficients are computed two ways:

* by parts, as integrals of trigonometric functions against the measure:
  ``xi_k = -(1/(k pi)) int sin(ks) dmu``, ``eta_k = (1/(k pi)) int (cos(ks) - 1) dmu``,
  ``xi_0 = 2 mu((0, 2pi]) - (1/pi) int s dmu``;
* directly, as trapezoid integrals of the sampled path against cos and sin.

The two agree in the limit of fine grids, which is the main cross-check of
this module.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from .besov import fit_log2_slope
from .errors import DomainError
from .integrate import integrate_grid, integrate_lebesgue, series_integral, trig_moments
from .models import LebesgueMeasure, PathSample, RademacherRealization
from .quadrature import DEFAULT_QUADRATURE, QuadratureConfig, adaptive_gk

TWO_PI = 2.0 * math.pi
BY_PARTS = "ByParts"
DIRECT = "Direct"
DEFAULT_INTERIOR_MARGIN = 0.5

# problems per batched quadrature call
_BATCH_PROBLEMS = 1 << 16


@dataclass(frozen=True, eq=False)
class FourierCoefficients:
    """xi_0..xi_K and eta_1..eta_K of one realization."""

    xi: np.ndarray
    eta: np.ndarray
    method: str
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        xi = np.array(self.xi, dtype=float)
        eta = np.array(self.eta, dtype=float)
        if xi.ndim != 1 or xi.size < 1 or eta.shape != (xi.size - 1,):
            raise DomainError(f"need K+1 xi and K eta values, got {xi.size} and {eta.size}")
        if self.method not in (BY_PARTS, DIRECT):
            raise DomainError(f"unknown method {self.method!r}")
        xi.setflags(write=False)
        eta.setflags(write=False)
        object.__setattr__(self, "xi", xi)
        object.__setattr__(self, "eta", eta)

    @property
    def K(self) -> int:
        return self.eta.size

    def energy(self, n: Optional[int] = None) -> float:
        """sum_{1 <= k <= n} (xi_k^2 + eta_k^2)."""
        n = self.K if n is None else n
        return float(np.sum(self.xi[1:n + 1] ** 2) + np.sum(self.eta[:n] ** 2))

    def cumulative_energy(self) -> np.ndarray:
        return np.cumsum(self.xi[1:] ** 2 + self.eta ** 2)

    def __add__(self, other: "FourierCoefficients") -> "FourierCoefficients":
        if other.K != self.K:
            raise DomainError("coefficient sets differ in K")
        return FourierCoefficients(self.xi + other.xi, self.eta + other.eta, self.method,
                                   {"sum_of": [self.provenance, other.provenance]})


def _provenance(source, **extra) -> dict:
    out = {}
    if isinstance(source, PathSample):
        out["source"] = "path"
        out["grid_intervals"] = source.n
        if source.model is not None:
            out["model"] = source.model.to_dict()
        if source.stream is not None:
            out["seed"] = source.stream.seed
            out["stream_index"] = source.stream.index
    elif isinstance(source, RademacherRealization):
        out["source"] = "rademacher"
        out["terms"] = source.K
    elif isinstance(source, LebesgueMeasure):
        out["source"] = "lebesgue"
    out.update(extra)
    return out


def _check_horizon(T: float) -> None:
    if not math.isclose(T, TWO_PI, rel_tol=1e-9):
        raise DomainError(f"Fourier expansions need the horizon T = 2 pi, got {T}")


def _rademacher_trig(r: RademacherRealization, K: int, q: QuadratureConfig) -> tuple[np.ndarray, np.ndarray]:
    """int sin(ks) dmu and int (cos(ks) - 1) dmu for k = 1..K, batched over (k, term).

    Term j is integrated to abs_tol / weight_j, so each integral is within
    K * abs_tol, as for :func:`~smpath.integrate.integrate_rademacher`.
    """
    T = r.T
    c = r.exponents
    inv_c = 1.0 / c
    weight = r.signs * r.weights
    sin_int = np.empty(K)
    cos_int = np.empty(K)
    freqs_per_call = max(1, _BATCH_PROBLEMS // (2 * r.K))
    for start in range(1, K + 1, freqs_per_call):
        ks = np.arange(start, min(K, start + freqs_per_call - 1) + 1, dtype=float)
        m = ks.size
        # problem layout: [kind (sin, cos-1)] x [frequency] x [term]
        prob_k = np.tile(np.repeat(ks, r.K), 2)
        prob_term = np.tile(np.arange(r.K), 2 * m)
        is_sin = np.repeat([True, False], m * r.K)

        def g(u, ids):
            s = T * np.power(u, inv_c[prob_term[ids]][:, None])
            phase = prob_k[ids][:, None] * s
            half = np.sin(0.5 * phase)
            return np.where(is_sin[ids][:, None], np.sin(phase), -2.0 * half * half)

        raw = adaptive_gk(g, 0.0, 1.0, q.abs_tol * c[prob_term] / r.weights[prob_term], q.max_subdivisions)
        raw = (raw * inv_c[prob_term]).reshape(2, m, r.K)
        sin_int[start - 1:start - 1 + m] = raw[0] @ weight
        cos_int[start - 1:start - 1 + m] = raw[1] @ weight
    return sin_int, cos_int


_LAGUERRE = np.polynomial.laguerre.laggauss(48)


def _rademacher_trig_contour(r: RademacherRealization, K: int) -> tuple[np.ndarray, np.ndarray]:
    """Same integrals as :func:`_rademacher_trig`, by rotating the contour.

    For w > 0 and 0 < c <= 1,
    ``int_0^1 e^(iwx) x^(c-1) dx = Gamma(c) w^(-c) e^(i pi c / 2) - i e^(iw) int_0^inf e^(-wy) (1 + iy)^(c-1) dy``;
    the last integral has a smooth, exponentially damped integrand and is
    evaluated with 48-point Gauss-Laguerre.
    """
    c = r.exponents
    weight = r.signs * r.weights
    gamma_c = np.array([math.gamma(v) for v in c])
    z, w = _LAGUERRE
    sin_int = np.empty(K)
    cos_int = np.empty(K)
    for i, k in enumerate(range(1, K + 1)):
        om = k * r.T
        tail = np.power(1.0 + 1j * z[None, :] / om, c[:, None] - 1.0) @ w / om
        full = gamma_c * np.power(om, -c) * np.exp(0.5j * math.pi * c) - 1j * np.exp(1j * om) * tail
        sin_int[i] = np.dot(weight, full.imag)
        cos_int[i] = np.dot(weight, full.real - 1.0 / c)
    return sin_int, cos_int


def _lebesgue_trig(m: LebesgueMeasure, K: int, q: QuadratureConfig) -> tuple[np.ndarray, np.ndarray]:
    ks = np.arange(1, K + 1, dtype=float)
    prob_k = np.tile(ks, 2)
    is_sin = np.repeat([True, False], K)

    def g(s, ids):
        phase = prob_k[ids][:, None] * s
        half = np.sin(0.5 * phase)
        return np.where(is_sin[ids][:, None], np.sin(phase), -2.0 * half * half)

    raw = adaptive_gk(g, np.zeros(2 * K), m.T, q.abs_tol, q.max_subdivisions)
    return raw[:K], raw[K:]


def coefficients_by_parts(source: Union[RademacherRealization, LebesgueMeasure, PathSample], K: int,
                          q: QuadratureConfig = DEFAULT_QUADRATURE,
                          route: str = "contour") -> FourierCoefficients:
    """Fourier coefficients from integrals of trigonometric functions against the measure.

    Exact measures are integrated by quadrature, paths by left-tagged
    Riemann-Stieltjes sums.  For Rademacher realizations ``route`` picks the
    closed contour formula ("contour", default) or term-by-term adaptive
    quadrature ("quadrature", slow for many terms and high K).
    """
    if K < 0:
        raise DomainError("K must be nonnegative")
    _check_horizon(source.T)
    identity = lambda s: s
    if isinstance(source, PathSample):
        cos_m, sin_m = trig_moments(source, K)
        sin_int = sin_m[1:]
        cos_int = cos_m[1:] - cos_m[0]
        total = source.values[-1] - source.values[0]
        s_int = integrate_grid(source, identity)
    elif isinstance(source, RademacherRealization):
        if route == "contour":
            sin_int, cos_int = _rademacher_trig_contour(source, K)
        elif route == "quadrature":
            sin_int, cos_int = _rademacher_trig(source, K, q) if K else (np.empty(0), np.empty(0))
        else:
            raise DomainError(f"unknown route {route!r}")
        total = source.interval_measure(0.0, source.T)
        s_int = series_integral(source.signs, source.T, identity, None, q)
    elif isinstance(source, LebesgueMeasure):
        sin_int, cos_int = _lebesgue_trig(source, K, q) if K else (np.empty(0), np.empty(0))
        total = source.interval_measure(0.0, source.T)
        s_int = integrate_lebesgue(source, identity, None, q)
    else:
        raise TypeError(f"cannot expand {type(source).__name__}")

    k = np.arange(1, K + 1, dtype=float)
    xi = np.empty(K + 1)
    xi[0] = 2.0 * total - s_int / math.pi
    xi[1:] = -sin_int / (k * math.pi)
    eta = cos_int / (k * math.pi)
    return FourierCoefficients(xi, eta, BY_PARTS, _provenance(source, K=K))


def _trapezoid_trig(path: PathSample, K: int) -> tuple[np.ndarray, np.ndarray]:
    """Trapezoid integrals of mu(s) cos(ks) and mu(s) sin(ks), k = 0..K."""
    v = path.values
    h = path.step
    n = path.n
    if math.isclose(path.T, TWO_PI, rel_tol=1e-12):
        # periodic trapezoid: fold the endpoint t_n = 2 pi onto t_0 = 0
        y = h * v[:-1].copy()
        y[0] = 0.5 * h * (v[0] + v[-1])
        spec = np.fft.fft(y)
        idx = np.arange(K + 1) % n
        return spec.real[idx].copy(), -spec.imag[idx]
    w = np.full(n + 1, h)
    w[0] = w[-1] = 0.5 * h
    wy = w * v
    k = np.arange(K + 1, dtype=float)
    phase = np.outer(k, path.grid)
    return np.cos(phase) @ wy, np.sin(phase) @ wy


def coefficients_direct(path: PathSample, K: int) -> FourierCoefficients:
    """Fourier coefficients as trapezoid integrals of the sampled path."""
    if K < 0:
        raise DomainError("K must be nonnegative")
    _check_horizon(path.T)
    extra = {"K": K}
    if K > path.n / 4:
        extra["aliasing_warning"] = True
        warnings.warn(f"K={K} exceeds a quarter of the {path.n} grid intervals; high coefficients alias",
                      stacklevel=2)
    c, s = _trapezoid_trig(path, K)
    return FourierCoefficients(c / math.pi, s[1:] / math.pi, DIRECT, _provenance(path, **extra))


def partial_sum(c: FourierCoefficients, n: int, t) -> np.ndarray:
    """S_n(t) = xi_0/2 + sum_{k<=n} (xi_k cos kt + eta_k sin kt); t is reduced mod 2 pi."""
    if not 0 <= n <= c.K:
        raise DomainError(f"n={n} must lie in 0..{c.K}")
    t = np.asarray(t, dtype=float)
    tt = np.mod(t, TWO_PI).ravel()
    out = np.full(tt.size, 0.5 * c.xi[0])
    if n:
        k = np.arange(1, n + 1, dtype=float)
        rows = max(1, (1 << 22) // n)
        for start in range(0, tt.size, rows):
            phase = np.outer(tt[start:start + rows], k)
            out[start:start + rows] += np.cos(phase) @ c.xi[1:n + 1] + np.sin(phase) @ c.eta[:n]
    return out.reshape(t.shape) if t.ndim else float(out[0])


def delayed_mean_partial_sum(c: FourierCoefficients, n: int, t) -> np.ndarray:
    """S*_n(t) = (S_{n-1}(t) + S_n(t)) / 2."""
    if not 1 <= n <= c.K:
        raise DomainError(f"n={n} must lie in 1..{c.K}")
    t = np.asarray(t, dtype=float)
    tt = np.mod(t, TWO_PI)
    last = c.xi[n] * np.cos(n * tt) + c.eta[n - 1] * np.sin(n * tt)
    return partial_sum(c, n - 1, t) + 0.5 * last


def detrend_total(path: PathSample) -> PathSample:
    """Path of mu(A) - m_L(A) mu((0, T]) / T, which has total mass zero."""
    values = path.values - path.grid * (path.values[-1] / path.T)
    values[0] = 0.0
    values[-1] = 0.0
    return PathSample(path.grid, values, path.model, path.stream)


def block_energies(c: FourierCoefficients) -> np.ndarray:
    """Energy sum_{k in [2^j, 2^(j+1))} (xi_k^2 + eta_k^2) for every complete dyadic block."""
    e = c.xi[1:] ** 2 + c.eta ** 2
    out = []
    j = 0
    while 2 ** (j + 1) - 1 <= c.K:
        out.append(float(np.sum(e[2 ** j - 1:2 ** (j + 1) - 1])))
        j += 1
    return np.array(out)


def energy_decay_slope(c: FourierCoefficients) -> float:
    """Least-squares slope of log2 block energy against block index j."""
    blocks = block_energies(c)
    return fit_log2_slope(np.arange(blocks.size), blocks)[0]


@dataclass(frozen=True)
class ConvergenceReport:
    rows: tuple
    block_energy: tuple
    interior_margin: float

    def to_dict(self) -> dict:
        return {"interior_margin": self.interior_margin, "rows": list(self.rows),
                "block_energy": list(self.block_energy)}

    def column(self, name: str) -> np.ndarray:
        return np.array([row[name] for row in self.rows])


def _same_provenance(path: PathSample, c: FourierCoefficients) -> bool:
    prov = c.provenance
    if path.model is not None and "model" in prov and prov["model"] != path.model.to_dict():
        return False
    if path.stream is not None and "seed" in prov:
        return prov["seed"] == path.stream.seed and prov.get("stream_index") == path.stream.index
    return True


def convergence_report(path: PathSample, c: FourierCoefficients, n_list: Sequence[int],
                       interior_margin: float = DEFAULT_INTERIOR_MARGIN) -> ConvergenceReport:
    """Grid diagnostics of S_n against the path for each n in ``n_list``.

    Each row holds the sup of |S_n(t) - mu(t)| over grid points in
    [margin, 2 pi - margin], the endpoint error |S_n(0) - mu(2 pi)/2| and the
    coefficient energy up to n.
    """
    _check_horizon(path.T)
    if not _same_provenance(path, c):
        raise DomainError("path and coefficients come from different realizations")
    inside = (path.grid >= interior_margin) & (path.grid <= TWO_PI - interior_margin)
    t_in = path.grid[inside]
    mu_in = path.values[inside]
    half_total = 0.5 * path.values[-1]
    rows = []
    for n in n_list:
        err = np.abs(partial_sum(c, n, t_in) - mu_in)
        rows.append({
            "n": int(n),
            "sup_interior_error": float(err.max()) if err.size else 0.0,
            "endpoint_error": float(abs(partial_sum(c, n, 0.0) - half_total)),
            "energy": c.energy(n),
        })
    return ConvergenceReport(tuple(rows), tuple(float(b) for b in block_energies(c)), interior_margin)
