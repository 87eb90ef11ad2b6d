"""Exact and Monte Carlo checks of the inequalities and limit statements.

Every check returns a :class:`VerificationReport` that is a pure function of
its parameters and master stream, and whose pass flag can be recomputed from
the stored statistics and thresholds.  Replicate ``r`` of a check draws from
``stream.child(r)``.
"""

from __future__ import annotations

import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Optional, Sequence

import numpy as np

from .errors import DomainError
from .integrate import IntegrandSpec, as_integrand, trig_moments
from .models import PathSample, SMModelSpec, sample_path
from .quadrature import DEFAULT_QUADRATURE, QuadratureConfig, quad, singular_weight_quadrature
from .rng import RngStream

PZ_BOUND = 1.0 / 8.0
PZ_EXACT_MAX_M = 20
DEFAULT_REPLICATES = 256
DEFAULT_EPSILONS = (0.04, 0.02, 0.01)


def resolve_threads(threads: Optional[int] = None) -> int:
    """Explicit value, else SMPATH_THREADS, else the CPU count."""
    if threads is None:
        env = os.environ.get("SMPATH_THREADS")
        threads = int(env) if env else (os.cpu_count() or 1)
    if threads < 1:
        raise DomainError(f"thread count must be positive, got {threads}")
    return threads


def map_replicates(fn: Callable[[RngStream], object], stream: RngStream, replicates: int,
                   threads: Optional[int] = None) -> list:
    """fn(stream.child(r)) for r = 0..replicates-1, in replicate order."""
    streams = [stream.child(r) for r in range(replicates)]
    n = resolve_threads(threads)
    if n == 1 or replicates < 2:
        return [fn(s) for s in streams]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, streams))


def _plain(x):
    """numpy scalars/arrays -> JSON-friendly Python values."""
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, np.ndarray):
        return _plain(x.tolist())
    if isinstance(x, (np.bool_, bool)):
        return bool(x)
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if math.isfinite(x) else None
    return x


@dataclass
class VerificationReport:
    name: str
    parameters: dict
    replicates: int
    statistics: dict
    thresholds: dict
    passed: bool
    seed: Optional[int] = None
    per_replicate: dict = field(default_factory=dict)

    def recompute_pass(self) -> bool:
        return PASS_RULES[self.name](self.statistics, self.thresholds)

    def to_dict(self) -> dict:
        return _plain({
            "test": self.name,
            "parameters": self.parameters,
            "replicates": self.replicates,
            "statistics": self.statistics,
            "thresholds": self.thresholds,
            "pass": self.passed,
            "seed": self.seed,
        })

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"


def _report(name, parameters, replicates, statistics, thresholds, seed=None, per_replicate=None):
    statistics = _plain(statistics)
    thresholds = _plain(thresholds)
    return VerificationReport(name, _plain(parameters), replicates, statistics, thresholds,
                              PASS_RULES[name](statistics, thresholds), seed, per_replicate or {})


# -- Paley-Zygmund ---------------------------------------------------------------

def signed_sums(lambdas) -> np.ndarray:
    """sum_k lambda_k eps_k for all 2^m sign patterns."""
    sums = np.zeros(1)
    for lam in np.asarray(lambdas, dtype=float):
        sums = np.concatenate((sums + lam, sums - lam))
    return sums


def pz_exact_probability(lambdas) -> float:
    """P[(sum lambda_k eps_k)^2 >= sum lambda_k^2 / 4] by enumerating all sign patterns."""
    lambdas = np.asarray(lambdas, dtype=float)
    if lambdas.size > PZ_EXACT_MAX_M:
        raise DomainError(f"exact enumeration is limited to m <= {PZ_EXACT_MAX_M}")
    sums = signed_sums(lambdas)
    hits = np.count_nonzero(sums * sums >= 0.25 * np.dot(lambdas, lambdas))
    return hits / sums.size


def paley_zygmund_check(lambdas=None, replicates: int = DEFAULT_REPLICATES,
                        stream: Optional[RngStream] = None, m: Optional[int] = None,
                        exact: Optional[bool] = None) -> VerificationReport:
    """Probability that the squared signed sum reaches a quarter of its mean, versus 1/8.

    ``lambdas`` may be omitted, in which case ``m`` standard normal weights are
    drawn from ``stream``.  Exact enumeration runs by default when m <= 20; a
    Monte Carlo estimate runs whenever a stream is given.
    """
    if lambdas is None:
        if m is None or stream is None:
            raise DomainError("give lambdas, or m and a stream to draw them from")
        lambdas = stream.child(0).generator().standard_normal(m)
    lambdas = np.asarray(lambdas, dtype=float)
    if lambdas.ndim != 1 or lambdas.size < 1:
        raise DomainError("lambdas must be a nonempty vector")
    m = lambdas.size
    if exact is None:
        exact = m <= PZ_EXACT_MAX_M
    stats = {"m": m, "sum_of_squares": float(np.dot(lambdas, lambdas))}
    if exact:
        stats["probability_exact"] = pz_exact_probability(lambdas)
    used = 0
    if stream is not None and replicates > 0:
        signs = 2.0 * stream.child(1).generator().integers(0, 2, size=(replicates, m)) - 1.0
        sums = signs @ lambdas
        stats["probability_estimate"] = float(np.mean(sums * sums >= 0.25 * stats["sum_of_squares"]))
        used = replicates
    if "probability_exact" not in stats and "probability_estimate" not in stats:
        raise DomainError("nothing to compute: enumeration disabled and no Monte Carlo stream")
    stats["probability"] = stats.get("probability_exact", stats.get("probability_estimate"))
    return _report("paley_zygmund", {"lambdas": lambdas, "exact": exact}, used, stats,
                   {"min_probability": PZ_BOUND}, None if stream is None else stream.seed)


# -- sums of squares of integrals --------------------------------------------------

@dataclass(frozen=True)
class FunctionFamily:
    """f_1, f_2, ... with a certified bound sup_x sum_k f_k(x)^2 <= bound.

    ``evaluate(k, t)`` returns the matrix f_k(t) for arrays of k and t.
    ``trig`` marks families of the form sin(kt)/(pi k) or (cos(kt) - 1)/(pi k),
    whose integrals against grid paths reduce to one FFT.
    """

    name: str
    evaluate: Callable[[np.ndarray, np.ndarray], np.ndarray]
    bound: Optional[float]
    trig: Optional[str] = None


def sine_family() -> FunctionFamily:
    return FunctionFamily("sine", lambda k, t: np.sin(np.outer(k, t)) / (math.pi * k[:, None]),
                          1.0 / 6.0, trig="sin")


def cosine_family() -> FunctionFamily:
    return FunctionFamily("cosine", lambda k, t: (np.cos(np.outer(k, t)) - 1.0) / (math.pi * k[:, None]),
                          2.0 / 3.0, trig="cos")


def zero_family() -> FunctionFamily:
    return FunctionFamily("zero", lambda k, t: np.zeros((np.size(k), np.size(t))), 0.0)


FAMILIES = {"sine": sine_family, "cosine": cosine_family, "zero": zero_family}


def family_integrals(path: PathSample, family: FunctionFamily, j_max: int) -> np.ndarray:
    """Left-tagged integrals of f_1..f_{j_max} against the path."""
    k = np.arange(1, j_max + 1, dtype=float)
    if family.trig is not None:
        cos_m, sin_m = trig_moments(path, j_max)
        raw = sin_m[1:] if family.trig == "sin" else cos_m[1:] - cos_m[0]
        return raw / (math.pi * k)
    dmu = path.increments()
    tags = path.grid[:-1]
    out = np.empty(j_max)
    rows = max(1, (1 << 22) // tags.size)
    for start in range(0, j_max, rows):
        out[start:start + rows] = family.evaluate(k[start:start + rows], tags) @ dmu
    return out


def sum_squares_check(model: SMModelSpec, family: FunctionFamily, j_levels: Sequence[int],
                      replicates: int = DEFAULT_REPLICATES, stream: RngStream = RngStream(0),
                      grid_size: int = 2 ** 14, quantile: float = 0.9,
                      relative_gap: float = 0.1, additive_slack: float = 0.01,
                      threads: Optional[int] = None) -> VerificationReport:
    """Stabilization of T_j = sum_{k<=j} (int f_k dmu)^2 across j levels.

    Passes when the ``quantile``-quantile of T_j grows by at most
    ``relative_gap * Q(j_prev) + additive_slack`` between the two largest levels.
    """
    if family.bound is None:
        raise DomainError(f"family {family.name!r} has no certified bound on sum_k f_k^2")
    levels = sorted(int(j) for j in j_levels)
    if len(levels) < 2 or levels[0] < 1:
        raise DomainError("need at least two positive j levels")
    j_max = levels[-1]
    idx = np.array(levels) - 1

    def one(s: RngStream) -> np.ndarray:
        path = sample_path(model, s, grid_size)
        integrals = family_integrals(path, family, j_max)
        return np.cumsum(integrals * integrals)[idx]

    T = np.array(map_replicates(one, stream, replicates, threads))
    Q = np.quantile(T, quantile, axis=0)
    stats = {
        "j_levels": levels,
        "quantiles": [float(v) for v in Q],
        "medians": [float(v) for v in np.median(T, axis=0)],
        "means": [float(v) for v in T.mean(axis=0)],
        "gap": float(Q[-1] - Q[-2]),
        "reference_quantile": float(Q[-2]),
    }
    params = {"model": model.to_dict(), "family": family.name, "bound": family.bound,
              "grid_size": grid_size, "quantile": quantile}
    per = {f"T_{j}": T[:, i] for i, j in enumerate(levels)}
    return _report("sum_squares", params, replicates, stats,
                   {"relative_gap": relative_gap, "additive_slack": additive_slack},
                   stream.seed, per)


# -- cubic increments ----------------------------------------------------------------

def cubic_increment_integral(path: PathSample, T1: float, eps: float) -> float:
    """Trapezoid value of int_0^T1 |mu(s + eps) - mu(s)|^3 / eps ds on the path grid.

    Nodes have the grid spacing (or slightly less, to land on T1); mu between
    grid points is read by linear interpolation.
    """
    if T1 <= 0 or eps <= 0 or T1 + eps > path.T * (1 + 1e-12):
        raise DomainError(f"need 0 < T1, 0 < eps and T1 + eps <= T ({T1} + {eps} vs {path.T})")
    m = max(1, int(math.ceil(T1 / path.step - 1e-9)))
    s = np.linspace(0.0, T1, m + 1)
    upper = np.minimum(s + eps, path.T)
    diff = np.abs(np.interp(upper, path.grid, path.values) - np.interp(s, path.grid, path.values))
    g = diff ** 3 / eps
    return float((T1 / m) * (np.sum(g) - 0.5 * (g[0] + g[-1])))


def cubic_increment_check(model: SMModelSpec, T1: float = 1.0,
                          epsilons: Sequence[float] = DEFAULT_EPSILONS,
                          replicates: int = DEFAULT_REPLICATES, stream: RngStream = RngStream(0),
                          grid_size: int = 2 ** 14, threads: Optional[int] = None) -> VerificationReport:
    """Medians over replicates of the cubic increment integral along an eps schedule.

    Passes when the medians decrease strictly along the schedule (or all vanish).
    The grid step must be at most min(eps) / 16.
    """
    eps = [float(e) for e in epsilons]
    if not eps:
        raise DomainError("empty eps schedule")
    if T1 + max(eps) > model.T * (1 + 1e-12):
        raise DomainError(f"T1 + max(eps) = {T1 + max(eps)} exceeds the horizon {model.T}")
    step = model.T / grid_size
    if step > min(eps) / 16 * (1 + 1e-12):
        raise DomainError(f"grid step {step:.3g} must be <= min(eps)/16 = {min(eps) / 16:.3g}")

    def one(s: RngStream) -> list:
        path = sample_path(model, s, grid_size)
        return [cubic_increment_integral(path, T1, e) for e in eps]

    values = np.array(map_replicates(one, stream, replicates, threads))
    medians = np.median(values, axis=0)
    stats = {
        "epsilons": eps,
        "medians": medians,
        "means": values.mean(axis=0),
        "strictly_decreasing": bool(np.all(np.diff(medians) < 0)),
    }
    params = {"model": model.to_dict(), "T1": T1, "grid_size": grid_size}
    per = {f"eps_{e!r}": values[:, i] for i, e in enumerate(eps)}
    return _report("cubic_increment", params, replicates, stats, {}, stream.seed, per)


# -- exponential moment constant and the Hoelder bound ----------------------------

class ExpMomentConstant(NamedTuple):
    C: float
    u_star: float
    m: float


def holder_exponent(k: int) -> float:
    """m = 2 k^(1/3) - 1."""
    return 2.0 * float(np.cbrt(k)) - 1.0


def exp_moment_constant(k: int, lam: float) -> ExpMomentConstant:
    """Sharp C with u^m <= C 2^(lam u) for u >= 0, m = 2 k^(1/3) - 1, and its maximizer."""
    if k < 1 or lam <= 0:
        raise DomainError(f"need k >= 1 and lam > 0, got k={k}, lam={lam}")
    lam = float(lam)
    m = holder_exponent(k)
    u_star = m / (lam * math.log(2.0))
    C = u_star ** m * 2.0 ** (-m / math.log(2.0))
    return ExpMomentConstant(C, u_star, m)


def exp_moment_sharpness(k: int, lam: float, points: int = 2 ** 20 + 1,
                         rel_tol: float = 1e-9) -> VerificationReport:
    """Grid maximum of u^m 2^(-lam u) on [0, 2 u*] against the closed-form constant."""
    C, u_star, m = exp_moment_constant(k, lam)
    u = np.linspace(0.0, 2.0 * u_star, points)
    g = np.power(u, m) * np.power(2.0, -lam * u)
    i = int(np.argmax(g))
    step = u[1] - u[0]
    stats = {"C": C, "u_star": u_star, "m": m, "grid_max": float(g[i]), "argmax": float(u[i]),
             "grid_step": float(step), "relative_error": abs(float(g[i]) - C) / C,
             "argmax_distance": abs(float(u[i]) - u_star)}
    return _report("exp_moment_sharpness", {"k": k, "lam": lam, "points": points}, 0, stats,
                   {"relative_tolerance": rel_tol})


def holder_bound_check(f, k: int, lam: float, q: QuadratureConfig = DEFAULT_QUADRATURE,
                       grid_points: int = 10 ** 4) -> VerificationReport:
    """Check int |f| x^(c_k - 1) dx <= 2 k^(1/3) (int |f|^m dx)^(1/m) on [0, 1],
    and the pointwise bound |f|^m <= C 2^(lam |f|) on a grid, with equality at u*.

    ``f`` needs a known sup bound, which certifies int 2^(lam |f|) dx < inf.
    """
    f = as_integrand(f)
    if f.bound is None:
        raise DomainError("f needs a certified bound (IntegrandSpec.bound)")
    C, u_star, m = exp_moment_constant(k, lam)
    c_k = 1.0 / float(np.cbrt(k))
    absf = lambda x: np.abs(f(x))
    lhs = singular_weight_quadrature(absf, c_k, 0.0, 1.0, q)
    moment = quad(lambda x: np.power(np.abs(f(x)), m), 0.0, 1.0, q)
    rhs = 2.0 * float(np.cbrt(k)) * max(moment, 0.0) ** (1.0 / m)

    x = np.linspace(0.0, 1.0, grid_points)
    u = absf(x)
    lhs_pt = np.power(u, m)
    rhs_pt = C * np.power(2.0, lam * u)
    ratio = np.max(lhs_pt / rhs_pt)
    at_max = np.abs(u - u_star) <= 1e-12 * u_star
    equality_grid = float(np.max(np.abs(lhs_pt[at_max] / rhs_pt[at_max] - 1.0), initial=0.0))
    equality_at_ustar = abs(u_star ** m / (C * 2.0 ** (lam * u_star)) - 1.0)
    stats = {"lhs": lhs, "rhs": rhs, "m": m, "C": C, "u_star": u_star,
             "max_pointwise_ratio": float(ratio), "grid_points_at_u_star": int(at_max.sum()),
             "equality_error_grid": equality_grid, "equality_error_at_u_star": equality_at_ustar}
    return _report("holder_bound", {"f": f.description, "k": k, "lam": lam}, 0, stats,
                   {"relative_slack": 1e-8, "equality_tolerance": 1e-9})


# -- pass rules -----------------------------------------------------------------

def _pz_rule(s, t):
    return s["probability"] >= t["min_probability"]


def _sumsq_rule(s, t):
    return s["gap"] <= t["relative_gap"] * s["reference_quantile"] + t["additive_slack"]


def _cubic_rule(s, t):
    med = s["medians"]
    return all(b < a for a, b in zip(med, med[1:])) or all(v == 0 for v in med)


def _sharpness_rule(s, t):
    return s["relative_error"] <= t["relative_tolerance"] and s["argmax_distance"] <= s["grid_step"]


def _holder_rule(s, t):
    return (s["lhs"] <= s["rhs"] * (1 + t["relative_slack"])
            and s["max_pointwise_ratio"] <= 1 + t["equality_tolerance"]
            and s["equality_error_grid"] <= t["equality_tolerance"]
            and s["equality_error_at_u_star"] <= t["equality_tolerance"])


PASS_RULES = {
    "paley_zygmund": _pz_rule,
    "sum_squares": _sumsq_rule,
    "cubic_increment": _cubic_rule,
    "exp_moment_sharpness": _sharpness_rule,
    "holder_bound": _holder_rule,
}
