"""Stochastic measure models and sampling of their distribution functions.

A model is described declaratively by :class:`SMModelSpec`.  Two kinds have
exact, closed-form interval measures and are *realized* as measure objects
(:class:`LebesgueMeasure`, :class:`RademacherRealization`); every kind can be
*sampled* on a grid as ``mu(t) = mu((0, t])`` (:class:`PathSample`) or, on a
dyadic grid of the unit cube, as ``mu(x) = mu(prod [0, x_i])``
(:class:`FieldSample`).

The Rademacher-series model on ``(0, T]`` is

    mu(A) = sum_k eps_k k^(-4/3) int_{A/T} x^(c_k - 1) dx,   c_k = k^(-1/3),

i.e. the series on ``[0, 1]`` pushed forward by ``s -> s/T``.  It is truncated
at ``K`` terms, which keeps it an exact stochastic measure; the omitted tail of
``mu((0, 1])`` has L2 norm at most ``K^(-1/2)``.
"""

from __future__ import annotations

import enum
import functools
import math
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from .errors import DomainError, InvalidModelError, ResourceLimitError
from .rng import RngStream

DEFAULT_RADEMACHER_TERMS = 4096
FBM_POINT_CAP = 4097
FIELD_LEVEL_CAP = {1: 12, 2: 9}

# rows of the (grid x terms) power table evaluated at once
_CHUNK_ELEMENTS = 1 << 22


class ModelKind(str, enum.Enum):
    LEBESGUE = "DeterministicLebesgue"
    RADEMACHER = "RademacherSeries"
    WIENER = "Wiener"
    FBM = "FBM"
    SHEET = "BrownianSheet2D"

    @classmethod
    def parse(cls, name: Union[str, "ModelKind"]) -> "ModelKind":
        if isinstance(name, cls):
            return name
        key = str(name).strip().lower().replace("-", "").replace("_", "")
        for kind in cls:
            if key == kind.value.lower():
                return kind
        if key in _ALIASES:
            return _ALIASES[key]
        raise InvalidModelError(f"unknown model kind {name!r}")


_ALIASES = {
    "lebesgue": ModelKind.LEBESGUE,
    "rademacher": ModelKind.RADEMACHER,
    "wiener": ModelKind.WIENER,
    "brownian": ModelKind.WIENER,
    "fbm": ModelKind.FBM,
    "sheet": ModelKind.SHEET,
    "browniansheet": ModelKind.SHEET,
}


@dataclass(frozen=True)
class SMModelSpec:
    """Declarative description of a stochastic measure model.

    ``K`` is the truncation of the Rademacher series (only for that kind,
    defaults to 4096); ``H`` is the Hurst index (FBM only, in (1/2, 1)).
    """

    kind: ModelKind
    T: float = 1.0
    K: Optional[int] = None
    H: Optional[float] = None

    def __post_init__(self):
        kind = ModelKind.parse(self.kind)
        object.__setattr__(self, "kind", kind)
        if not (math.isfinite(self.T) and self.T > 0):
            raise InvalidModelError(f"horizon T must be positive and finite, got {self.T}")
        object.__setattr__(self, "T", float(self.T))

        if kind is ModelKind.RADEMACHER:
            K = DEFAULT_RADEMACHER_TERMS if self.K is None else self.K
            if isinstance(K, bool) or int(K) != K or K < 1:
                raise InvalidModelError(f"truncation K must be an integer >= 1, got {K}")
            object.__setattr__(self, "K", int(K))
        elif self.K is not None:
            raise InvalidModelError(f"K only applies to {ModelKind.RADEMACHER.value}")

        if kind is ModelKind.FBM:
            if self.H is None or not (0.5 < self.H < 1.0):
                raise InvalidModelError(f"FBM needs a Hurst index in (1/2, 1), got {self.H}")
            object.__setattr__(self, "H", float(self.H))
        elif self.H is not None:
            raise InvalidModelError(f"H only applies to {ModelKind.FBM.value}")

    def to_dict(self) -> dict:
        out = {"kind": self.kind.value, "T": self.T}
        if self.K is not None:
            out["K"] = self.K
        if self.H is not None:
            out["H"] = self.H
        return out


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


def _check_interval(a: float, b: float, T: float) -> tuple[float, float]:
    if not (0.0 <= a <= b <= T):
        raise DomainError(f"interval ({a}, {b}] must satisfy 0 <= a <= b <= T={T}")
    return float(a), float(b)


@dataclass(frozen=True)
class LebesgueMeasure:
    """The deterministic measure m_L on (0, T]; realization of DeterministicLebesgue."""

    T: float

    def interval_measure(self, a: float, b: float) -> float:
        a, b = _check_interval(a, b, self.T)
        return b - a


@dataclass(frozen=True, eq=False)
class RademacherRealization:
    """Frozen signs of a truncated Rademacher-series measure.

    ``weights`` are k^(-4/3), ``exponents`` are c_k = k^(-1/3); the interval
    measure of ``(a, b]`` is available in closed form.
    """

    signs: np.ndarray
    T: float = 1.0
    weights: np.ndarray = field(init=False, repr=False)
    exponents: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        signs = np.asarray(self.signs, dtype=float)
        if signs.ndim != 1 or signs.size < 1:
            raise InvalidModelError("signs must be a nonempty 1-D sequence")
        if not np.all(np.abs(signs) == 1.0):
            raise InvalidModelError("every sign must be -1 or +1")
        if not (math.isfinite(self.T) and self.T > 0):
            raise InvalidModelError(f"horizon T must be positive, got {self.T}")
        k = np.arange(1, signs.size + 1, dtype=float)
        object.__setattr__(self, "signs", _frozen(signs))
        object.__setattr__(self, "T", float(self.T))
        object.__setattr__(self, "weights", _frozen(np.power(k, -4.0 / 3.0)))
        object.__setattr__(self, "exponents", _frozen(np.power(k, -1.0 / 3.0)))

    @property
    def K(self) -> int:
        return self.signs.size

    @property
    def path_coefficients(self) -> np.ndarray:
        """eps_k * k^(-4/3) / c_k = eps_k / k, the coefficients of (t/T)^c_k in mu(t)."""
        return self.signs / np.arange(1, self.K + 1, dtype=float)

    def interval_measure(self, a: float, b: float) -> float:
        return rademacher_interval_measure(self, a, b)

    def distribution(self, t) -> np.ndarray:
        """mu((0, t]) for an array of t in [0, T]."""
        t = np.asarray(t, dtype=float)
        if np.any(t < 0) or np.any(t > self.T):
            raise DomainError(f"points must lie in [0, {self.T}]")
        x = (t / self.T).ravel()
        coef = self.path_coefficients
        out = np.empty_like(x)
        rows = max(1, _CHUNK_ELEMENTS // self.K)
        for start in range(0, x.size, rows):
            chunk = x[start:start + rows]
            out[start:start + rows] = np.power(chunk[:, None], self.exponents[None, :]) @ coef
        return out.reshape(t.shape)


def realize_rademacher(model: SMModelSpec, stream: RngStream) -> RademacherRealization:
    if model.kind is not ModelKind.RADEMACHER:
        raise InvalidModelError(f"realize_rademacher needs a RademacherSeries model, got {model.kind.value}")
    bits = stream.generator().integers(0, 2, size=model.K)
    return RademacherRealization(2.0 * bits - 1.0, T=model.T)


def realize(model: SMModelSpec, stream: Optional[RngStream] = None):
    """Exact measure object for models with closed-form interval measures."""
    if model.kind is ModelKind.LEBESGUE:
        return LebesgueMeasure(model.T)
    if model.kind is ModelKind.RADEMACHER:
        if stream is None:
            raise InvalidModelError("a stream is needed to realize a RademacherSeries model")
        return realize_rademacher(model, stream)
    raise InvalidModelError(f"{model.kind.value} has no exact realization; sample a path instead")


def rademacher_interval_measure(r: RademacherRealization, a: float, b: float) -> float:
    a, b = _check_interval(a, b, r.T)
    if a == b:
        return 0.0
    xa, xb = a / r.T, b / r.T
    c = r.exponents
    diff = np.power(xb, c) - np.power(xa, c)
    return float(np.dot(r.path_coefficients, diff))


@dataclass(frozen=True, eq=False)
class PathSample:
    """mu(t_0), ..., mu(t_n) on an equispaced grid 0 = t_0 < ... < t_n = T.

    ``model`` and ``stream`` are None for externally supplied paths.
    """

    grid: np.ndarray
    values: np.ndarray
    model: Optional[SMModelSpec] = None
    stream: Optional[RngStream] = None

    def __post_init__(self):
        grid, values = _frozen(self.grid), _frozen(self.values)
        if grid.ndim != 1 or grid.size < 2:
            raise DomainError("a path needs at least two grid points")
        if values.shape != grid.shape:
            raise DomainError(f"values {values.shape} and grid {grid.shape} differ in length")
        if grid[0] != 0.0:
            raise DomainError("grid must start at 0")
        steps = np.diff(grid)
        h = grid[-1] / (grid.size - 1)
        if not np.allclose(steps, h, rtol=1e-9, atol=0.0):
            raise DomainError("grid must be equispaced")
        if values[0] != 0.0:
            raise DomainError("mu(0) = mu(empty set) must be exactly 0")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)

    @property
    def T(self) -> float:
        return float(self.grid[-1])

    @property
    def n(self) -> int:
        """Number of grid intervals."""
        return self.grid.size - 1

    @property
    def step(self) -> float:
        return self.T / self.n

    @property
    def seed(self) -> Optional[int]:
        return None if self.stream is None else self.stream.seed

    def increments(self) -> np.ndarray:
        return np.diff(self.values)

    def subsample(self, factor: int) -> "PathSample":
        """Same path read on every ``factor``-th grid point."""
        if factor < 1 or self.n % factor:
            raise DomainError(f"factor {factor} must divide the {self.n} grid intervals")
        return PathSample(self.grid[::factor], self.values[::factor], self.model, self.stream)

    def scaled(self, c: float) -> "PathSample":
        return PathSample(self.grid, c * self.values, self.model, self.stream)


@dataclass(frozen=True, eq=False)
class FieldSample:
    """mu(x) on the dyadic grid {k / 2^N_max}^d of the cube [0, extent]^d.

    Index ``values[i]`` (d=1) or ``values[i, j]`` (d=2) holds mu at
    ``extent * (i, j) / 2^N_max``.
    """

    values: np.ndarray
    d: int
    N_max: int
    model: Optional[SMModelSpec] = None
    stream: Optional[RngStream] = None
    extent: float = 1.0

    def __post_init__(self):
        values = _frozen(self.values)
        if self.d not in (1, 2):
            raise DomainError(f"dimension must be 1 or 2, got {self.d}")
        if self.N_max < 0:
            raise DomainError("N_max must be nonnegative")
        side = 2 ** self.N_max + 1
        if values.shape != (side,) * self.d:
            raise DomainError(f"expected shape {(side,) * self.d} for N_max={self.N_max}, got {values.shape}")
        if self.d == 1 and values[0] != 0.0:
            raise DomainError("mu(0) must be 0")
        if self.d == 2 and (np.any(values[0, :] != 0.0) or np.any(values[:, 0] != 0.0)):
            raise DomainError("mu(x) must vanish when a coordinate is 0")
        object.__setattr__(self, "values", values)

    @property
    def size(self) -> int:
        """Grid intervals per axis."""
        return 2 ** self.N_max

    def coordinates(self) -> np.ndarray:
        return self.extent * np.arange(self.size + 1) / self.size

    def cell_increments(self) -> np.ndarray:
        """Rectangle increments of mu over every grid cell (inclusion-exclusion)."""
        v = self.values
        if self.d == 1:
            return np.diff(v)
        return v[1:, 1:] - v[:-1, 1:] - v[1:, :-1] + v[:-1, :-1]

    def scaled(self, c: float) -> "FieldSample":
        return FieldSample(c * self.values, self.d, self.N_max, self.model, self.stream, self.extent)


def field_from_path(path: PathSample) -> FieldSample:
    """View a path with 2^N intervals as a 1-D dyadic field."""
    N = int(round(math.log2(path.n)))
    if 2 ** N != path.n:
        raise DomainError(f"path has {path.n} intervals, not a power of two")
    return FieldSample(path.values, 1, N, path.model, path.stream, extent=path.T)


@functools.lru_cache(maxsize=8)
def _fbm_factor(n: int, T: float, H: float) -> np.ndarray:
    t = T * np.arange(1, n + 1) / n
    two_h = 2.0 * H
    cov = 0.5 * (t[:, None] ** two_h + t[None, :] ** two_h - np.abs(t[:, None] - t[None, :]) ** two_h)
    L = np.linalg.cholesky(cov)
    L.setflags(write=False)
    return L


def sample_path(model: SMModelSpec, stream: RngStream, grid_size: int,
                fbm_point_cap: int = FBM_POINT_CAP) -> PathSample:
    """Sample mu(t) on ``grid_size`` equal intervals of [0, T] (grid_size + 1 points).

    Lebesgue and Rademacher paths are exact closed forms; Wiener paths are
    cumulative Gaussian increments; FBM paths use a dense Cholesky factor of
    the exact covariance, capped at ``fbm_point_cap`` grid points.
    """
    if int(grid_size) != grid_size or grid_size < 2:
        raise DomainError(f"grid_size must be an integer >= 2, got {grid_size}")
    n = int(grid_size)
    grid = np.linspace(0.0, model.T, n + 1)
    kind = model.kind

    if kind is ModelKind.LEBESGUE:
        values = grid.copy()
    elif kind is ModelKind.RADEMACHER:
        values = realize_rademacher(model, stream).distribution(grid)
        values[0] = 0.0
    elif kind is ModelKind.WIENER:
        steps = stream.generator().standard_normal(n) * math.sqrt(model.T / n)
        values = np.concatenate(([0.0], np.cumsum(steps)))
    elif kind is ModelKind.FBM:
        if n + 1 > fbm_point_cap:
            raise ResourceLimitError(f"FBM grid of {n + 1} points exceeds the factorization cap {fbm_point_cap}")
        L = _fbm_factor(n, model.T, model.H)
        z = stream.generator().standard_normal(n)
        values = np.concatenate(([0.0], L @ z))
    else:
        raise InvalidModelError(f"{kind.value} is a 2-D model; use sample_field(d=2)")
    return PathSample(grid, values, model, stream)


def sample_field(model: SMModelSpec, stream: RngStream, d: int, N_max: int,
                 level_caps: Optional[dict] = None) -> FieldSample:
    caps = FIELD_LEVEL_CAP if level_caps is None else level_caps
    if d not in (1, 2):
        raise InvalidModelError(f"dimension must be 1 or 2, got {d}")
    if (d == 2) != (model.kind is ModelKind.SHEET):
        raise InvalidModelError(f"{model.kind.value} does not support d={d}")
    if N_max < 1 or N_max > caps[d]:
        raise ResourceLimitError(f"N_max={N_max} outside 1..{caps[d]} for d={d}")

    n = 2 ** N_max
    if d == 1:
        path = sample_path(model, stream, n)
        return FieldSample(path.values, 1, N_max, model, stream, extent=model.T)

    cells = stream.generator().standard_normal((n, n)) * (model.T / n)
    values = np.zeros((n + 1, n + 1))
    values[1:, 1:] = np.cumsum(np.cumsum(cells, axis=0), axis=1)
    return FieldSample(values, 2, N_max, model, stream, extent=model.T)
