"""Command-line experiment runner.

    smpath simulate --model wiener --seed 7 --grid 1024 --T 6.283185307
    smpath besov --model wiener --grid 4096 --p 2 --alpha 0.3
    smpath fourier --model lebesgue --K 16 --method parts
    smpath verify pz --m 3 --lambdas 1,1,1 --exact

Every run is described by an :class:`ExperimentConfig`; ``--config file.json``
loads one and command-line flags override its entries.  Artifacts go to
``--out`` together with ``manifest.json`` (config hash, seed, checksums and
the only timestamp).  Exit status: 0 pass, 2 verification failure, 1 error
(with a JSON error object on stderr).
"""

from __future__ import annotations

import argparse
import datetime
import hashlib
import json
import math
import sys
from pathlib import Path
from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from . import __version__
from .besov import BesovParams, besov_norm_estimate, besov_report, dyadic_level_sums
from .errors import DomainError
from .fourier import (TWO_PI, coefficients_by_parts, coefficients_direct, convergence_report)
from .integrate import catalogue_integrand
from .io import dumps, sha256_file, write_coefficients_csv, write_field_csv, write_json, write_path_csv, write_table_csv
from .models import ModelKind, SMModelSpec, realize, sample_field, sample_path
from .rng import RngStream
from .verify import (FAMILIES, cubic_increment_check, exp_moment_sharpness, holder_bound_check,
                     paley_zygmund_check, sum_squares_check)

EXIT_PASS, EXIT_ERROR, EXIT_FAIL = 0, 1, 2

COMMON = {"command", "model", "T", "terms", "H", "seed", "grid", "out", "threads"}
COMMAND_FIELDS = {
    "simulate": set(),
    "besov": {"p", "q", "alpha", "direction", "n_min", "n_max", "slope_margin"},
    "fourier": {"K", "method", "n_list", "interior_margin"},
    "verify": {"test", "replicates", "m", "lambdas", "exact", "family", "j_levels",
               "T1", "epsilons", "k", "lam", "f"},
}
# fields that do not change results and stay out of the config hash
NON_SCIENTIFIC = {"out", "threads"}


class ExperimentConfig(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    command: Literal["simulate", "besov", "fourier", "verify"]
    model: str = "wiener"
    T: Optional[float] = Field(None, gt=0)
    terms: Optional[int] = Field(None, ge=1)
    H: Optional[float] = None
    seed: int = Field(0, ge=0, lt=2 ** 64)
    grid: Optional[int] = Field(None, ge=2)
    out: str = "."
    threads: Optional[int] = Field(None, ge=1)
    # besov
    p: float = 2.0
    q: Optional[float] = None
    alpha: float = 0.5
    direction: int = 1
    n_min: int = 3
    n_max: Optional[int] = None
    slope_margin: float = 0.1
    # fourier
    K: int = Field(64, ge=0)
    method: Literal["parts", "direct"] = "parts"
    n_list: Optional[list[int]] = None
    interior_margin: float = 0.5
    # verify
    test: Optional[Literal["pz", "sumsq", "cubic", "expconst", "holder"]] = None
    replicates: int = Field(256, ge=1)
    m: Optional[int] = Field(None, ge=1)
    lambdas: Optional[list[float]] = None
    exact: Optional[bool] = None
    family: str = "sine"
    j_levels: list[int] = [64, 1024]
    T1: float = 1.0
    epsilons: list[float] = [0.04, 0.02, 0.01]
    k: int = Field(1, ge=1)
    lam: float = Field(1.0, gt=0)
    f: str = "x"

    @field_validator("model")
    @classmethod
    def _known_model(cls, v: str) -> str:
        return ModelKind.parse(v).value

    @model_validator(mode="after")
    def _one_entry_point(self):
        allowed = COMMON | COMMAND_FIELDS[self.command]
        stray = sorted(set(self.model_fields_set) - allowed)
        if stray:
            raise ValueError(f"options {stray} do not apply to '{self.command}'")
        if self.command == "verify" and self.test is None:
            raise ValueError("verify needs a test name")
        return self

    def horizon(self) -> float:
        if self.T is not None:
            return self.T
        if self.command == "fourier" or (self.command == "verify" and self.test == "sumsq"):
            return TWO_PI
        if self.command == "verify" and self.test == "cubic":
            return self.T1 + max(self.epsilons)
        return 1.0

    def model_spec(self) -> SMModelSpec:
        return SMModelSpec(ModelKind.parse(self.model), T=self.horizon(), K=self.terms, H=self.H)

    def grid_size(self, default: int) -> int:
        return default if self.grid is None else self.grid

    def canonical(self) -> dict:
        """Explicitly set scientific fields; the basis of the config hash."""
        data = self.model_dump(exclude_unset=True)
        return {k: v for k, v in data.items() if k not in NON_SCIENTIFIC}

    def config_hash(self) -> str:
        blob = json.dumps(self.canonical(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


def _dyadic_level(grid: int) -> int:
    N = int(round(math.log2(grid)))
    if 2 ** N != grid:
        raise DomainError(f"grid must be a power of two here, got {grid}")
    return N


def _run_simulate(cfg: ExperimentConfig, out: Path):
    spec = cfg.model_spec()
    stream = RngStream(cfg.seed)
    if spec.kind is ModelKind.SHEET:
        fld = sample_field(spec, stream, 2, _dyadic_level(cfg.grid_size(256)))
        return {"field.csv": write_field_csv(out / "field.csv", fld)}, True
    path = sample_path(spec, stream, cfg.grid_size(1024))
    return {"path.csv": write_path_csv(out / "path.csv", path)}, True


def _run_besov(cfg: ExperimentConfig, out: Path):
    spec = cfg.model_spec()
    d = 2 if spec.kind is ModelKind.SHEET else 1
    fld = sample_field(spec, RngStream(cfg.seed), d, _dyadic_level(cfg.grid_size(2 ** 9 if d == 2 else 2 ** 12)))
    params = BesovParams(cfg.p, cfg.alpha, cfg.q, cfg.direction, cfg.n_min, cfg.n_max)
    report = besov_report(dyadic_level_sums(fld, params), cfg.slope_margin)
    if cfg.q is not None:
        report["norm_estimate"] = besov_norm_estimate(fld, cfg.p, cfg.q, cfg.alpha)
    return {"besov.json": write_json(out / "besov.json", report)}, True


def _run_fourier(cfg: ExperimentConfig, out: Path):
    spec = cfg.model_spec()
    stream = RngStream(cfg.seed)
    needs_path = cfg.method == "direct" or cfg.n_list is not None
    path = sample_path(spec, stream, cfg.grid_size(2 ** 14)) if needs_path else None
    if cfg.method == "direct":
        coef = coefficients_direct(path, cfg.K)
    elif spec.kind in (ModelKind.LEBESGUE, ModelKind.RADEMACHER):
        coef = coefficients_by_parts(realize(spec, stream), cfg.K)
    else:
        coef = coefficients_by_parts(path if path is not None else sample_path(spec, stream, cfg.grid_size(2 ** 14)),
                                     cfg.K)
    artifacts = {"coefficients.csv": write_coefficients_csv(out / "coefficients.csv", coef)}
    if cfg.n_list is not None:
        rep = convergence_report(path, coef, cfg.n_list, cfg.interior_margin)
        artifacts["convergence.json"] = write_json(out / "convergence.json", rep.to_dict())
    return artifacts, True


def _parse_integrand(text: str):
    name, _, params = text.partition(":")
    return catalogue_integrand(name, *(float(v) for v in params.split(",") if v))


def _run_verify(cfg: ExperimentConfig, out: Path):
    stream = RngStream(cfg.seed)
    t = cfg.test
    if t == "pz":
        rep = paley_zygmund_check(cfg.lambdas, cfg.replicates, stream, m=cfg.m, exact=cfg.exact)
    elif t == "sumsq":
        if cfg.family not in FAMILIES:
            raise DomainError(f"unknown family {cfg.family!r}; choose from {sorted(FAMILIES)}")
        rep = sum_squares_check(cfg.model_spec(), FAMILIES[cfg.family](), cfg.j_levels, cfg.replicates,
                                stream, cfg.grid_size(2 ** 14), threads=cfg.threads)
    elif t == "cubic":
        rep = cubic_increment_check(cfg.model_spec(), cfg.T1, cfg.epsilons, cfg.replicates, stream,
                                    cfg.grid_size(2 ** 14), threads=cfg.threads)
    elif t == "expconst":
        rep = exp_moment_sharpness(cfg.k, cfg.lam)
    else:
        rep = holder_bound_check(_parse_integrand(cfg.f), cfg.k, cfg.lam)
    artifacts = {"report.json": write_json(out / "report.json", rep.to_dict())}
    if rep.per_replicate:
        artifacts["replicates.csv"] = write_table_csv(out / "replicates.csv", rep.per_replicate)
    return artifacts, rep.passed


RUNNERS = {"simulate": _run_simulate, "besov": _run_besov, "fourier": _run_fourier, "verify": _run_verify}


def run(cfg: ExperimentConfig) -> int:
    """Execute one experiment, write its artifacts and manifest, return the exit status."""
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    artifacts, passed = RUNNERS[cfg.command](cfg, out)
    manifest = {
        "version": __version__,
        "config": cfg.canonical(),
        "config_sha256": cfg.config_hash(),
        "seed": cfg.seed,
        "pass": passed,
        "artifacts": {name: sha256_file(p) for name, p in sorted(artifacts.items())},
        "created": datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds"),
    }
    write_json(out / "manifest.json", manifest)
    return EXIT_PASS if passed else EXIT_FAIL


# -- argument parsing -------------------------------------------------------------

def _floats(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v.strip()]


def _ints(text: str) -> list[int]:
    return [int(v) for v in text.split(",") if v.strip()]


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON experiment config; flags override its entries")
    p.add_argument("--model", help="lebesgue, rademacher, wiener, fbm or sheet")
    p.add_argument("--T", type=float, help="horizon of (0, T]")
    p.add_argument("--terms", type=int, help="Rademacher series truncation")
    p.add_argument("--H", type=float, help="Hurst index for fbm")
    p.add_argument("--seed", type=int, help="master seed (64-bit)")
    p.add_argument("--grid", type=int, help="number of grid intervals")
    p.add_argument("--out", help="output directory")
    p.add_argument("--threads", type=int, help="worker threads (default: SMPATH_THREADS or CPU count)")


class _Parser(argparse.ArgumentParser):
    """Usage errors become exceptions so they can be reported as JSON."""

    def error(self, message):
        raise DomainError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="smpath", description=__doc__.splitlines()[0],
                                     argument_default=argparse.SUPPRESS)
    parser.add_argument("--version", action="version", version=f"smpath {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="sample a path (or sheet) to CSV", argument_default=argparse.SUPPRESS)
    _common(p)

    p = sub.add_parser("besov", help="dyadic level sums and membership verdict", argument_default=argparse.SUPPRESS)
    _common(p)
    p.add_argument("--p", type=float)
    p.add_argument("--q", type=float, help="also estimate the norm with this q")
    p.add_argument("--alpha", type=float)
    p.add_argument("--direction", type=int)
    p.add_argument("--n-min", dest="n_min", type=int)
    p.add_argument("--n-max", dest="n_max", type=int)
    p.add_argument("--slope-margin", dest="slope_margin", type=float)

    p = sub.add_parser("fourier", help="Fourier coefficients and convergence diagnostics",
                       argument_default=argparse.SUPPRESS)
    _common(p)
    p.add_argument("--K", type=int, help="highest frequency")
    p.add_argument("--method", choices=["parts", "direct"])
    p.add_argument("--n-list", dest="n_list", type=_ints, help="e.g. 64,512")
    p.add_argument("--interior-margin", dest="interior_margin", type=float)

    p = sub.add_parser("verify", help="inequality and limit checks", argument_default=argparse.SUPPRESS)
    p.add_argument("test", choices=["pz", "sumsq", "cubic", "expconst", "holder"])
    _common(p)
    p.add_argument("--replicates", type=int)
    p.add_argument("--m", type=int, help="number of random weights (pz)")
    p.add_argument("--lambdas", type=_floats, help="weights, e.g. 1,1,1 (pz)")
    p.add_argument("--exact", action="store_true", help="enumerate all sign patterns (pz)")
    p.add_argument("--mc-only", dest="exact", action="store_false", help="skip enumeration (pz)")
    p.add_argument("--family", help="sine, cosine or zero (sumsq)")
    p.add_argument("--j-levels", dest="j_levels", type=_ints, help="e.g. 64,1024 (sumsq)")
    p.add_argument("--T1", type=float, help="upper integration limit (cubic)")
    p.add_argument("--epsilons", type=_floats, help="eps schedule, e.g. 0.04,0.02,0.01 (cubic)")
    p.add_argument("--k", type=int, help="series index (expconst, holder)")
    p.add_argument("--lam", type=float, help="exponential rate (expconst, holder)")
    p.add_argument("--f", help="integrand, e.g. x, zero, const:1, sin:1 (holder)")
    return parser


def load_config(argv=None) -> ExperimentConfig:
    args = vars(build_parser().parse_args(argv))
    data = {}
    config_path = args.pop("config", None)
    if config_path is not None:
        data = json.loads(Path(config_path).read_text())
        if not isinstance(data, dict):
            raise DomainError("config file must hold a JSON object")
        if data.get("command", args["command"]) != args["command"]:
            raise DomainError(f"config is for '{data['command']}', not '{args['command']}'")
    data.update(args)
    return ExperimentConfig(**data)


def _error(exc: BaseException) -> int:
    sys.stderr.write(dumps({"error": type(exc).__name__, "message": str(exc)}))
    return EXIT_ERROR


def main(argv=None) -> int:
    try:
        cfg = load_config(argv)
    except SystemExit as exc:  # --help, --version
        return EXIT_PASS if exc.code in (0, None) else EXIT_ERROR
    except (ValueError, OSError) as exc:
        return _error(exc)
    try:
        return run(cfg)
    except (ValueError, ArithmeticError, RuntimeError, OSError) as exc:
        return _error(exc)


if __name__ == "__main__":
    sys.exit(main())
