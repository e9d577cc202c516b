"""Run configuration files.

A configuration is a YAML mapping::

    points: [[0.2, -0.1], [1.0, 0.3]]
    labels: [0.8, -0.1]
    lambda: 0.03
    fidelity: mse          # or half_sum (default)
    noise: [0.0, 0.001]    # optional, added to the labels
    solver: {particles: 2000, seed: 0}
    sweep: {lambdas: [1.0, 0.1]}
    stability: {noise_levels: [0.0005, 0.001], directions_seed: 0}
    certify: {tol_sat: 0.01, match_radius: 0.05, nd_tol: 1.0e-6}
    output_dir: out

``fidelity: mse`` means the data term is the mean ``(1/n) sum r_j^2``.  All
computations use ``0.5 sum r_j^2``, so such lambdas are rescaled by ``n/2``.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field, fields
from typing import Optional

import numpy as np
import yaml

from .errors import ConfigError
from .geometry import ProblemInstance
from .solver import SolverConfig, default_lambda_grid, default_noise_levels

FIDELITIES = ("half_sum", "mse")
_SOLVER_FIELDS = {f.name for f in fields(SolverConfig)}
_TOP_FIELDS = {"points", "labels", "lambda", "fidelity", "noise", "solver", "sweep",
               "stability", "certify", "output_dir", "name"}


@dataclass(frozen=True)
class CertifyOptions:
    tol_sat: float = 1e-2
    match_radius: float = 5e-2
    nd_tol: float = 1e-6


@dataclass(frozen=True)
class RunConfig:
    points: tuple
    labels: tuple
    lam: float
    fidelity: str = "half_sum"
    noise: Optional[tuple] = None
    solver: SolverConfig = field(default_factory=SolverConfig)
    sweep_lambdas: Optional[tuple] = None
    noise_levels: Optional[tuple] = None
    directions_seed: int = 0
    certify: CertifyOptions = field(default_factory=CertifyOptions)
    output_dir: str = "."
    name: Optional[str] = None

    @property
    def n(self) -> int:
        return len(self.points)

    def to_canonical(self, lam: float) -> float:
        """Lambda of the ``0.5 sum r^2`` objective equivalent to ``lam`` under this fidelity."""
        return lam * self.n / 2.0 if self.fidelity == "mse" else lam

    def from_canonical(self, lam: float) -> float:
        return lam * 2.0 / self.n if self.fidelity == "mse" else lam

    def instance(self, lam: Optional[float] = None) -> ProblemInstance:
        lam_c = self.to_canonical(self.lam if lam is None else lam)
        inst = ProblemInstance(np.array(self.points), np.array(self.labels), lam_c)
        if self.noise is not None:
            inst = inst.with_noise(np.array(self.noise))
        return inst

    def lambda_grid(self) -> list:
        grid = self.sweep_lambdas if self.sweep_lambdas is not None else default_lambda_grid()
        return [float(l) for l in grid]

    def stability_levels(self) -> list:
        lv = self.noise_levels if self.noise_levels is not None else default_noise_levels()
        return [float(v) for v in lv]

    def to_dict(self) -> dict:
        out = {
            "points": [list(p) for p in self.points],
            "labels": list(self.labels),
            "lambda": self.lam,
            "fidelity": self.fidelity,
        }
        if self.name is not None:
            out["name"] = self.name
        if self.noise is not None:
            out["noise"] = list(self.noise)
        solver = asdict(self.solver)
        solver.pop("adam_beta1"), solver.pop("adam_beta2")
        solver["adam_betas"] = [self.solver.adam_beta1, self.solver.adam_beta2]
        out["solver"] = solver
        if self.sweep_lambdas is not None:
            out["sweep"] = {"lambdas": list(self.sweep_lambdas)}
        stab = {"directions_seed": self.directions_seed}
        if self.noise_levels is not None:
            stab["noise_levels"] = list(self.noise_levels)
        out["stability"] = stab
        out["certify"] = asdict(self.certify)
        out["output_dir"] = self.output_dir
        return out


def _numbers(value, name, shape_2d=False):
    try:
        arr = np.array(value, dtype=float)
    except (TypeError, ValueError):
        raise ConfigError(f"field '{name}' must contain numbers", name) from None
    if shape_2d and (arr.ndim != 2 or arr.shape[0] == 0 or arr.shape[1] == 0):
        raise ConfigError(f"field '{name}' must be a non-empty list of equal-length lists", name)
    if not shape_2d and arr.ndim != 1:
        raise ConfigError(f"field '{name}' must be a flat list of numbers", name)
    if not np.all(np.isfinite(arr)):
        raise ConfigError(f"field '{name}' contains non-finite values", name)
    return arr


def _mapping(raw, key) -> dict:
    val = raw.get(key) or {}
    if not isinstance(val, dict):
        raise ConfigError(f"field '{key}' must be a mapping", key)
    return val


def config_from_dict(raw) -> RunConfig:
    if not isinstance(raw, dict) or not raw:
        raise ConfigError("configuration is empty or not a mapping", None)
    unknown = set(raw) - _TOP_FIELDS
    if unknown:
        key = sorted(unknown)[0]
        raise ConfigError(f"unknown field '{key}'", key)
    for key in ("points", "labels", "lambda"):
        if key not in raw:
            raise ConfigError(f"missing required field '{key}'", key)
    X = _numbers(raw["points"], "points", shape_2d=True)
    if np.any(np.linalg.norm(X, axis=1) == 0):
        raise ConfigError("field 'points' contains a zero vector", "points")
    y = _numbers(raw["labels"], "labels")
    if y.shape[0] != X.shape[0]:
        raise ConfigError("field 'labels' must have one entry per point", "labels")
    lam = raw["lambda"]
    if isinstance(lam, bool) or not isinstance(lam, (int, float)) or not lam > 0:
        raise ConfigError("field 'lambda' must be a positive number", "lambda")
    fid = raw.get("fidelity", "half_sum")
    if fid not in FIDELITIES:
        raise ConfigError(f"field 'fidelity' must be one of {FIDELITIES}", "fidelity")
    noise = None
    if raw.get("noise") is not None:
        z = _numbers(raw["noise"], "noise")
        if z.shape[0] != X.shape[0]:
            raise ConfigError("field 'noise' must have one entry per point", "noise")
        noise = tuple(float(v) for v in z)

    sraw = dict(_mapping(raw, "solver"))
    if "adam_betas" in sraw:
        betas = sraw.pop("adam_betas")
        if not isinstance(betas, (list, tuple)) or len(betas) != 2:
            raise ConfigError("field 'solver.adam_betas' must be a pair", "solver.adam_betas")
        sraw["adam_beta1"], sraw["adam_beta2"] = betas
    bad = set(sraw) - _SOLVER_FIELDS
    if bad:
        key = sorted(bad)[0]
        raise ConfigError(f"unknown field 'solver.{key}'", f"solver.{key}")
    defaults = SolverConfig()
    for key, val in sraw.items():
        want = type(getattr(defaults, key))
        ok = isinstance(val, bool) if want is bool else (
            isinstance(val, int) and not isinstance(val, bool) if want is int else
            isinstance(val, (int, float)) and not isinstance(val, bool))
        if not ok:
            raise ConfigError(f"field 'solver.{key}' must be of type {want.__name__}",
                              f"solver.{key}")
        if want is float:
            sraw[key] = float(val)
    try:
        solver = SolverConfig(**sraw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"field 'solver': {exc}", "solver") from None

    sweep = _mapping(raw, "sweep")
    lambdas = None
    if sweep.get("lambdas") is not None:
        arr = _numbers(sweep["lambdas"], "sweep.lambdas")
        if arr.size == 0 or np.any(arr <= 0):
            raise ConfigError("field 'sweep.lambdas' must be positive", "sweep.lambdas")
        lambdas = tuple(float(v) for v in arr)

    stab = _mapping(raw, "stability")
    levels = None
    if stab.get("noise_levels") is not None:
        arr = _numbers(stab["noise_levels"], "stability.noise_levels")
        if arr.size == 0 or np.any(arr <= 0):
            raise ConfigError("field 'stability.noise_levels' must be positive",
                              "stability.noise_levels")
        levels = tuple(float(v) for v in arr)
    dseed = stab.get("directions_seed", 0)
    if isinstance(dseed, bool) or not isinstance(dseed, int) or dseed < 0:
        raise ConfigError("field 'stability.directions_seed' must be a nonnegative integer",
                          "stability.directions_seed")

    craw = _mapping(raw, "certify")
    try:
        cert = CertifyOptions(**{k: float(v) for k, v in craw.items()})
    except (TypeError, ValueError):
        raise ConfigError("field 'certify' has unknown or non-numeric entries", "certify") from None

    out_dir = raw.get("output_dir", ".")
    if not isinstance(out_dir, str):
        raise ConfigError("field 'output_dir' must be a string", "output_dir")
    name = raw.get("name")
    return RunConfig(
        points=tuple(tuple(float(v) for v in p) for p in X),
        labels=tuple(float(v) for v in y),
        lam=float(lam),
        fidelity=fid,
        noise=noise,
        solver=solver,
        sweep_lambdas=lambdas,
        noise_levels=levels,
        directions_seed=dseed,
        certify=cert,
        output_dir=out_dir,
        name=None if name is None else str(name),
    )


def parse_config(text: str) -> RunConfig:
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"not valid YAML: {exc}", None) from None
    return config_from_dict(raw)


def dump_config(cfg: RunConfig) -> str:
    return yaml.safe_dump(cfg.to_dict(), sort_keys=False)


def load_config(path) -> RunConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}", None) from None
    return parse_config(text)
