"""Experiment configuration: YAML in, validated dataclasses out.

Schema (every section optional)::

    medium:        {a0: 2.0}  or  {values: [1.0, 2.5, 1.0]}  (sites -N..N)
    model:         {L: 1.0, L0: null}
    simulation:    {dt: 0.05, t_end: 150.0, window: [-60, 60],
                    boundary_policy: dirichlet_stationary_left_zero_right,
                    sample_stride: 0.25, n_max: 8}
    query:         {speed: null, mu: null, lambda: null,
                    speed_window: [50, 150], tail_range: [10, 30], M_max: 256,
                    a0_grid: {start: 0.5, stop: 4.0, num: 36}}
    harnack:       {radii: [10, 20, 40], trials: 20, eta: 0.5, theta: [1, 2, 3, 4]}
    output:        {directory: out, formats: [csv, json]}
    seed: 0
    threads: 1
"""
from __future__ import annotations

import copy
import hashlib
import json
from dataclasses import dataclass, field

import yaml

from .errors import ConfigError, DomainError
from .medium import MediumProfile, NonlinearityModel
from .state import POLICIES

SCHEMA_VERSION = 1

DEFAULTS = {
    "medium": {"a0": None, "values": None},
    "model": {"L": 1.0, "L0": None},
    "simulation": {
        "dt": 0.05,
        "t_end": 150.0,
        "window": None,
        "boundary_policy": "dirichlet_stationary_left_zero_right",
        "sample_stride": 0.25,
        "n_max": 8,
    },
    "query": {
        "speed": None,
        "mu": None,
        "lambda": None,
        "speed_window": [50.0, 150.0],
        "tail_range": [10.0, 30.0],
        "M_max": 256,
        "a0_grid": {"start": 0.5, "stop": 4.0, "num": 36},
    },
    "harnack": {"radii": [10, 20, 40], "trials": 20, "eta": 0.5, "theta": [1.0, 2.0, 3.0, 4.0]},
    "output": {"directory": "out", "formats": ["csv", "json"]},
    "seed": 0,
    "threads": 1,
}


def _merge(base, override, path=""):
    out = copy.deepcopy(base)
    for key, val in (override or {}).items():
        where = f"{path}.{key}" if path else key
        if key not in base:
            raise ConfigError(where, "unknown field")
        if isinstance(base[key], dict):
            if not isinstance(val, dict):
                raise ConfigError(where, "expected a mapping")
            out[key] = _merge(base[key], val, where)
        else:
            out[key] = val
    return out


def _num(d, key, where, positive=False, integer=False, allow_none=False):
    v = d[key]
    if v is None and allow_none:
        return None
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{where}.{key}", f"expected a number, got {v!r}")
    if integer and int(v) != v:
        raise ConfigError(f"{where}.{key}", f"expected an integer, got {v!r}")
    if positive and not v > 0:
        raise ConfigError(f"{where}.{key}", f"must be positive, got {v!r}")
    return int(v) if integer else float(v)


def _pair(d, key, where):
    v = d[key]
    if v is None:
        return None
    if not isinstance(v, (list, tuple)) or len(v) != 2:
        raise ConfigError(f"{where}.{key}", "expected a two-element list")
    a, b = v
    if not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in v) or not a < b:
        raise ConfigError(f"{where}.{key}", f"expected increasing numbers, got {v!r}")
    return (a, b)


@dataclass
class ExperimentConfig:
    raw: dict
    medium: MediumProfile
    model: NonlinearityModel
    seed: int
    threads: int
    out_dir: str
    formats: tuple
    sim: dict = field(default_factory=dict)
    query: dict = field(default_factory=dict)
    harnack: dict = field(default_factory=dict)

    @property
    def sha256(self) -> str:
        return config_hash(self.raw)


def config_hash(raw: dict) -> str:
    """Hash of the normalised config, excluding the output location and thread count."""
    body = {k: v for k, v in raw.items() if k not in ("output", "threads")}
    text = json.dumps(body, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(text.encode()).hexdigest()


def build_config(data: dict | None = None, *, seed=None, threads=None, out=None) -> ExperimentConfig:
    if data is not None and not isinstance(data, dict):
        raise ConfigError("<root>", "config must be a mapping")
    raw = _merge(DEFAULTS, data or {})
    if seed is not None:
        raw["seed"] = seed
    if threads is not None:
        raw["threads"] = threads
    if out is not None:
        raw["output"]["directory"] = out

    seed_v = raw["seed"]
    if isinstance(seed_v, bool) or not isinstance(seed_v, int) or not 0 <= seed_v < 2**64:
        raise ConfigError("seed", f"expected an unsigned 64-bit integer, got {seed_v!r}")
    thr = raw["threads"]
    if isinstance(thr, bool) or not isinstance(thr, int) or thr < 1:
        raise ConfigError("threads", f"expected a positive integer, got {thr!r}")

    m = raw["medium"]
    try:
        if m["a0"] is not None and m["values"] is not None:
            raise ConfigError("medium", "give either a0 or values, not both")
        if m["a0"] is not None:
            medium = MediumProfile.single_site(_num(m, "a0", "medium", positive=True))
        elif m["values"] is not None:
            if not isinstance(m["values"], list):
                raise ConfigError("medium.values", "expected a list")
            medium = MediumProfile.from_values(m["values"])
        else:
            medium = MediumProfile.homogeneous()
    except DomainError as exc:
        raise ConfigError("medium", str(exc)) from exc

    md = raw["model"]
    try:
        model = NonlinearityModel(L=_num(md, "L", "model", positive=True), L0=_num(md, "L0", "model", positive=True, allow_none=True))
        model.validate(medium)
    except DomainError as exc:
        raise ConfigError("model", str(exc)) from exc

    s = raw["simulation"]
    sim = {
        "dt": _num(s, "dt", "simulation", positive=True),
        "t_end": _num(s, "t_end", "simulation", positive=True),
        "window": _pair(s, "window", "simulation"),
        "boundary_policy": s["boundary_policy"],
        "sample_stride": _num(s, "sample_stride", "simulation", positive=True),
        "n_max": _num(s, "n_max", "simulation", positive=True, integer=True),
    }
    if sim["dt"] > 0.2:
        raise ConfigError("simulation.dt", "must not exceed 0.2")
    if sim["boundary_policy"] not in POLICIES:
        raise ConfigError("simulation.boundary_policy", f"expected one of {POLICIES}")
    if sim["window"] is not None and (sim["window"][0] > -medium.N - 50 or sim["window"][1] < medium.N + 50):
        raise ConfigError("simulation.window", f"must contain [{-medium.N - 50}, {medium.N + 50}]")

    q = raw["query"]
    grid = q["a0_grid"]
    query = {
        "speed": _num(q, "speed", "query", positive=True, allow_none=True),
        "mu": _num(q, "mu", "query", positive=True, allow_none=True),
        "lambda": _num(q, "lambda", "query", allow_none=True),
        "speed_window": _pair(q, "speed_window", "query"),
        "tail_range": _pair(q, "tail_range", "query"),
        "M_max": _num(q, "M_max", "query", integer=True),
        "a0_grid": (
            _num(grid, "start", "query.a0_grid", positive=True),
            _num(grid, "stop", "query.a0_grid", positive=True),
            _num(grid, "num", "query.a0_grid", positive=True, integer=True),
        ),
    }
    if query["lambda"] is not None and query["lambda"] < 1:
        raise ConfigError("query.lambda", "spectral bound must be >= 1")
    if query["M_max"] <= medium.N:
        raise ConfigError("query.M_max", "must exceed the perturbation radius")

    h = raw["harnack"]
    radii = h["radii"]
    if not isinstance(radii, list) or not radii or not all(isinstance(r, int) and r >= 1 for r in radii):
        raise ConfigError("harnack.radii", "expected a list of positive integers")
    theta = h["theta"]
    if not isinstance(theta, list) or len(theta) != 4 or not 0 < theta[0] < theta[1] < theta[2] < theta[3]:
        raise ConfigError("harnack.theta", "expected four increasing positive numbers")
    eta = _num(h, "eta", "harnack", positive=True)
    if eta >= 1:
        raise ConfigError("harnack.eta", "must lie in (0, 1)")
    harn = {"radii": radii, "trials": _num(h, "trials", "harnack", positive=True, integer=True), "eta": eta, "theta": tuple(theta)}

    o = raw["output"]
    fmts = o["formats"]
    if not isinstance(fmts, list) or not set(fmts) <= {"csv", "json"}:
        raise ConfigError("output.formats", "expected a subset of [csv, json]")
    if not isinstance(o["directory"], str) or not o["directory"]:
        raise ConfigError("output.directory", "expected a path")
    return ExperimentConfig(raw, medium, model, seed_v, thr, o["directory"], tuple(fmts), sim, query, harn)


def load_config(path: str | None, **overrides) -> ExperimentConfig:
    if path is None:
        return build_config(None, **overrides)
    try:
        with open(path) as fh:
            data = yaml.safe_load(fh)
    except OSError as exc:
        raise ConfigError("--config", f"cannot read {path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError("--config", f"invalid YAML: {exc}") from exc
    return build_config(data, **overrides)
