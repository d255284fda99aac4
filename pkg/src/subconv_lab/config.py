"""Run configuration: a flat INI file (configparser) with a stable hash.

Example::

    [run]
    seed = 0
    workers = 4
    out = reports
    grid = small

    [guards]
    deligne = 20

    [pipeline]
    N = 500
    M1 = 5
    M2 = 7

Unknown sections or keys are rejected.  The config hash is the SHA-256 of the
resolved settings serialized as sorted JSON (``out`` and ``workers`` excluded),
so two files that resolve to the same settings hash identically.
"""

from __future__ import annotations

import configparser
import hashlib
import json
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from .errors import UsageError


@dataclass(frozen=True)
class Guards:
    c_error: float = 1.5
    astar: float = 4.0
    bstar_diagonal: float = 2.0
    deligne: float = 20.0
    istar: float = 50.0
    ramanujan: float = 10.0


@dataclass(frozen=True)
class Tolerances:
    identity: float = 1e-6
    gauss: float = 1e-9
    delta: float = 1e-8
    circle: float = 1e-6
    split: float = 1e-8
    poisson: float = 1e-4
    tail: float = 1e-6
    voronoi: float = 1e-3
    voronoi_step: float = 5e-2


@dataclass(frozen=True)
class AnalyticKnobs:
    sigma: float = -0.5
    tolerance: float = 1e-6
    max_height: float = 12800.0


@dataclass(frozen=True)
class PipelineKnobs:
    N: float = 500.0
    M1: int = 5
    M2: int = 7
    chi1: int = -1  # -1: lowest-index primitive character
    chi2: int = -1


@dataclass(frozen=True)
class RunConfig:
    seed: int = 0
    workers: int = 1
    out: str = "reports"
    grid: str = "small"
    cmax: int = 1000
    m1: tuple[int, ...] = (5, 7, 11, 13)
    guards: Guards = field(default_factory=Guards)
    tolerances: Tolerances = field(default_factory=Tolerances)
    analytic: AnalyticKnobs = field(default_factory=AnalyticKnobs)
    pipeline: PipelineKnobs = field(default_factory=PipelineKnobs)

    def __post_init__(self):
        if self.workers < 1:
            raise UsageError("worker count must be >= 1")
        if self.grid not in ("small", "full"):
            raise UsageError(f"grid must be 'small' or 'full', got {self.grid!r}")
        for name, v in asdict(self.guards).items():
            if not v > 0:
                raise UsageError(f"guard {name} must be positive")
        for name, v in asdict(self.tolerances).items():
            if not 0 < v < 1:
                raise UsageError(f"tolerance {name} must lie in (0, 1)")
        if not 0 < self.analytic.tolerance < 1:
            raise UsageError("analytic.tolerance must lie in (0, 1)")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["m1"] = list(self.m1)
        return d

    @property
    def config_hash(self) -> str:
        # where reports go and how many processes compute them do not change the numbers
        d = {k: v for k, v in self.to_dict().items() if k not in _UNHASHED}
        blob = json.dumps(d, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()

    def rng(self) -> np.random.Generator:
        """The seeded sampler used for grid subsampling."""
        return np.random.default_rng(self.seed)


_UNHASHED = ("out", "workers")
_SECTIONS = {"guards": Guards, "tolerances": Tolerances, "analytic": AnalyticKnobs, "pipeline": PipelineKnobs}
_RUN_KEYS = {f.name: f.type for f in fields(RunConfig) if f.name not in _SECTIONS}


def _coerce(kind, text: str, key: str):
    try:
        if kind in (int, "int"):
            return int(text)
        if kind in (float, "float"):
            return float(text)
        if kind in ("tuple[int, ...]",):
            return tuple(int(t) for t in text.replace(",", " ").split())
        return text.strip()
    except ValueError as exc:
        raise UsageError(f"bad value for {key}: {text!r}") from exc


def load_config(path: str | Path | None = None, **overrides) -> RunConfig:
    """Read ``path`` (if given), then apply keyword overrides for run-level keys."""
    cfg = RunConfig()
    if path is not None:
        parser = configparser.ConfigParser()
        parser.optionxform = str  # keep key case (N, M1)
        try:
            with open(path, encoding="utf-8") as fh:
                parser.read_file(fh)
        except OSError as exc:
            raise UsageError(f"cannot read config {path}: {exc}") from exc
        except configparser.Error as exc:
            raise UsageError(f"malformed config {path}: {exc}") from exc
        run_kw, sub = {}, {}
        for section in parser.sections():
            if section == "run":
                for k, v in parser[section].items():
                    if k not in _RUN_KEYS:
                        raise UsageError(f"unknown key run.{k}")
                    run_kw[k] = _coerce(_RUN_KEYS[k], v, f"run.{k}")
            elif section in _SECTIONS:
                cls = _SECTIONS[section]
                types = {f.name: f.type for f in fields(cls)}
                kw = {}
                for k, v in parser[section].items():
                    if k not in types:
                        raise UsageError(f"unknown key {section}.{k}")
                    kw[k] = _coerce(types[k], v, f"{section}.{k}")
                sub[section] = cls(**kw)
            else:
                raise UsageError(f"unknown config section [{section}]")
        cfg = RunConfig(**run_kw, **sub)
    clean = {k: v for k, v in overrides.items() if v is not None}
    if clean:
        cfg = replace(cfg, **clean)
    return cfg
