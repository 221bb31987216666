"""Experiment configuration and its file format.

Config files are TOML with optional sections::

    [grid]      M, W, M1, M2, Omega, Delta
    [ensemble]  R, S, mode ("matrix" or "signal")
    [solver]    any L1SolverParams field
    [run]       seed, snr_db, threshold, trials, workers

Unspecified ``M2`` defaults to ``max(R + ceil(log2 W), 2R)`` and ``M1`` to
``M - M2``.  Command-line flags override file values.
"""

from __future__ import annotations

import math
import sys
from dataclasses import asdict, dataclass, field, fields, replace
from typing import Optional

from ..errors import InvalidParameterError
from ..metrics import SUCCESS_THRESHOLD
from ..operators import GridConfig
from ..recovery import L1SolverParams

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib


def default_m2(R: int, W: int) -> int:
    return max(R + math.ceil(math.log2(W)), 2 * R)


@dataclass(frozen=True)
class ExperimentConfig:
    M: int
    W: int
    R: int
    S: int
    Omega: int
    Delta: int
    M2: Optional[int] = None
    mode: str = "matrix"
    snr_db: float = math.inf
    threshold: float = SUCCESS_THRESHOLD
    solver: L1SolverParams = field(default_factory=L1SolverParams)

    def __post_init__(self):
        if self.mode not in ("matrix", "signal"):
            raise InvalidParameterError(f"unknown ensemble mode {self.mode!r}")
        m2 = self.m2
        if m2 < self.R:
            raise InvalidParameterError(f"M2={m2} is smaller than R={self.R}")
        if self.M - m2 < 1:
            raise InvalidParameterError(f"M={self.M} leaves no channel for the fast branch (M2={m2})")

    @property
    def m2(self) -> int:
        return default_m2(self.R, self.W) if self.M2 is None else self.M2

    @property
    def m1(self) -> int:
        return self.M - self.m2

    @property
    def csr(self) -> int:
        return self.m1 * self.Omega + self.m2 * self.Delta

    def grid(self, seed: int = 0) -> GridConfig:
        return GridConfig(M=self.M, W=self.W, M1=self.m1, M2=self.m2,
                          Omega=self.Omega, Delta=self.Delta, seed=seed)

    def with_(self, **changes) -> "ExperimentConfig":
        return replace(self, **changes)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["M1"], d["M2"] = self.m1, self.m2
        d["snr_db"] = None if math.isinf(self.snr_db) else self.snr_db
        d["solver"]["band"] = list(self.solver.band)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        d = dict(d)
        d.pop("M1", None)
        solver = d.pop("solver", None) or {}
        if isinstance(solver, dict):
            if "band" in solver:
                solver = dict(solver, band=tuple(solver["band"]))
            solver = L1SolverParams(**solver)
        if d.get("snr_db") is None:
            d["snr_db"] = math.inf
        known = {f.name for f in fields(cls)}
        extra = set(d) - known
        if extra:
            raise InvalidParameterError(f"unknown config keys: {sorted(extra)}")
        return cls(solver=solver, **d)


def load_config_file(path) -> dict:
    """Flatten a TOML config into ``{"config": {...}, "run": {...}}``."""
    with open(path, "rb") as fh:
        raw = tomllib.load(fh)
    cfg = {}
    for section in ("grid", "ensemble"):
        cfg.update(raw.get(section, {}))
    if "solver" in raw:
        cfg["solver"] = dict(raw["solver"])
    for key, val in raw.items():
        if not isinstance(val, dict):
            cfg[key] = val
    run = dict(raw.get("run", {}))
    for key in ("snr_db", "threshold", "mode"):
        if key in run:
            cfg[key] = run.pop(key)
    return {"config": cfg, "run": run}
