"""Run configuration: scenario parameters plus run controls, stored as JSON."""

import json
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Dict

from .scenario import ScenarioParams


class ConfigError(ValueError):
    pass


@dataclass
class ScenarioConfig:
    # physics
    eps: float = 1.0
    r: float = 0.5
    n_k: int = 2
    alpha: float = 5.0
    c1: float = 0.0
    c2: float = 0.0
    dim: int = 16
    # time window of the closed-form checks and Figure 3
    t0: float = -25.0
    t1: float = 60.0
    dt: float = 1e-3
    samples: int = 10_000
    # nonlinear oracle window, started from rho(0)
    oracle_t1: float = 20.0
    # quadrature grid
    x_bound: float = 12.0
    x_points: int = 4801
    # figure export grids
    fig_x_bound: float = 8.0
    fig_x_points: int = 321
    fig2_t: tuple = (0.0, 20.0, 201)
    fig3_t: tuple = (-25.0, 60.0, 341)
    fig1_t: tuple = (-100.0, 150.0, 2501)
    fig1_alphas: tuple = (5.0, 100.0, 20)
    output_stride: int = 100
    # verification
    tol_scale: float = 1.0
    tolerances: Dict[str, float] = field(default_factory=dict)
    report: str = "verify_report.json"

    def __post_init__(self):
        for name in ("fig2_t", "fig3_t", "fig1_t", "fig1_alphas"):
            value = getattr(self, name)
            if len(value) != 3:
                raise ConfigError(f"{name} must be [start, stop, count]")
            setattr(self, name, (float(value[0]), float(value[1]), int(value[2])))
        if not self.dt > 0:
            raise ConfigError("dt must be positive")
        if self.samples < 3:
            raise ConfigError("samples must be >= 3")
        try:
            self.params
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    @property
    def params(self) -> ScenarioParams:
        return ScenarioParams(self.eps, self.r, int(self.n_k), self.alpha, self.c1, self.c2, int(self.dim))

    def to_dict(self) -> dict:
        out = asdict(self)
        for name in ("fig2_t", "fig3_t", "fig1_t", "fig1_alphas"):
            out[name] = list(out[name])
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, data: dict) -> "ScenarioConfig":
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        try:
            return cls(**data)
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc

    @classmethod
    def from_json(cls, text: str) -> "ScenarioConfig":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON: {exc}") from exc
        return cls.from_dict(data)

    @classmethod
    def load(cls, path) -> "ScenarioConfig":
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read {path}: {exc}") from exc
        return cls.from_json(text)

    def save(self, path) -> None:
        Path(path).write_text(self.to_json() + "\n", encoding="utf-8")
