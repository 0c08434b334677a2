"""ExperimentConfig: validated run parameters shared by the CLI and the harness."""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path

import schemas
from experiments.defaults import GOOD_EVENT_K_GRID
from weights import SiteSign, WeightSpec

EXPERIMENTS = ("flt", "rayknight", "gamma", "toth", "driftrange", "qv",
               "goodevent", "urnlaw", "lipschitz", "rho")

# Fields an experiment cannot run without (beyond the always-required ones).
REQUIRED = {
    "toth": ("m",),
    "urnlaw": ("m",),
    "rho": ("m",),
    "lipschitz": ("n_grid",),
}


class InvalidConfig(ValueError):
    code = "BAD_REQUEST"

    def __init__(self, errors: list[str]):
        super().__init__("; ".join(errors))
        self.errors = errors


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    spec: WeightSpec
    n: int
    reps: int
    t: float
    seed: int
    out: str
    format: str = "csv"
    workers: int | None = None
    y0: float = 1.0
    variant: str = "backward"
    sign: str = "positive"
    m: int | None = None
    k_grid: tuple[float, ...] = field(default=GOOD_EVENT_K_GRID)
    n_grid: tuple[int, ...] | None = None
    lam_grid: tuple[float, ...] | None = None

    def to_dict(self) -> dict:
        out = {
            "experiment": self.experiment,
            "spec": self.spec.to_dict(),
            "n": self.n,
            "reps": self.reps,
            "t": self.t,
            "seed": self.seed,
            "out": self.out,
            "format": self.format,
            "y0": self.y0,
            "variant": self.variant,
            "sign": self.sign,
            "k_grid": list(self.k_grid),
        }
        for name in ("workers", "m", "n_grid", "lam_grid"):
            value = getattr(self, name)
            if value is not None:
                out[name] = list(value) if isinstance(value, tuple) else value
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        errors = schemas.check("EXPERIMENT_CONFIG", data)
        if errors:
            raise InvalidConfig(errors)
        kwargs = dict(data)
        kwargs["spec"] = WeightSpec.from_dict(data["spec"])
        for name in ("k_grid", "n_grid", "lam_grid"):
            if name in kwargs:
                kwargs[name] = tuple(kwargs[name])
        cfg = cls(**kwargs)
        cfg.validate()
        return cfg

    @classmethod
    def load(cls, path: str | Path) -> "ExperimentConfig":
        with open(path) as f:
            return cls.from_dict(json.load(f))

    def with_(self, **changes) -> "ExperimentConfig":
        return replace(self, **changes)

    @property
    def site_sign(self) -> SiteSign:
        return SiteSign.parse(self.sign)

    @property
    def grid(self) -> tuple[int, ...]:
        """n_grid if given, else (n,)."""
        return self.n_grid or (self.n,)

    def validate(self) -> "ExperimentConfig":
        errors = schemas.check("EXPERIMENT_CONFIG", self.to_dict())
        for name in REQUIRED.get(self.experiment, ()):
            if getattr(self, name) is None:
                errors.append(f"{name}: required for experiment {self.experiment!r}")
        if errors:
            raise InvalidConfig(errors)
        return self
