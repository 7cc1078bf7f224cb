"""Run configuration: one JSON file, no environment variables."""

from dataclasses import dataclass, field
import json
from pathlib import Path

from .elliptic import DEFAULT_SCHEDULE
from .errors import ConfigError
from .geometry import DomainSpec
from .moving_plane import SweepConfig
from .nonlinearity import NonlinearitySpec

__all__ = ["Tolerances", "RunConfig", "load_config"]


@dataclass(frozen=True)
class Tolerances:
    newton_tol: float = 1e-10
    linear_tol: float = 1e-10
    stage_tol: float = 1e-8

    def __post_init__(self):
        for name in ("newton_tol", "linear_tol", "stage_tol"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive")


@dataclass
class RunConfig:
    domain: DomainSpec
    h: float
    nonlinearity: NonlinearitySpec
    schedule: tuple = DEFAULT_SCHEDULE
    tolerances: Tolerances = field(default_factory=Tolerances)
    sweep: SweepConfig = field(default_factory=SweepConfig)
    output_dir: str = "out"
    seed: int = 0
    refine_levels: int = 4

    def to_dict(self):
        return {
            "schema": "v1",
            "domain": self.domain.to_dict(),
            "h": self.h,
            "nonlinearity": self.nonlinearity.to_dict(),
            "schedule": list(self.schedule),
            "tolerances": {
                "newton_tol": self.tolerances.newton_tol,
                "linear_tol": self.tolerances.linear_tol,
                "stage_tol": self.tolerances.stage_tol,
            },
            "sweep": self.sweep.to_dict(),
            "output_dir": self.output_dir,
            "seed": self.seed,
            "refine_levels": self.refine_levels,
        }

    @classmethod
    def from_dict(cls, d):
        if d.get("schema", "v1") != "v1":
            raise ConfigError(f"unsupported config schema {d.get('schema')!r}")
        try:
            return cls(
                domain=DomainSpec.from_dict(d["domain"]),
                h=float(d["h"]),
                nonlinearity=NonlinearitySpec.from_dict(d["nonlinearity"]),
                schedule=tuple(int(n) for n in d.get("schedule", DEFAULT_SCHEDULE)),
                tolerances=Tolerances(**d.get("tolerances", {})),
                sweep=SweepConfig.from_dict(d.get("sweep", {})),
                output_dir=str(d.get("output_dir", "out")),
                seed=int(d.get("seed", 0)),
                refine_levels=int(d.get("refine_levels", 4)),
            )
        except (KeyError, TypeError) as exc:
            raise ConfigError(f"bad config: {exc}") from None

    def dumps(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


def load_config(path):
    path = Path(path)
    try:
        return RunConfig.from_dict(json.loads(path.read_text()))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from None
