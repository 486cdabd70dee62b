from __future__ import annotations

import json
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Optional, Union

from .contfrac import DEFAULT_DEPTH_CAP
from .flatsurf import slit_threshold


@dataclass(frozen=True)
class EpsilonRule:
    """Geometric schedule eps_j = start * ratio**(j-1)."""

    start: float = 0.4
    ratio: float = 0.8

    def __post_init__(self):
        if not 0 < self.start < 0.5:
            raise ValueError("eps_1 must lie in (0, 1/2)")
        if not 0 < self.ratio < 1:
            raise ValueError("epsilon ratio must lie in (0, 1)")

    def __call__(self, j: int) -> float:
        return self.start * self.ratio ** (j - 1)


@dataclass(frozen=True)
class RunConfig:
    K: int = 25
    epsilon_start: float = 0.4
    epsilon_ratio: float = 0.8
    s: Union[str, float] = "auto"
    epsilon0: float = 1.0
    r0: float = 0.25
    R: float = 2.0
    digit_cap: int = 1000
    exp_digits: bool = True
    depth_cap: int = DEFAULT_DEPTH_CAP
    closeness: float = 0.25
    insertion_cap: int = 60
    horoball_scale: float = 1.0
    horoball_offset: float = 0.0
    seed: int = 0
    grid_density: int = 10
    mesh: float = 0.05
    out: Optional[str] = None

    def __post_init__(self):
        if self.K < 2:
            raise ValueError("K must be >= 2")
        for name in ("digit_cap", "depth_cap", "insertion_cap", "grid_density"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.epsilon0 <= 0 or self.r0 <= 0 or self.mesh <= 0:
            raise ValueError("epsilon0, r0 and mesh must be positive")
        if self.R < 0:
            raise ValueError("R must be non-negative")
        if not 0 < self.closeness < 1:
            raise ValueError("closeness must lie in (0, 1)")
        if self.s != "auto":
            s = float(self.s)
            if not 0 < s < 1:
                raise ValueError("slit length must lie in (0, 1)")
            object.__setattr__(self, "s", s)
        EpsilonRule(self.epsilon_start, self.epsilon_ratio)

    @property
    def epsilon_rule(self) -> EpsilonRule:
        return EpsilonRule(self.epsilon_start, self.epsilon_ratio)

    @property
    def slit(self) -> float:
        threshold = slit_threshold(self.epsilon0, self.r0)
        return threshold if self.s == "auto" else float(self.s)

    @property
    def slit_within_threshold(self) -> bool:
        return self.slit <= slit_threshold(self.epsilon0, self.r0)

    @classmethod
    def from_file(cls, path, **overrides) -> "RunConfig":
        data = json.loads(Path(path).read_text())
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        data.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**data)

    def to_dict(self) -> dict:
        return asdict(self)
