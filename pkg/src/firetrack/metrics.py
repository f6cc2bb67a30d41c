"""Per-step global diagnostics. Nothing here is visible to the agents."""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass

import numpy as np

from .coverage import CoverageField, GridSpec, coverage_field
from .runtime import WorldState, min_pairwise_distance
from .sensing import CameraIntrinsics


@dataclass(frozen=True)
class MetricsRecord:
    step: int
    objective_H: float
    min_pairwise_distance: float
    min_altitude: float
    covered_fire_fraction: float
    mean_x: float
    mean_y: float
    mean_z: float
    altitude_std: float
    zeta_count: int
    aborted_agent_steps: int
    zeta_flips: int

    @classmethod
    def columns(cls) -> list[str]:
        return [f.name for f in dataclasses.fields(cls)]

    def row(self) -> list[str]:
        return [_fmt(getattr(self, name)) for name in self.columns()]


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return f"{float(v):.9g}"


class FieldCache:
    """Holds the tabulated objective integrand for the current fire snapshot."""

    def __init__(self, cam: CameraIntrinsics, grid: GridSpec, supersample: int = 4):
        self.cam = cam
        self.grid = grid
        self.supersample = supersample
        self._fire = None
        self._field: CoverageField | None = None

    def get(self, world: WorldState) -> CoverageField:
        if self._fire is not world.fire:
            self._field = coverage_field(world.fire, self.cam, self.grid, self.supersample)
            self._fire = world.fire
        return self._field


def compute_metrics(world: WorldState, cache: FieldCache) -> MetricsRecord:
    cam = cache.cam
    poses = [a.pose for a in world.agents]
    pos = world.positions()
    fld = cache.get(world)
    n = len(poses)
    return MetricsRecord(
        step=world.step,
        objective_H=fld.objective(poses, cam),
        min_pairwise_distance=min_pairwise_distance(pos),
        min_altitude=float(pos[:, 2].min()) if n else math.inf,
        covered_fire_fraction=fld.covered_fraction(poses, cam),
        mean_x=float(pos[:, 0].mean()) if n else math.nan,
        mean_y=float(pos[:, 1].mean()) if n else math.nan,
        mean_z=float(pos[:, 2].mean()) if n else math.nan,
        altitude_std=float(pos[:, 2].std()) if n else math.nan,
        zeta_count=sum(int(a.zeta) for a in world.agents),
        aborted_agent_steps=sum(int(a.aborted) for a in world.agents),
        zeta_flips=sum(a.zeta_flips for a in world.agents),
    )
