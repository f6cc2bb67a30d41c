"""Scenario construction and the deterministic run loop that writes artifacts."""

from __future__ import annotations

import csv
import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .config import ScenarioConfig
from .fire_model import Extent, intensity_grid, seed_fire, write_intensity_csv
from .metrics import FieldCache, MetricsRecord, compute_metrics
from .render import render_svg, world_snapshot, write_snapshot
from .runtime import AgentState, WorldState, world_step
from .sensing import Pose

log = logging.getLogger("firetrack")

TRAJECTORY_COLUMNS = ["step", "agent_id", "x", "y", "z", "zeta", "desired_x", "desired_y", "desired_z"]


def build_world(cfg: ScenarioConfig) -> WorldState:
    """Initial world: seeded fire plus grounded agents jittered around the launch point."""
    fire_ss, agent_ss = np.random.SeedSequence(cfg.scenario.seed).spawn(2)
    f = cfg.fire
    fire = seed_fire(
        f.source_count,
        f.center,
        f.scatter_radius,
        f.sigma,
        cfg.wind_model(),
        cfg.spread_params(),
        np.random.default_rng(fire_ss),
    )
    rng = np.random.default_rng(agent_ss)
    a = cfg.agents
    r = a.jitter_radius * np.sqrt(rng.random(a.count))
    phi = 2.0 * math.pi * rng.random(a.count)
    cam = cfg.camera_intrinsics()
    gains, attract, safety = cfg.controller_gains(), cfg.attract_gains(), cfg.safety_params()
    agents = []
    for i in range(a.count):
        pose = Pose(a.center[0] + r[i] * math.cos(phi[i]), a.center[1] + r[i] * math.sin(phi[i]), 0.0)
        agents.append(AgentState(i, pose, pose, False, gains, attract, safety, cam))
    return WorldState(
        agents=tuple(agents),
        fire=fire,
        comm_radius=cfg.safety.comm_radius,
        fire_step_every=f.step_every,
        target_cells=cfg.coverage.target_cells,
        edge_points=cfg.coverage.edge_points,
        fire_seed=cfg.scenario.seed,
    )


def _fmt(v: float) -> str:
    return f"{v:.9g}"


def trajectory_rows(world: WorldState):
    for a in world.agents:
        yield [
            str(world.step),
            str(a.id),
            _fmt(a.pose.x),
            _fmt(a.pose.y),
            _fmt(a.pose.z),
            str(int(a.zeta)),
            _fmt(a.desired.x),
            _fmt(a.desired.y),
            _fmt(a.desired.z),
        ]


def snapshot_raster(world: WorldState, cfg: ScenarioConfig):
    m = cfg.metrics
    ext = Extent(*m.extent)
    return intensity_grid(world.fire, ext, ext.width / m.cells)


def render_world(world: WorldState, cfg: ScenarioConfig, trails=None) -> str:
    return render_svg(world_snapshot(world, snapshot_raster(world, cfg), trails))


@dataclass
class RunResult:
    world: WorldState
    metrics: list[MetricsRecord]


def _write_snapshot(world: WorldState, cfg: ScenarioConfig, out: Path, trails) -> None:
    raster = snapshot_raster(world, cfg)
    tag = f"{world.step:06d}"
    write_intensity_csv(raster, out / f"intensity_{tag}.csv")
    # Every tenth position keeps the polylines light.
    snap = world_snapshot(world, raster, {k: v[::10] + v[-1:] for k, v in trails.items()})
    write_snapshot(snap, out / f"world_{tag}.json")
    (out / f"snapshot_{tag}.svg").write_text(render_svg(snap))


def run(
    cfg: ScenarioConfig,
    out_dir=None,
    steps: int | None = None,
    snapshot_every: int | None = None,
    workers: int | None = None,
    progress_every: int = 500,
) -> RunResult:
    """Run a scenario for ``steps`` control steps, writing artifacts to ``out_dir``.

    With ``out_dir=None`` nothing is written and only the metrics are kept.
    Raises :class:`RuntimeAbort` if a pose turns non-finite; rows up to the
    previous step are already on disk.
    """
    steps = cfg.scenario.steps if steps is None else steps
    snapshot_every = cfg.scenario.snapshot_every if snapshot_every is None else snapshot_every
    workers = cfg.scenario.workers if workers is None else workers
    if steps < 0 or snapshot_every < 1 or workers < 1:
        raise ValueError("steps must be >= 0, snapshot_every and workers >= 1")
    world = build_world(cfg)
    cache = FieldCache(world.agents[0].cam if world.agents else cfg.camera_intrinsics(), cfg.metrics_grid(),
                       cfg.metrics.supersample)
    metrics = [compute_metrics(world, cache)]
    trails = {a.id: [a.pose.as_array()] for a in world.agents}

    out = Path(out_dir) if out_dir is not None else None
    files = []
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        traj_fh = open(out / "trajectories.csv", "w", newline="")
        met_fh = open(out / "metrics.csv", "w", newline="")
        files = [traj_fh, met_fh]
        traj = csv.writer(traj_fh, lineterminator="\n")
        met = csv.writer(met_fh, lineterminator="\n")
        traj.writerow(TRAJECTORY_COLUMNS)
        traj.writerows(trajectory_rows(world))
        met.writerow(MetricsRecord.columns())
        met.writerow(metrics[0].row())
        _write_snapshot(world, cfg, out, trails)

    executor = ThreadPoolExecutor(max_workers=workers) if workers > 1 else None
    try:
        for _ in range(steps):
            world = world_step(world, executor)
            rec = compute_metrics(world, cache)
            metrics.append(rec)
            for a in world.agents:
                trails[a.id].append(a.pose.as_array())
            if out is not None:
                traj.writerows(trajectory_rows(world))
                met.writerow(rec.row())
                if world.step % snapshot_every == 0 or world.step == steps:
                    _write_snapshot(world, cfg, out, trails)
            if progress_every and world.step % progress_every == 0:
                log.info(
                    "step %d  H=%.6g  min_dist=%.3f  min_z=%.3f  zeta=%d  sources=%d",
                    world.step, rec.objective_H, rec.min_pairwise_distance, rec.min_altitude,
                    rec.zeta_count, world.fire.n_sources,
                )
    finally:
        if executor is not None:
            executor.shutdown()
        for fh in files:
            fh.close()
    return RunResult(world, metrics)


def configure_logging(quiet: bool = False) -> None:
    level = os.environ.get("FIRETRACK_LOG_LEVEL", "WARNING" if quiet else "INFO").upper()
    logging.basicConfig(level=getattr(logging, level, logging.INFO), format="%(levelname)s %(message)s")
