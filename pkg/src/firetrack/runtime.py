"""Synchronous, decentralised step loop for the swarm.

Every control step reads one immutable snapshot of all poses and of the fire,
runs each agent's pipeline (sense, gradient, desired update, potential control,
integrate) against it, and commits the new states together. An agent only ever
sees its own footprint samples and the poses of agents within radius ``r``.
"""

from __future__ import annotations

import math
from concurrent.futures import Executor
from dataclasses import dataclass, replace

import numpy as np

from .coverage import (
    ControllerGains,
    FovSample,
    SingularGradientError,
    gradient_from_sample,
    sample_fov,
    update_desired,
)
from .fire_model import FireState, step_fire
from .potential import AttractGains, SafetyParams, SingularRepulsion, control, integrate
from .sensing import CameraIntrinsics, Pose


@dataclass(frozen=True)
class AgentState:
    id: int
    pose: Pose
    desired: Pose
    zeta: bool
    gains: ControllerGains
    attract: AttractGains
    safety: SafetyParams
    cam: CameraIntrinsics
    aborted: bool = False  # last step was abandoned on a singularity
    zeta_flips: int = 0


@dataclass(frozen=True)
class WorldState:
    agents: tuple[AgentState, ...]
    fire: FireState
    comm_radius: float
    step: int = 0
    fire_step_every: int = 50
    target_cells: int = 1024
    edge_points: int = 64
    fire_seed: int = 0

    def __post_init__(self):
        ids = [a.id for a in self.agents]
        if len(set(ids)) != len(ids):
            raise ValueError("agent ids must be unique")
        if self.comm_radius < 0:
            raise ValueError("comm_radius must be non-negative")
        if self.fire_step_every < 1:
            raise ValueError("fire_step_every must be >= 1")

    def agent(self, agent_id: int) -> AgentState:
        for a in self.agents:
            if a.id == agent_id:
                return a
        raise KeyError(f"unknown agent id {agent_id}")

    def positions(self) -> np.ndarray:
        return np.array([a.pose.as_array() for a in self.agents]).reshape(-1, 3)


class RuntimeAbort(RuntimeError):
    """A pose became non-finite; the run cannot continue."""

    def __init__(self, step: int, agent_id: int):
        super().__init__(f"non-finite pose for agent {agent_id} at step {step}")
        self.step = step
        self.agent_id = agent_id


def physical_neighbors(world: WorldState, agent_id: int) -> list[AgentState]:
    """Agents other than ``agent_id`` within the closed 3D ball of radius r."""
    me = world.agent(agent_id).pose.as_array()
    out = []
    for a in world.agents:
        if a.id == agent_id:
            continue
        if float(np.linalg.norm(a.pose.as_array() - me)) <= world.comm_radius:
            out.append(a)
    return out


def sense_fire(
    agent: AgentState, fire: FireState, target_cells: int = 1024, edge_points: int = 64
) -> tuple[bool, FovSample | None]:
    """Sample the agent's footprint; zeta is set iff any sample is detectable fire.

    A grounded agent has no footprint and reports (False, None).
    """
    if agent.pose.z <= 0:
        return False, None
    sample = sample_fov(agent.pose, agent.cam, fire, target_cells, edge_points)
    return sample.sees_fire(agent.cam), sample


def agent_step(
    agent: AgentState,
    neighbors,
    fire: FireState,
    target_cells: int = 1024,
    edge_points: int = 64,
) -> AgentState:
    """One control step of a single agent against a snapshot.

    ``neighbors`` must hold only physical neighbours; only their poses are read.
    On a singularity the pose is held and ``aborted`` is set.
    """
    zeta, sample = sense_fire(agent, fire, target_cells, edge_points)
    flips = agent.zeta_flips + int(zeta != agent.zeta)
    nb_poses = [n.pose for n in neighbors]
    desired = agent.desired
    try:
        if zeta:
            if not agent.zeta:
                # Tracking (re)starts from where the agent is now.
                desired = agent.pose
            grad = gradient_from_sample(agent.pose, nb_poses, sample, agent.cam)
            desired = update_desired(desired, grad, agent.gains)
        p = agent.pose.as_array()
        u = control(
            p,
            zeta,
            desired.as_array(),
            [q.as_array() for q in nb_poses],
            agent.safety,
            agent.attract,
            ground_repulsion=agent.pose.z > 0,
        )
        new = integrate(p, u, agent.attract.dt)
    except (SingularGradientError, SingularRepulsion):
        return replace(agent, zeta=zeta, aborted=True, zeta_flips=flips)
    if not np.all(np.isfinite(new)):
        raise RuntimeAbort(-1, agent.id)
    return replace(agent, pose=Pose.from_array(new), desired=desired, zeta=zeta, aborted=False, zeta_flips=flips)


def _fire_rng(world: WorldState) -> np.random.Generator:
    # Keyed on the fire clock so a replay never depends on earlier draws.
    return np.random.default_rng([world.fire_seed, world.fire.time])


def world_step(world: WorldState, executor: Executor | None = None) -> WorldState:
    """Advance every agent against one snapshot, then (on cadence) the fire.

    Agents may be evaluated on ``executor``; results are committed in id order,
    so the outcome does not depend on scheduling.
    """
    fire = world.fire
    jobs = [(a, physical_neighbors(world, a.id)) for a in world.agents]

    def run(job):
        a, nbrs = job
        return agent_step(a, nbrs, fire, world.target_cells, world.edge_points)

    try:
        if executor is None:
            results = [run(j) for j in jobs]
        else:
            results = list(executor.map(run, jobs))
    except RuntimeAbort as exc:
        raise RuntimeAbort(world.step + 1, exc.agent_id) from None
    agents = tuple(sorted(results, key=lambda a: a.id))
    next_step = world.step + 1
    if next_step % world.fire_step_every == 0:
        fire = step_fire(fire, _fire_rng(world))
    return replace(world, agents=agents, fire=fire, step=next_step)


def min_pairwise_distance(positions: np.ndarray) -> float:
    """Smallest 3D distance between two agents; inf with fewer than two."""
    if len(positions) < 2:
        return math.inf
    diff = positions[:, None, :] - positions[None, :, :]
    d = np.sqrt(np.sum(diff**2, axis=-1))
    return float(d[np.triu_indices(len(positions), k=1)].min())
