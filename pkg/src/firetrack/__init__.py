"""Decentralised camera-drone coverage and tracking of a spreading wildfire."""

from .config import ScenarioConfig, load_bundled, load_config
from .coverage import ControllerGains, GradientResult, local_gradient, objective_H, update_desired
from .fire_model import FireState, SpreadParams, WindModel, intensity_at, step_fire
from .harness import build_world, run
from .potential import AttractGains, SafetyParams, control, integrate
from .runtime import AgentState, WorldState, agent_step, physical_neighbors, world_step
from .sensing import CameraIntrinsics, Pose, fov_rect, joint_cost

__all__ = [
    "AgentState",
    "AttractGains",
    "CameraIntrinsics",
    "ControllerGains",
    "FireState",
    "GradientResult",
    "Pose",
    "SafetyParams",
    "ScenarioConfig",
    "SpreadParams",
    "WindModel",
    "WorldState",
    "agent_step",
    "build_world",
    "control",
    "fov_rect",
    "integrate",
    "intensity_at",
    "joint_cost",
    "load_bundled",
    "load_config",
    "local_gradient",
    "objective_H",
    "physical_neighbors",
    "run",
    "step_fire",
    "update_desired",
    "world_step",
]
