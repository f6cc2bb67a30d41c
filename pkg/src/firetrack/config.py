"""Scenario configuration: TOML files grouped by section, validated at load.

Every key is addressed as ``section.key``. Unknown keys and invariant
violations raise :class:`ConfigError` naming the offending key.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import tomli

from .coverage import ControllerGains, GridSpec
from .fire_model import Extent, SpreadParams, WindModel
from .potential import AttractGains, SafetyParams
from .sensing import CameraIntrinsics

BUNDLED = ("scenario_border_focus", "scenario_uniform")


class ConfigError(ValueError):
    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key


@dataclass(frozen=True)
class ScenarioSection:
    name: str = "scenario"
    seed: int = 0
    steps: int = 6000
    dt: float = 1.0
    snapshot_every: int = 1000
    workers: int = 1


@dataclass(frozen=True)
class AgentsSection:
    count: int = 10
    center: tuple[float, float] = (300.0, 300.0)
    jitter_radius: float = 20.0


@dataclass(frozen=True)
class FireSection:
    source_count: int = 5
    center: tuple[float, float] = (500.0, 500.0)
    scatter_radius: float = 30.0
    sigma: tuple[float, float] = (10.0, 10.0)
    spread_rate: float = 0.25
    dt: float = 50.0
    min_front_separation: float = 5.0
    step_every: int = 50
    wind_shared: bool = False
    retire_parents: bool = False


@dataclass(frozen=True)
class WindSection:
    mean_direction: float = math.pi / 8  # radians, from north, clockwise
    std_direction: float = 1.0
    mean_speed: float = 5.0
    std_speed: float = 2.0


@dataclass(frozen=True)
class CameraSection:
    focal_length: float = 10.0
    pixel_area: float = 1e-4
    half_angles_deg: tuple[float, float] = (30.0, 45.0)
    intensity_min: float = 0.005
    intensity_max: float = 0.1
    importance_gain: float = 1.0
    regularizer: float = 1.5e-5
    importance_mode: str = "border"


@dataclass(frozen=True)
class CoverageSection:
    lateral_gain: float = 1e-9
    vertical_gain: float = 2e-10
    gradient_clip: float = 0.0  # 0 disables clipping
    target_cells: int = 1024
    edge_points: int = 64


@dataclass(frozen=True)
class SafetySection:
    safe_distance: float = 10.0
    min_altitude: float = 15.0
    neighbor_gain: float = 2.1
    ground_gain: float = 1e3
    comm_radius: float = 500.0
    max_altitude: float = 120.0


@dataclass(frozen=True)
class PotentialSection:
    rendezvous_gain: float = 0.06
    desired_gain: float = 0.06
    rendezvous: tuple[float, float, float] = (500.0, 500.0, 60.0)


@dataclass(frozen=True)
class MetricsSection:
    extent: tuple[float, float, float, float] = (200.0, 200.0, 1100.0, 1100.0)
    cells: int = 128
    supersample: int = 4


SECTIONS = {
    "scenario": ScenarioSection,
    "agents": AgentsSection,
    "fire": FireSection,
    "wind": WindSection,
    "camera": CameraSection,
    "coverage": CoverageSection,
    "safety": SafetySection,
    "potential": PotentialSection,
    "metrics": MetricsSection,
}


@dataclass(frozen=True)
class ScenarioConfig:
    scenario: ScenarioSection = field(default_factory=ScenarioSection)
    agents: AgentsSection = field(default_factory=AgentsSection)
    fire: FireSection = field(default_factory=FireSection)
    wind: WindSection = field(default_factory=WindSection)
    camera: CameraSection = field(default_factory=CameraSection)
    coverage: CoverageSection = field(default_factory=CoverageSection)
    safety: SafetySection = field(default_factory=SafetySection)
    potential: PotentialSection = field(default_factory=PotentialSection)
    metrics: MetricsSection = field(default_factory=MetricsSection)

    def with_overrides(self, **dotted) -> "ScenarioConfig":
        """Copy with ``section__key=value`` overrides, re-validated."""
        data = to_dict(self)
        for k, v in dotted.items():
            section, key = k.split("__", 1)
            data.setdefault(section, {})[key] = v
        return from_dict(data)

    # Domain objects built from the flat sections.

    def camera_intrinsics(self) -> CameraIntrinsics:
        c = self.camera
        return CameraIntrinsics(
            focal_length=c.focal_length,
            pixel_area=c.pixel_area,
            half_angles=tuple(math.radians(a) for a in c.half_angles_deg),
            intensity_min=c.intensity_min,
            intensity_max=c.intensity_max,
            importance_gain=c.importance_gain,
            regularizer=c.regularizer,
            uniform_importance=c.importance_mode == "uniform",
        )

    def controller_gains(self) -> ControllerGains:
        c = self.coverage
        clip = c.gradient_clip if c.gradient_clip > 0 else None
        return ControllerGains(c.lateral_gain, c.vertical_gain, self.scenario.dt, clip)

    def attract_gains(self) -> AttractGains:
        p = self.potential
        return AttractGains(p.rendezvous_gain, p.desired_gain, tuple(p.rendezvous), self.scenario.dt)

    def safety_params(self) -> SafetyParams:
        s = self.safety
        return SafetyParams(s.safe_distance, s.min_altitude, s.neighbor_gain, s.ground_gain)

    def wind_model(self) -> WindModel:
        w = self.wind
        return WindModel(w.mean_direction, w.std_direction, w.mean_speed, w.std_speed)

    def spread_params(self) -> SpreadParams:
        f = self.fire
        return SpreadParams(f.spread_rate, f.dt, f.min_front_separation, f.wind_shared, f.retire_parents)

    def metrics_grid(self) -> GridSpec:
        m = self.metrics
        return GridSpec(Extent(*m.extent), m.cells, m.cells)


def _coerce(key: str, value, default):
    if isinstance(default, bool):
        if not isinstance(value, bool):
            raise ConfigError(key, "expected true or false")
        return value
    if isinstance(default, int):
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(key, "expected an integer")
        return value
    if isinstance(default, float):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(key, "expected a number")
        return float(value)
    if isinstance(default, str):
        if not isinstance(value, str):
            raise ConfigError(key, "expected a string")
        return value
    if isinstance(default, tuple):
        if not isinstance(value, (list, tuple)) or len(value) != len(default):
            raise ConfigError(key, f"expected a list of {len(default)} numbers")
        return tuple(_coerce(key, v, d) for v, d in zip(value, default))
    raise ConfigError(key, "unsupported value")


def from_dict(data: dict) -> ScenarioConfig:
    sections = {}
    for name, body in data.items():
        if name not in SECTIONS:
            raise ConfigError(name, "unknown section")
        if not isinstance(body, dict):
            raise ConfigError(name, "expected a table")
        cls = SECTIONS[name]
        defaults = {f.name: f.default for f in dataclasses.fields(cls)}
        values = {}
        for key, value in body.items():
            if key not in defaults:
                raise ConfigError(f"{name}.{key}", "unknown key")
            values[key] = _coerce(f"{name}.{key}", value, defaults[key])
        sections[name] = cls(**values)
    cfg = ScenarioConfig(**sections)
    validate(cfg)
    return cfg


def to_dict(cfg: ScenarioConfig) -> dict:
    out = {}
    for name in SECTIONS:
        sec = getattr(cfg, name)
        out[name] = {f.name: getattr(sec, f.name) for f in dataclasses.fields(sec)}
    return out


def _check(cond: bool, key: str, message: str):
    if not cond:
        raise ConfigError(key, message)


def validate(cfg: ScenarioConfig) -> None:
    """Re-check every module invariant plus the cross-section constraints."""
    s, a, f, c, cov, saf, m = (
        cfg.scenario, cfg.agents, cfg.fire, cfg.camera, cfg.coverage, cfg.safety, cfg.metrics
    )
    _check(s.steps >= 0, "scenario.steps", "must be >= 0")
    _check(s.dt > 0, "scenario.dt", "must be positive")
    _check(s.snapshot_every >= 1, "scenario.snapshot_every", "must be >= 1")
    _check(s.workers >= 1, "scenario.workers", "must be >= 1")
    _check(a.count >= 0, "agents.count", "must be >= 0")
    _check(a.jitter_radius >= 0, "agents.jitter_radius", "must be >= 0")
    _check(f.source_count >= 1, "fire.source_count", "must be >= 1")
    _check(f.scatter_radius >= 0, "fire.scatter_radius", "must be >= 0")
    _check(min(f.sigma) > 0, "fire.sigma", "deviations must be positive")
    _check(f.spread_rate >= 0, "fire.spread_rate", "must be >= 0")
    _check(f.dt > 0, "fire.dt", "must be positive")
    _check(f.min_front_separation >= 0, "fire.min_front_separation", "must be >= 0")
    _check(f.step_every >= 1, "fire.step_every", "must be >= 1")
    _check(cfg.wind.std_direction >= 0, "wind.std_direction", "must be >= 0")
    _check(cfg.wind.std_speed >= 0, "wind.std_speed", "must be >= 0")
    _check(c.focal_length > 0, "camera.focal_length", "must be positive")
    _check(c.pixel_area > 0, "camera.pixel_area", "must be positive")
    _check(all(0 < t < 90 for t in c.half_angles_deg), "camera.half_angles_deg", "must lie in (0, 90)")
    _check(c.intensity_min < c.intensity_max, "camera.intensity_min", "must be below camera.intensity_max")
    _check(c.regularizer > 0, "camera.regularizer", "must be positive")
    _check(c.importance_mode in ("border", "uniform"), "camera.importance_mode", "must be 'border' or 'uniform'")
    _check(cov.lateral_gain >= 0, "coverage.lateral_gain", "must be >= 0")
    _check(cov.vertical_gain >= 0, "coverage.vertical_gain", "must be >= 0")
    _check(cov.gradient_clip >= 0, "coverage.gradient_clip", "must be >= 0")
    _check(cov.target_cells >= 4, "coverage.target_cells", "must be >= 4")
    _check(cov.edge_points >= 1, "coverage.edge_points", "must be >= 1")
    _check(saf.safe_distance > 0, "safety.safe_distance", "must be positive")
    _check(saf.min_altitude > 0, "safety.min_altitude", "must be positive")
    _check(saf.neighbor_gain > 0, "safety.neighbor_gain", "must be positive")
    _check(saf.ground_gain > 0, "safety.ground_gain", "must be positive")
    _check(saf.comm_radius >= 0, "safety.comm_radius", "must be >= 0")
    _check(
        saf.min_altitude > c.focal_length,
        "safety.min_altitude",
        f"must exceed camera.focal_length ({c.focal_length})",
    )
    _check(saf.max_altitude > saf.min_altitude, "safety.max_altitude", "must exceed safety.min_altitude")
    span = 4.0 * saf.max_altitude * max(math.tan(math.radians(t)) for t in c.half_angles_deg)
    _check(
        saf.comm_radius >= span,
        "safety.comm_radius",
        f"must be >= {span:.6g} so every footprint overlap stays within range",
    )
    p = cfg.potential
    _check(p.rendezvous_gain >= 0, "potential.rendezvous_gain", "must be >= 0")
    _check(p.desired_gain >= 0, "potential.desired_gain", "must be >= 0")
    x0, y0, x1, y1 = m.extent
    _check(x1 > x0 and y1 > y0, "metrics.extent", "must have positive width and height")
    _check(m.cells >= 1, "metrics.cells", "must be >= 1")
    _check(m.supersample >= 1, "metrics.supersample", "must be >= 1")


def loads_config(text: str) -> ScenarioConfig:
    try:
        data = tomli.loads(text)
    except tomli.TOMLDecodeError as exc:
        raise ConfigError("<file>", f"not valid TOML ({exc})") from None
    return from_dict(data)


def load_config(path) -> ScenarioConfig:
    path = Path(path)
    if not path.is_file():
        raise ConfigError("<file>", f"{path} does not exist")
    return loads_config(path.read_text(encoding="utf-8"))


def bundled_path(name: str) -> Path:
    if name not in BUNDLED:
        raise KeyError(f"no bundled scenario named {name!r}")
    return Path(str(resources.files("firetrack") / "scenarios" / f"{name}.toml"))


def load_bundled(name: str) -> ScenarioConfig:
    return load_config(bundled_path(name))


def _toml_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, str):
        return '"' + v.replace("\\", "\\\\").replace('"', '\\"') + '"'
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_toml_value(x) for x in v) + "]"
    raise TypeError(f"cannot serialise {type(v).__name__}")


def dumps_config(cfg: ScenarioConfig) -> str:
    lines = []
    for name, body in to_dict(cfg).items():
        lines.append(f"[{name}]")
        lines.extend(f"{k} = {_toml_value(v)}" for k, v in body.items())
        lines.append("")
    return "\n".join(lines)
