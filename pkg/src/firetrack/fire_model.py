"""Fire-front propagation under stochastic wind and the Gaussian heat field it radiates.

Directions are azimuths measured from the +y axis (north), clockwise positive,
so ``theta = pi/2`` spreads due east.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.spatial import cKDTree

TWO_PI = 2.0 * math.pi
# Gaussian tails beyond this many deviations are below exp(-50) of the peak.
PRUNE_SIGMAS = 10.0


class FireDomainError(ValueError):
    """Raised when the length-to-breadth chain is evaluated outside its domain."""


@dataclass(frozen=True)
class WindModel:
    mean_direction: float
    std_direction: float
    mean_speed: float
    std_speed: float

    def __post_init__(self):
        if self.std_direction < 0 or self.std_speed < 0:
            raise ValueError("wind standard deviations must be non-negative")


@dataclass(frozen=True)
class FireFrontSource:
    x: float
    y: float
    sigma_x: float
    sigma_y: float
    active: bool = True

    def __post_init__(self):
        if not (self.sigma_x > 0 and self.sigma_y > 0):
            raise ValueError("source deviations must be positive")

    @property
    def position(self) -> tuple[float, float]:
        return (self.x, self.y)


@dataclass(frozen=True)
class SpreadParams:
    rate: float
    dt: float
    min_front_separation: float = 5.0
    wind_shared: bool = False
    retire_parents: bool = False

    def __post_init__(self):
        if self.rate < 0:
            raise ValueError("spread rate must be non-negative")
        if self.dt <= 0:
            raise ValueError("fire time step must be positive")
        if self.min_front_separation < 0:
            raise ValueError("min_front_separation must be non-negative")


@dataclass(frozen=True)
class FireState:
    """Immutable snapshot of the fire.

    Source parameters are kept as parallel arrays so the heat field can be
    evaluated without touching Python objects. Arrays are never mutated in
    place; ``step_fire`` returns a new state.
    """

    xs: np.ndarray
    ys: np.ndarray
    sigma_x: np.ndarray
    sigma_y: np.ndarray
    active: np.ndarray
    wind: WindModel
    spread: SpreadParams
    time: int = 0

    @classmethod
    def from_sources(cls, sources, wind: WindModel, spread: SpreadParams, time: int = 0):
        sources = list(sources)
        if not sources:
            raise ValueError("a fire needs at least one source")
        arr = lambda name: np.array([getattr(s, name) for s in sources], dtype=float)
        return cls(
            xs=arr("x"),
            ys=arr("y"),
            sigma_x=arr("sigma_x"),
            sigma_y=arr("sigma_y"),
            active=np.array([s.active for s in sources], dtype=bool),
            wind=wind,
            spread=spread,
            time=time,
        )

    @property
    def n_sources(self) -> int:
        return int(self.xs.shape[0])

    @property
    def sources(self) -> list[FireFrontSource]:
        return [
            FireFrontSource(float(x), float(y), float(sx), float(sy), bool(a))
            for x, y, sx, sy, a in zip(self.xs, self.ys, self.sigma_x, self.sigma_y, self.active)
        ]

    def centroid(self) -> np.ndarray:
        return np.array([self.xs.mean(), self.ys.mean()])


def seed_fire(
    count: int,
    center: tuple[float, float],
    radius: float,
    sigma: tuple[float, float],
    wind: WindModel,
    spread: SpreadParams,
    rng: np.random.Generator,
) -> FireState:
    """Scatter ``count`` initial fronts uniformly in a disc around ``center``."""
    r = radius * np.sqrt(rng.random(count))
    phi = TWO_PI * rng.random(count)
    sources = [
        FireFrontSource(center[0] + ri * math.cos(pi), center[1] + ri * math.sin(pi), sigma[0], sigma[1])
        for ri, pi in zip(r, phi)
    ]
    return FireState.from_sources(sources, wind, spread)


def sample_wind(wind: WindModel, rng: np.random.Generator) -> tuple[float, float]:
    theta = rng.normal(wind.mean_direction, wind.std_direction) % TWO_PI
    speed = max(0.0, rng.normal(wind.mean_speed, wind.std_speed))
    return float(theta), float(speed)


def length_to_breadth(speed: float) -> float:
    lb = 0.936 * math.exp(0.2566 * speed) + 0.461 * math.exp(-0.1548 * speed) - 0.397
    if lb < 1.0:
        # The chain is exactly 1 at zero wind; allow for rounding only.
        if lb > 1.0 - 1e-12:
            return 1.0
        raise FireDomainError(f"length-to-breadth ratio {lb} < 1 (speed={speed})")
    return lb


def head_to_back(lb: float) -> float:
    root = math.sqrt(lb * lb - 1.0)
    return (lb + root) / (lb - root)


def elliptical_offset(speed: float, theta: float, spread: SpreadParams) -> tuple[float, float]:
    """Drift rate of a front centre for mid-flame wind ``speed`` blowing toward ``theta``."""
    if speed < 0:
        raise FireDomainError("mid-flame wind speed must be non-negative")
    hb = head_to_back(length_to_breadth(speed))
    c = (spread.rate - spread.rate / hb) / 2.0
    return c * math.sin(theta), c * math.cos(theta)


def step_fire(state: FireState, rng: np.random.Generator) -> FireState:
    """Advance the fire by one fire step.

    Every active source spawns a child displaced by ``dt * offset``. Children
    inherit their parent's deviations. A child landing closer than
    ``min_front_separation`` to any existing source (or to a child accepted
    earlier in this step) is dropped. Parents stay in the field as heat
    contributors; with ``retire_parents`` they stop spreading once they have
    produced a child.
    """
    spread = state.spread
    sep = spread.min_front_separation
    idx = np.flatnonzero(state.active)

    shared = sample_wind(state.wind, rng) if spread.wind_shared else None
    cand = np.empty((idx.size, 2))
    for row, i in enumerate(idx):
        theta, speed = shared if shared is not None else sample_wind(state.wind, rng)
        dx, dy = elliptical_offset(speed, theta, spread)
        cand[row, 0] = state.xs[i] + spread.dt * dx
        cand[row, 1] = state.ys[i] + spread.dt * dy

    accepted = np.ones(idx.size, dtype=bool)
    if sep > 0 and idx.size:
        tree = cKDTree(np.column_stack([state.xs, state.ys]))
        near_existing = tree.query(cand, k=1, distance_upper_bound=sep)[0] < sep
        accepted &= ~near_existing
        # Greedy pass in source order so the outcome is deterministic.
        kept: list[int] = []
        for row in np.flatnonzero(accepted):
            if kept:
                d = np.hypot(cand[kept, 0] - cand[row, 0], cand[kept, 1] - cand[row, 1])
                if d.min() < sep:
                    accepted[row] = False
                    continue
            kept.append(row)

    parents = idx[accepted]
    active = state.active.copy()
    if spread.retire_parents:
        active[parents] = False
    n_new = parents.size
    return replace(
        state,
        xs=np.concatenate([state.xs, cand[accepted, 0]]),
        ys=np.concatenate([state.ys, cand[accepted, 1]]),
        sigma_x=np.concatenate([state.sigma_x, state.sigma_x[parents]]),
        sigma_y=np.concatenate([state.sigma_y, state.sigma_y[parents]]),
        active=np.concatenate([active, np.ones(n_new, dtype=bool)]),
        time=state.time + 1,
    )


def intensity_at(state: FireState, q) -> np.ndarray | float:
    """Heat intensity at one point ``(x, y)`` or an ``(n, 2)`` array of points.

    Sums every source, active or not, with no truncation.
    """
    pts = np.asarray(q, dtype=float)
    scalar = pts.ndim == 1
    pts = np.atleast_2d(pts)
    norm = 1.0 / (TWO_PI * state.sigma_x * state.sigma_y)
    out = np.empty(pts.shape[0])
    chunk = max(1, 2_000_000 // max(1, state.n_sources))
    for start in range(0, pts.shape[0], chunk):
        p = pts[start : start + chunk]
        ux = (p[:, 0:1] - state.xs) / state.sigma_x
        uy = (p[:, 1:2] - state.ys) / state.sigma_y
        out[start : start + chunk] = (norm * np.exp(-0.5 * (ux * ux + uy * uy))).sum(axis=1)
    return float(out[0]) if scalar else out


def _gauss_factor(nodes: np.ndarray, centers: np.ndarray, sigma: np.ndarray) -> np.ndarray:
    # exp(-(t - c)^2 / (2 s^2)) per (source, node), built in place.
    g = nodes[None, :] - centers[:, None]
    np.square(g, out=g)
    g *= (-0.5 / (sigma * sigma))[:, None]
    return np.exp(g, out=g)


def _axis_factors(state: FireState, xs: np.ndarray, ys: np.ndarray):
    """Per-source 1-D Gaussian factors for a tensor grid, dropping sources whose
    aura cannot reach the sample box. The normalisation rides on ``gx``."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    keep = (
        (state.xs >= xs.min() - PRUNE_SIGMAS * state.sigma_x)
        & (state.xs <= xs.max() + PRUNE_SIGMAS * state.sigma_x)
        & (state.ys >= ys.min() - PRUNE_SIGMAS * state.sigma_y)
        & (state.ys <= ys.max() + PRUNE_SIGMAS * state.sigma_y)
    )
    sx, sy = state.sigma_x[keep], state.sigma_y[keep]
    gx = _gauss_factor(xs, state.xs[keep], sx)
    gx *= (1.0 / (TWO_PI * sx * sy))[:, None]
    gy = _gauss_factor(ys, state.ys[keep], sy)
    return gx, gy


def intensity_tensor(state: FireState, xs, ys) -> np.ndarray:
    """Intensity on the tensor grid ``xs x ys``; result[i, j] is at (xs[i], ys[j]).

    Uses the separability of axis-aligned Gaussians, so the cost is one
    (nx, k) x (k, ny) product. Sources more than ten deviations from the
    sample box are skipped.
    """
    gx, gy = _axis_factors(state, xs, ys)
    if gx.shape[0] == 0:
        return np.zeros((len(xs), len(ys)))
    return gx.T @ gy


@dataclass(frozen=True)
class Extent:
    x_min: float
    y_min: float
    x_max: float
    y_max: float

    def __post_init__(self):
        if not (self.x_max > self.x_min and self.y_max > self.y_min):
            raise ValueError(f"degenerate extent {self}")

    @property
    def width(self) -> float:
        return self.x_max - self.x_min

    @property
    def height(self) -> float:
        return self.y_max - self.y_min


@dataclass(frozen=True)
class Raster:
    """Cell-centred samples; ``values[0]`` is the northernmost row."""

    extent: Extent
    resolution: float
    values: np.ndarray = field(repr=False)

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    def centers(self) -> tuple[np.ndarray, np.ndarray]:
        ny, nx = self.values.shape
        cw = self.extent.width / nx
        ch = self.extent.height / ny
        xs = self.extent.x_min + (np.arange(nx) + 0.5) * cw
        ys = self.extent.y_max - (np.arange(ny) + 0.5) * ch
        return xs, ys


def intensity_grid(state: FireState, extent: Extent, resolution: float) -> Raster:
    """Sample the heat field at cell centres of a raster over ``extent``.

    The cell count per axis is ``round(length / resolution)`` (at least one);
    cells are stretched slightly so they tile the extent exactly.
    """
    if resolution <= 0:
        raise ValueError("resolution must be positive")
    if not isinstance(extent, Extent):
        extent = Extent(*extent)
    nx = max(1, int(round(extent.width / resolution)))
    ny = max(1, int(round(extent.height / resolution)))
    probe = Raster(extent, resolution, np.empty((ny, nx)))
    xs, ys = probe.centers()
    values = intensity_tensor(state, xs, ys).T
    return Raster(extent, resolution, values)


def write_intensity_csv(raster: Raster, path) -> None:
    e = raster.extent
    lines = [
        f"x_min={e.x_min:.9g},y_min={e.y_min:.9g},x_max={e.x_max:.9g},"
        f"y_max={e.y_max:.9g},resolution={raster.resolution:.9g}"
    ]
    lines.extend(",".join(f"{v:.9g}" for v in row) for row in raster.values)
    with open(path, "w", newline="") as fh:
        fh.write("\n".join(lines) + "\n")


def read_intensity_csv(path) -> Raster:
    with open(path) as fh:
        header = fh.readline().strip()
        meta = dict(item.split("=") for item in header.split(","))
        rows = [[float(v) for v in line.split(",")] for line in fh if line.strip()]
    extent = Extent(float(meta["x_min"]), float(meta["y_min"]), float(meta["x_max"]), float(meta["y_max"]))
    return Raster(extent, float(meta["resolution"]), np.array(rows))
