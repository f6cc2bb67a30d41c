"""Coverage objective and the decentralised gradient that tracks the fire front.

The objective integrates the joint camera cost over detectable fire, weighted
by importance. Each agent differentiates it using only its own footprint
samples and the poses of its physical neighbours: the lateral derivative is a
line integral over the four footprint edges, the vertical derivative adds an
area term for the change in resolution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .fire_model import Extent, FireState, intensity_tensor
from .sensing import (
    EDGE_NORMALS,
    CameraIntrinsics,
    DiscretizedFov,
    Pose,
    discretize_fov,
    fov_rect,
    importance,
    in_fire,
    pixel_cost_at_altitude,
)


class SingularGradientError(ArithmeticError):
    """The camera sits exactly in its focal plane, where the area term blows up."""


@dataclass(frozen=True)
class ControllerGains:
    lateral_gain: float
    vertical_gain: float
    dt: float = 1.0
    # Largest p_d displacement per step; None leaves the update unclipped.
    gradient_clip: float | None = None

    def __post_init__(self):
        if self.lateral_gain < 0 or self.vertical_gain < 0:
            raise ValueError("controller gains must be non-negative")
        if self.dt <= 0:
            raise ValueError("dt must be positive")


@dataclass(frozen=True)
class GradientResult:
    d_lateral: np.ndarray
    d_vertical: float

    def as_array(self) -> np.ndarray:
        return np.array([self.d_lateral[0], self.d_lateral[1], self.d_vertical])


ZERO_GRADIENT = GradientResult(np.zeros(2), 0.0)


@dataclass(frozen=True)
class FovSample:
    """Intensities read at every quadrature node of one footprint."""

    disc: DiscretizedFov
    interior_intensity: np.ndarray  # (nx, ny)
    edge_intensity: tuple[np.ndarray, ...]

    def sees_fire(self, cam: CameraIntrinsics) -> bool:
        if in_fire(self.interior_intensity, cam).any():
            return True
        return any(in_fire(e, cam).any() for e in self.edge_intensity)


def sample_fov(
    pose: Pose, cam: CameraIntrinsics, fire: FireState, target_cells: int = 1024, edge_points: int = 64
) -> FovSample:
    disc = discretize_fov(fov_rect(pose, cam), target_cells, edge_points)
    x0, y0, x1, y1 = disc.rect.bounds
    xs = np.concatenate([disc.interior_x, disc.edge_t[1], [x0, x1]])
    ys = np.concatenate([disc.interior_y, disc.edge_t[0], [y0, y1]])
    grid = intensity_tensor(fire, xs, ys)
    nx, ny, ne = disc.interior_x.size, disc.interior_y.size, edge_points
    gx0, gx1 = nx + ne, nx + ne + 1
    gy0, gy1 = ny + ne, ny + ne + 1
    edge_along_y = slice(ny, ny + ne)
    edge_along_x = slice(nx, nx + ne)
    edges = (
        grid[gx1, edge_along_y],  # right, x = x1
        grid[edge_along_x, gy1],  # top, y = y1
        grid[gx0, edge_along_y],  # left, x = x0
        grid[edge_along_x, gy0],  # bottom, y = y0
    )
    return FovSample(disc, grid[:nx, :ny], edges)


def _canonical(neighbors) -> list[Pose]:
    # Fixed summation order makes the result independent of neighbour order.
    return sorted((p for p in neighbors if p.z > 0), key=lambda p: (p.x, p.y, p.z))


def _neighbor_inverse_cost(points: np.ndarray, neighbors: list[Pose], cam: CameraIntrinsics) -> np.ndarray:
    """Sum of 1/pixel_cost over neighbours whose footprint contains each point."""
    tx, ty = cam.tan_half_angles
    total = np.zeros(points.shape[0])
    for p in neighbors:
        inside = (np.abs(points[:, 0] - p.x) <= p.z * tx) & (np.abs(points[:, 1] - p.y) <= p.z * ty)
        if not inside.any():
            continue
        c = float(pixel_cost_at_altitude(p.z, cam))
        total = total + np.where(inside, math.inf if c == 0.0 else 1.0 / c, 0.0)
    return total


def gradient_from_sample(
    pose: Pose, neighbors, sample: FovSample, cam: CameraIntrinsics
) -> GradientResult:
    own_cost = float(pixel_cost_at_altitude(pose.z, cam))
    if own_cost == 0.0:
        raise SingularGradientError(f"altitude {pose.z} equals the focal length")
    own_inv = 1.0 / own_cost
    m = cam.regularizer
    nbrs = _canonical(neighbors)
    disc = sample.disc
    tan = cam.tan_half_angles
    edge_axis_tan = (tan[0], tan[1], tan[0], tan[1])

    d_lat = np.zeros(2)
    d_vert = 0.0
    for k in range(4):
        inten = sample.edge_intensity[k]
        mask = in_fire(inten, cam)
        if not mask.any():
            continue
        pts = disc.edge_points(k)[mask]
        s_nb = _neighbor_inverse_cost(pts, nbrs, cam)
        f_with = 1.0 / (s_nb + own_inv + m)
        f_without = 1.0 / (s_nb + m)
        line = np.sum((f_with - f_without) * importance(inten[mask], cam)) * disc.edge_dq[k]
        d_lat += line * EDGE_NORMALS[k]
        # Every edge moves outward as altitude grows, at its own axis' rate.
        d_vert += line * edge_axis_tan[k]

    inten = sample.interior_intensity.ravel()
    mask = in_fire(inten, cam)
    if mask.any():
        pts = disc.interior_points[mask]
        s_nb = _neighbor_inverse_cost(pts, nbrs, cam)
        f_with = 1.0 / (s_nb + own_inv + m)
        denom = cam.cost_scale * (cam.focal_length - pose.z) ** 3
        area = np.sum(2.0 * f_with**2 / denom * importance(inten[mask], cam)) * disc.interior_dq
        d_vert -= area
    return GradientResult(d_lat, float(d_vert))


def local_gradient(
    pose: Pose,
    sensing_neighbors,
    fire: FireState,
    cam: CameraIntrinsics,
    target_cells: int = 1024,
    edge_points: int = 64,
) -> GradientResult:
    """Gradient of the coverage objective with respect to one agent's pose.

    Only ``sensing_neighbors`` and samples inside the agent's own footprint are
    read. Returns a zero gradient when no fire lies under the footprint.
    """
    sample = sample_fov(pose, cam, fire, target_cells, edge_points)
    return gradient_from_sample(pose, sensing_neighbors, sample, cam)


def update_desired(p_d: Pose, grad: GradientResult, gains: ControllerGains) -> Pose:
    step = np.array(
        [
            gains.lateral_gain * grad.d_lateral[0],
            gains.lateral_gain * grad.d_lateral[1],
            gains.vertical_gain * grad.d_vertical,
        ]
    ) * gains.dt
    if gains.gradient_clip is not None:
        norm = float(np.linalg.norm(step))
        if norm > gains.gradient_clip:
            step *= gains.gradient_clip / norm
    new = p_d.as_array() - step
    new[2] = max(new[2], 0.0)
    return Pose.from_array(new)


@dataclass(frozen=True)
class GridSpec:
    extent: Extent
    nx: int
    ny: int

    def __post_init__(self):
        if self.nx < 1 or self.ny < 1:
            raise ValueError("grid needs at least one cell per axis")

    @property
    def x_edges(self) -> np.ndarray:
        return np.linspace(self.extent.x_min, self.extent.x_max, self.nx + 1)

    @property
    def y_edges(self) -> np.ndarray:
        return np.linspace(self.extent.y_min, self.extent.y_max, self.ny + 1)

    @property
    def x_centers(self) -> np.ndarray:
        e = self.x_edges
        return 0.5 * (e[:-1] + e[1:])

    @property
    def y_centers(self) -> np.ndarray:
        e = self.y_edges
        return 0.5 * (e[:-1] + e[1:])

    @property
    def cell_area(self) -> float:
        return (self.extent.width / self.nx) * (self.extent.height / self.ny)


@dataclass(frozen=True)
class CoverageField:
    """Per-cell fire membership and importance on a grid, for one fire snapshot.

    The integrand's fire part is constant over each cell (sampled at the centre),
    while footprints are clipped against cells exactly. The objective is then a
    continuous, piecewise-smooth function of the poses, so finite differences
    at sub-cell perturbations are meaningful.
    """

    grid: GridSpec
    intensity: np.ndarray = field(repr=False)  # (nx, ny)
    fire_mask: np.ndarray = field(repr=False)
    weight: np.ndarray = field(repr=False)  # importance on fire cells, zero elsewhere

    def objective(self, poses, cam: CameraIntrinsics) -> float:
        g = self.grid
        if not self.weight.any():
            return 0.0
        flying = [p for p in poses if p.z > 0]
        xe, ye = g.x_edges, g.y_edges
        tx, ty = cam.tan_half_angles
        if flying:
            ax = np.array([[p.x - p.z * tx, p.x + p.z * tx] for p in flying])
            ay = np.array([[p.y - p.z * ty, p.y + p.z * ty] for p in flying])
            xb = np.unique(np.concatenate([xe, np.clip(ax.ravel(), xe[0], xe[-1])]))
            yb = np.unique(np.concatenate([ye, np.clip(ay.ravel(), ye[0], ye[-1])]))
        else:
            xb, yb = xe, ye
        xc, yc = 0.5 * (xb[:-1] + xb[1:]), 0.5 * (yb[:-1] + yb[1:])
        dx, dy = np.diff(xb), np.diff(yb)
        ix = np.clip(np.searchsorted(xe, xc) - 1, 0, g.nx - 1)
        iy = np.clip(np.searchsorted(ye, yc) - 1, 0, g.ny - 1)
        w = self.weight[np.ix_(ix, iy)]

        if flying:
            costs = pixel_cost_at_altitude([p.z for p in flying], cam)
            with np.errstate(divide="ignore"):
                inv = np.where(costs > 0, 1.0 / np.where(costs > 0, costs, 1.0), math.inf)
            in_x = (xc[None, :] >= ax[:, :1]) & (xc[None, :] <= ax[:, 1:])
            in_y = (yc[None, :] >= ay[:, :1]) & (yc[None, :] <= ay[:, 1:])
            finite = np.isfinite(inv)
            s = np.einsum("ai,aj->ij", in_x[finite] * inv[finite, None], in_y[finite].astype(float))
            if not finite.all():
                focused = np.einsum("ai,aj->ij", in_x[~finite].astype(float), in_y[~finite].astype(float)) > 0
                s = np.where(focused, math.inf, s)
        else:
            s = np.zeros((xc.size, yc.size))
        f = 1.0 / (s + cam.regularizer)
        return float(np.sum(f * w * dx[:, None] * dy[None, :]))

    def covered_fraction(self, poses, cam: CameraIntrinsics) -> float:
        n_fire = int(self.fire_mask.sum())
        if n_fire == 0:
            return 0.0
        xc, yc = self.grid.x_centers, self.grid.y_centers
        tx, ty = cam.tan_half_angles
        covered = np.zeros_like(self.fire_mask)
        for p in poses:
            if p.z <= 0:
                continue
            in_x = np.abs(xc - p.x) <= p.z * tx
            in_y = np.abs(yc - p.y) <= p.z * ty
            covered |= in_x[:, None] & in_y[None, :]
        return float((covered & self.fire_mask).sum() / n_fire)


def coverage_field(
    fire: FireState, cam: CameraIntrinsics, grid: GridSpec, supersample: int = 4
) -> CoverageField:
    """Tabulate the fire part of the integrand on ``grid``.

    Each cell's weight is the mean of importance x fire membership over an
    ``supersample`` x ``supersample`` lattice inside the cell, which resolves the
    fire boundary well below the cell size. ``fire_mask`` and ``intensity``
    refer to cell centres.
    """
    if supersample < 1:
        raise ValueError("supersample must be >= 1")
    inten = intensity_tensor(fire, grid.x_centers, grid.y_centers)
    mask = in_fire(inten, cam)
    if supersample == 1:
        weight = np.where(mask, importance(inten, cam), 0.0)
    else:
        s = supersample
        hx = grid.extent.width / grid.nx
        hy = grid.extent.height / grid.ny
        offs = (np.arange(s) + 0.5) / s - 0.5
        xs = (grid.x_centers[:, None] + offs[None, :] * hx).ravel()
        ys = (grid.y_centers[:, None] + offs[None, :] * hy).ravel()
        fine = intensity_tensor(fire, xs, ys)
        w = np.where(in_fire(fine, cam), importance(fine, cam), 0.0)
        weight = w.reshape(grid.nx, s, grid.ny, s).mean(axis=(1, 3))
    return CoverageField(grid, inten, mask, weight)


def objective_H(
    poses, fire: FireState, cam: CameraIntrinsics, grid: GridSpec, supersample: int = 4
) -> float:
    """Global coverage objective; a diagnostic no agent can evaluate on its own."""
    return coverage_field(fire, cam, grid, supersample).objective(poses, cam)
