"""Downward camera footprint, per-pixel cost and the multi-camera joint cost."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# Outward normals of the four footprint edges, in edge-index order.
EDGE_NORMALS = np.array([[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]])


class DegenerateFovError(ValueError):
    pass


@dataclass(frozen=True)
class CameraIntrinsics:
    focal_length: float
    pixel_area: float
    half_angles: tuple[float, float]
    intensity_min: float
    intensity_max: float
    importance_gain: float = 1.0
    regularizer: float = 1.5e-5
    uniform_importance: bool = False

    def __post_init__(self):
        if self.focal_length <= 0:
            raise ValueError("focal_length must be positive")
        if self.pixel_area <= 0:
            raise ValueError("pixel_area must be positive")
        for a in self.half_angles:
            if not 0 < a < math.pi / 2:
                raise ValueError("half angles must lie in (0, pi/2)")
        if not self.intensity_min < self.intensity_max:
            raise ValueError("intensity_min must be below intensity_max")
        if self.regularizer <= 0:
            raise ValueError("regularizer must be positive")

    @property
    def tan_half_angles(self) -> np.ndarray:
        return np.tan(np.asarray(self.half_angles, dtype=float))

    @property
    def cost_scale(self) -> float:
        """S1 / b^2, the pixel cost per squared defocus distance."""
        return self.pixel_area / self.focal_length**2


@dataclass(frozen=True)
class Pose:
    x: float
    y: float
    z: float

    def __post_init__(self):
        if self.z < 0:
            raise ValueError("altitude must be non-negative")

    @property
    def lateral(self) -> np.ndarray:
        return np.array([self.x, self.y])

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])

    @classmethod
    def from_array(cls, p) -> "Pose":
        return cls(float(p[0]), float(p[1]), float(p[2]))


@dataclass(frozen=True)
class FovRect:
    center: tuple[float, float]
    half_extent: tuple[float, float]

    @property
    def bounds(self) -> tuple[float, float, float, float]:
        (cx, cy), (hx, hy) = self.center, self.half_extent
        return cx - hx, cy - hy, cx + hx, cy + hy

    @property
    def area(self) -> float:
        return 4.0 * self.half_extent[0] * self.half_extent[1]

    @property
    def perimeter(self) -> float:
        return 4.0 * (self.half_extent[0] + self.half_extent[1])

    @property
    def edges(self) -> list[tuple[tuple[float, float], tuple[float, float]]]:
        """Edge segments l_1..l_4 (right, top, left, bottom), matching EDGE_NORMALS."""
        x0, y0, x1, y1 = self.bounds
        return [
            ((x1, y0), (x1, y1)),
            ((x0, y1), (x1, y1)),
            ((x0, y0), (x0, y1)),
            ((x0, y0), (x1, y0)),
        ]

    normals = EDGE_NORMALS


def fov_rect(pose: Pose, cam: CameraIntrinsics) -> FovRect:
    if pose.z <= 0:
        raise DegenerateFovError("footprint is empty at zero altitude")
    tx, ty = cam.tan_half_angles
    return FovRect((pose.x, pose.y), (pose.z * tx, pose.z * ty))


def contains(pose: Pose, cam: CameraIntrinsics, q) -> bool | np.ndarray:
    """Closed per-axis footprint test; ``q`` may be one point or an (n, 2) array."""
    if pose.z <= 0:
        raise DegenerateFovError("footprint is empty at zero altitude")
    q = np.asarray(q, dtype=float)
    tx, ty = cam.tan_half_angles
    inside = (np.abs(q[..., 0] - pose.x) <= pose.z * tx) & (np.abs(q[..., 1] - pose.y) <= pose.z * ty)
    return bool(inside) if inside.ndim == 0 else inside


def pixel_cost_at_altitude(z, cam: CameraIntrinsics):
    return cam.cost_scale * (cam.focal_length - np.asarray(z, dtype=float)) ** 2


def pixel_cost(pose: Pose, cam: CameraIntrinsics, q) -> float:
    """Ground area seen by one pixel; infinite for points outside the footprint."""
    if not contains(pose, cam, q):
        return math.inf
    return float(pixel_cost_at_altitude(pose.z, cam))


def joint_cost_from_inverse(inverse_sum, cam: CameraIntrinsics):
    return 1.0 / (inverse_sum + cam.regularizer)


def joint_cost(q, covering_poses, cam: CameraIntrinsics) -> float:
    """Harmonic combination of the pixel costs of every camera covering ``q``.

    ``covering_poses`` must hold exactly the cameras whose footprint contains q.
    A camera in focus (zero pixel cost) drives the result to zero.
    """
    inv = 0.0
    for p in covering_poses:
        c = float(pixel_cost_at_altitude(p.z, cam))
        if c == 0.0:
            return 0.0
        inv += 1.0 / c
    return float(joint_cost_from_inverse(inv, cam))


def importance(intensity, cam: CameraIntrinsics):
    """Weight of a ground point; border regions (low intensity) weigh most.

    In uniform mode every point weighs ``importance_gain``.
    """
    i = np.asarray(intensity, dtype=float)
    if cam.uniform_importance:
        w = np.full(i.shape, cam.importance_gain)
    else:
        w = cam.importance_gain * (cam.intensity_max - np.clip(i, cam.intensity_min, cam.intensity_max))
    return float(w) if w.ndim == 0 else w


def in_fire(intensity, cam: CameraIntrinsics):
    """A point belongs to the fire once its intensity is detectable."""
    return np.asarray(intensity) > cam.intensity_min


@dataclass(frozen=True)
class DiscretizedFov:
    """Quadrature nodes of a footprint.

    ``interior_x``/``interior_y`` are the axes of the interior tensor grid, all
    cells sharing ``interior_dq``. ``edge_t`` holds the along-edge node
    coordinates per edge (y for edges 1 and 3, x for edges 2 and 4) and
    ``edge_dq`` the per-edge segment length.
    """

    rect: FovRect
    interior_x: np.ndarray
    interior_y: np.ndarray
    interior_dq: float
    edge_t: tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]
    edge_dq: tuple[float, float, float, float]

    @property
    def interior_points(self) -> np.ndarray:
        X, Y = np.meshgrid(self.interior_x, self.interior_y, indexing="ij")
        return np.column_stack([X.ravel(), Y.ravel()])

    def edge_points(self, k: int) -> np.ndarray:
        x0, y0, x1, y1 = self.rect.bounds
        t = self.edge_t[k]
        fixed = (x1, y1, x0, y0)[k]
        if k in (0, 2):
            return np.column_stack([np.full_like(t, fixed), t])
        return np.column_stack([t, np.full_like(t, fixed)])


def _midpoints(lo: float, hi: float, n: int) -> np.ndarray:
    return lo + (np.arange(n) + 0.5) * ((hi - lo) / n)


def discretize_fov(rect: FovRect, target_cells: int = 1024, edge_points: int = 64) -> DiscretizedFov:
    """Midpoint rule on a square-count interior grid and on each edge."""
    if target_cells < 4:
        raise ValueError("need at least 4 interior cells")
    if edge_points < 1:
        raise ValueError("need at least one point per edge")
    n = max(2, int(round(math.sqrt(target_cells))))
    x0, y0, x1, y1 = rect.bounds
    ys_edge = _midpoints(y0, y1, edge_points)
    xs_edge = _midpoints(x0, x1, edge_points)
    dy = (y1 - y0) / edge_points
    dx = (x1 - x0) / edge_points
    return DiscretizedFov(
        rect=rect,
        interior_x=_midpoints(x0, x1, n),
        interior_y=_midpoints(y0, y1, n),
        interior_dq=rect.area / (n * n),
        edge_t=(ys_edge, xs_edge, ys_edge, xs_edge),
        edge_dq=(dy, dx, dy, dx),
    )
