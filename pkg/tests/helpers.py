"""Shared builders for the test suite."""

import math

import numpy as np

from firetrack.coverage import GridSpec, coverage_field
from firetrack.fire_model import Extent, FireFrontSource, FireState, SpreadParams, WindModel, intensity_at
from firetrack.sensing import CameraIntrinsics, Pose

STILL = WindModel(0.0, 0.0, 0.0, 0.0)


def optics(**kw):
    base = dict(
        focal_length=10.0,
        pixel_area=1e-4,
        half_angles=(math.radians(30), math.radians(45)),
        intensity_min=0.005,
        intensity_max=0.1,
    )
    base.update(kw)
    return CameraIntrinsics(**base)


# Two broad overlapping sources; the detection band is tuned to their peak so
# the detectable region has a curved border crossing many footprints.
TWO_SOURCE_CAM = optics(intensity_min=2e-5, intensity_max=8e-5)


def two_source_fire() -> FireState:
    return FireState.from_sources(
        [FireFrontSource(450, 500, 60, 60), FireFrontSource(550, 520, 60, 60)],
        STILL,
        SpreadParams(1.0, 1.0, 0.0),
    )


def fire_bbox(fire, cam, extent=(200, 200, 800, 800), n=256):
    probe = coverage_field(fire, cam, GridSpec(Extent(*extent), n, n), supersample=1)
    X, Y = np.meshgrid(probe.grid.x_centers, probe.grid.y_centers, indexing="ij")
    fx, fy = X[probe.fire_mask], Y[probe.fire_mask]
    return fx.min(), fy.min(), fx.max(), fy.max()


def random_configs(fire, cam, seed, count=20, agents=3, z_range=(40.0, 80.0)):
    """Agents placed uniformly over detectable fire, altitudes uniform in z_range."""
    fb = fire_bbox(fire, cam)
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        poses = []
        while len(poses) < agents:
            x, y = rng.uniform(fb[0], fb[2]), rng.uniform(fb[1], fb[3])
            if intensity_at(fire, (x, y)) <= cam.intensity_min:
                continue
            poses.append(Pose(x, y, rng.uniform(*z_range)))
        out.append(poses)
    return out


def covering_grid(fire, cam, poses, n=128, margin=2.0):
    """Grid over the detectable fire plus every footprint, with a small margin."""
    fb = fire_bbox(fire, cam)
    tx, ty = cam.tan_half_angles
    x0 = min([fb[0]] + [p.x - p.z * tx for p in poses]) - margin
    x1 = max([fb[2]] + [p.x + p.z * tx for p in poses]) + margin
    y0 = min([fb[1]] + [p.y - p.z * ty for p in poses]) - margin
    y1 = max([fb[3]] + [p.y + p.z * ty for p in poses]) + margin
    return GridSpec(Extent(x0, y0, x1, y1), n, n)


def central_differences(field, poses, cam, eps=0.1):
    """Central differences of the tabulated objective for every pose coordinate."""
    out = []
    for i, p in enumerate(poses):
        for d in range(3):
            hi, lo = p.as_array(), p.as_array()
            hi[d] += eps
            lo[d] -= eps
            a, b = list(poses), list(poses)
            a[i], b[i] = Pose.from_array(hi), Pose.from_array(lo)
            out.append((field.objective(a, cam) - field.objective(b, cam)) / (2 * eps))
    return np.array(out)
