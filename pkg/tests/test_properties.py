"""Property tests for invariants that hold across the whole input space."""

import math

import numpy as np
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from firetrack.coverage import GridSpec, coverage_field
from firetrack.fire_model import (
    Extent,
    FireFrontSource,
    FireState,
    SpreadParams,
    elliptical_offset,
    intensity_at,
    step_fire,
)
from firetrack.potential import AttractGains, SafetyParams, control, repulse_neighbors
from firetrack.runtime import AgentState, WorldState, physical_neighbors
from firetrack.sensing import Pose, contains, fov_rect, importance, joint_cost, pixel_cost_at_altitude

from helpers import STILL, optics

CAM = optics()
SAFE = SafetyParams(10.0, 15.0, 2.1, 1e3)

coord = st.floats(-1000, 1000, allow_nan=False)
sigma = st.floats(1.0, 100.0)
altitude = st.floats(11.0, 200.0)
source = st.builds(FireFrontSource, coord, coord, sigma, sigma)
sources = st.lists(source, min_size=1, max_size=6)
point = st.tuples(coord, coord)
pose3 = st.tuples(coord, coord, altitude)


def fire_of(srcs, wind=STILL, spread=SpreadParams(1.0, 1.0, 0.0)):
    return FireState.from_sources(srcs, wind, spread)


@given(sources, sources, point)
def test_intensity_superposition(a, b, q):
    both = intensity_at(fire_of(a + b), q)
    assert math.isclose(both, intensity_at(fire_of(a), q) + intensity_at(fire_of(b), q), rel_tol=1e-12, abs_tol=1e-300)


@given(sources, source, point)
def test_adding_a_source_never_cools(srcs, extra, q):
    assert intensity_at(fire_of(srcs + [extra]), q) >= intensity_at(fire_of(srcs), q)


@given(sources, st.integers(0, 2**32 - 1))
def test_zero_wind_children_sit_on_parents(srcs, seed):
    fire = fire_of(srcs, STILL, SpreadParams(0.5, 10.0, 0.0))
    nxt = step_fire(fire, np.random.default_rng(seed))
    n = fire.n_sources
    np.testing.assert_array_equal(nxt.xs[n:], fire.xs)
    np.testing.assert_array_equal(nxt.ys[n:], fire.ys)


@given(st.floats(0.01, 15.0), st.floats(0, 2 * math.pi), st.floats(0.01, 2.0))
def test_offset_follows_azimuth(speed, theta, rate):
    dx, dy = elliptical_offset(speed, theta, SpreadParams(rate, 1.0))
    # Azimuth is clockwise from north: east component sin, north component cos.
    assert math.isclose(math.atan2(dx, dy) % (2 * math.pi), theta % (2 * math.pi), abs_tol=1e-9) or (
        abs(abs(math.atan2(dx, dy) % (2 * math.pi) - theta % (2 * math.pi)) - 2 * math.pi) < 1e-9
    )
    assert 0 <= math.hypot(dx, dy) <= rate / 2


@given(st.lists(altitude, min_size=1, max_size=6))
def test_joint_cost_bounds(zs):
    poses = [Pose(0, 0, z) for z in zs]
    c = joint_cost((0, 0), poses, CAM)
    best = min(float(pixel_cost_at_altitude(z, CAM)) for z in zs)
    assert 0 < c <= best
    assert c <= 1 / CAM.regularizer


@given(st.lists(altitude, min_size=1, max_size=5), altitude)
def test_extra_camera_never_raises_cost(zs, z):
    poses = [Pose(0, 0, v) for v in zs]
    assert joint_cost((0, 0), poses + [Pose(0, 0, z)], CAM) <= joint_cost((0, 0), poses, CAM)


@given(st.floats(0, 1.0), st.floats(0, 1.0))
def test_importance_range_and_order(i, j):
    wi, wj = importance(i, CAM), importance(j, CAM)
    top = CAM.importance_gain * (CAM.intensity_max - CAM.intensity_min)
    assert 0 <= wi <= top
    if i <= j:
        assert wi >= wj


@given(pose3, st.lists(point, min_size=1, max_size=20))
def test_contains_matches_rect(p, qs):
    pose = Pose(*p)
    rect = fov_rect(pose, CAM)
    x0, y0, x1, y1 = rect.bounds
    q = np.array(qs)
    expect = (q[:, 0] >= x0) & (q[:, 0] <= x1) & (q[:, 1] >= y0) & (q[:, 1] <= y1)
    got = contains(pose, CAM, q)
    # Bounds are computed as centre +- half extent, same as the test, so equality is exact.
    np.testing.assert_array_equal(got, expect)


@given(st.floats(0.0, 100.0))
def test_pixel_cost_symmetric_about_focus(d):
    b = CAM.focal_length
    # b + d and b - d round independently, so allow a few ulps.
    assert math.isclose(pixel_cost_at_altitude(b + d, CAM), pixel_cost_at_altitude(b - d, CAM), rel_tol=1e-12)


@given(pose3, st.lists(pose3, max_size=6))
def test_repulsion_gate_and_direction(p, nbs):
    p = np.array(p)
    nbs = [np.array(n) for n in nbs]
    assume(all(np.linalg.norm(n - p) > 1e-3 for n in nbs))
    f = repulse_neighbors(p, nbs, SAFE)
    near = [n for n in nbs if np.linalg.norm(n - p) < SAFE.safe_distance]
    if not near:
        assert f.tolist() == [0.0, 0.0, 0.0]
    elif len(near) == 1:
        assert np.dot(f, p - near[0]) > 0


@given(pose3, pose3, pose3, pose3, st.lists(pose3, max_size=3))
def test_tracking_ignores_rendezvous(p, d, r1, r2, nbs):
    p, d = np.array(p), np.array(d)
    nbs = [np.array(n) for n in nbs]
    assume(all(np.linalg.norm(n - p) > 1e-3 for n in nbs))
    a = control(p, True, d, nbs, SAFE, AttractGains(0.06, 0.06, r1))
    b = control(p, True, d, nbs, SAFE, AttractGains(0.06, 0.06, r2))
    np.testing.assert_array_equal(a, b)


@settings(max_examples=50)
@given(st.lists(pose3, min_size=2, max_size=8, unique=True), st.floats(0.0, 2000.0))
def test_neighbor_relation_symmetric(ps, r):
    agents = tuple(
        AgentState(i, Pose(*p), Pose(*p), False, None, None, None, CAM) for i, p in enumerate(ps)
    )
    w = WorldState(agents, fire_of([FireFrontSource(0, 0, 1, 1)]), r)
    for a in agents:
        for b in physical_neighbors(w, a.id):
            assert a.id in [n.id for n in physical_neighbors(w, b.id)]
            assert b.id != a.id


@settings(max_examples=25, deadline=None)
@given(st.lists(st.tuples(st.floats(300, 700), st.floats(300, 700), st.floats(20, 80)), min_size=2, max_size=4))
def test_objective_exchange_symmetric(ps):
    fire = fire_of([FireFrontSource(480, 500, 40, 40), FireFrontSource(540, 510, 30, 30)])
    cam = optics(intensity_min=1e-5, intensity_max=1e-4)
    field = coverage_field(fire, cam, GridSpec(Extent(200, 200, 800, 800), 48, 48), supersample=1)
    poses = [Pose(*p) for p in ps]
    h = field.objective(poses, cam)
    assert math.isclose(field.objective(poses[::-1], cam), h, rel_tol=1e-12)
    assert h <= field.objective([], cam) * (1 + 1e-12)
