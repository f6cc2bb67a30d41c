import numpy as np
import pytest

from firetrack.potential import (
    AttractGains,
    SafetyParams,
    SingularRepulsion,
    attract,
    control,
    integrate,
    repulse_ground,
    repulse_neighbors,
)

SAFE = SafetyParams(safe_distance=10.0, min_altitude=15.0, neighbor_gain=2.1, ground_gain=1e3)
GAINS = AttractGains(0.06, 0.06, (500.0, 500.0, 60.0))


class TestAttract:
    def test_equilibrium(self):
        np.testing.assert_array_equal(attract((1, 2, 3), (1, 2, 3), 0.06), [0, 0, 0])

    def test_table_gain(self):
        np.testing.assert_allclose(attract((0, 0, 0), (10, 0, 0), 0.06), [-0.6, 0, 0], rtol=1e-15)

    def test_anti_parallel(self):
        rng = np.random.default_rng(0)
        for _ in range(100):
            a, b = rng.normal(size=3), rng.normal(size=3)
            f = attract(a, b, 0.3)
            assert np.dot(f, b - a) < 0
            assert np.linalg.norm(np.cross(f, b - a)) < 1e-12


class TestNeighbors:
    def test_outside_gate(self):
        assert repulse_neighbors((0, 0, 50), [(10, 0, 50), (0, 30, 50)], SAFE).tolist() == [0, 0, 0]

    def test_direction_west(self):
        f = repulse_neighbors((0, 0, 50), [(5, 0, 50)], SAFE)
        assert f[0] < 0 and f[1] == 0 and f[2] == 0

    def test_magnitude(self):
        f = repulse_neighbors((0, 0, 50), [(5, 0, 50)], SAFE)
        assert np.linalg.norm(f) == pytest.approx(2.1 * (1 / 5 - 1 / 10) / 125 * 5, rel=1e-14)
        assert np.linalg.norm(f) == pytest.approx(8.4e-3, rel=1e-12)

    def test_coincident(self):
        with pytest.raises(SingularRepulsion):
            repulse_neighbors((1, 1, 1), [(1, 1, 1)], SAFE)

    def test_order_invariant(self):
        nb = [(3, 1, 50), (-2, 4, 49), (1, -6, 52)]
        a = repulse_neighbors((0, 0, 50), nb, SAFE)
        b = repulse_neighbors((0, 0, 50), nb[::-1], SAFE)
        np.testing.assert_array_equal(a, b)

    def test_blows_up_near_contact(self):
        mags = [np.linalg.norm(repulse_neighbors((0, 0, 50), [(d, 0, 50)], SAFE)) for d in 8.0 / 2.0 ** np.arange(12)]
        assert np.all(np.diff(mags) > 0)
        assert mags[-1] > 1e4


class TestGround:
    def test_safe_altitude(self):
        assert repulse_ground((0, 0, 15), SAFE).tolist() == [0, 0, 0]
        assert repulse_ground((0, 0, 40), SAFE).tolist() == [0, 0, 0]

    def test_upward_below_minimum(self):
        f = repulse_ground((3, 4, 7.5), SAFE)
        assert f[0] == 0 and f[1] == 0 and f[2] > 0

    def test_magnitude(self):
        assert repulse_ground((0, 0, 10), SAFE)[2] == pytest.approx(1e3 * (1 / 10 - 1 / 15) / 1000 * 10, rel=1e-14)
        assert repulse_ground((0, 0, 10), SAFE)[2] == pytest.approx(0.3333, abs=1e-4)

    def test_grounded_singular(self):
        with pytest.raises(SingularRepulsion):
            repulse_ground((0, 0, 0), SAFE)


class TestControl:
    def test_pure_rendezvous(self):
        p = np.array([400.0, 450.0, 40.0])
        u = control(p, False, p, [], SAFE, GAINS)
        np.testing.assert_allclose(u, -0.06 * (p - np.array(GAINS.rendezvous)))

    def test_tracking_ignores_rendezvous(self):
        p, d = np.array([400.0, 450.0, 40.0]), np.array([410.0, 455.0, 38.0])
        other = AttractGains(0.06, 0.06, (0.0, -3.0, 99.0))
        a = control(p, True, d, [(403, 452, 41)], SAFE, GAINS)
        b = control(p, True, d, [(403, 452, 41)], SAFE, other)
        np.testing.assert_array_equal(a, b)

    def test_deploying_ignores_desired(self):
        p = np.array([400.0, 450.0, 40.0])
        a = control(p, False, np.array([0.0, 0.0, 0.0]), [], SAFE, GAINS)
        b = control(p, False, np.array([9.0, 9.0, 9.0]), [], SAFE, GAINS)
        np.testing.assert_array_equal(a, b)

    def test_rest_at_rendezvous(self):
        u = control(np.array(GAINS.rendezvous), False, np.zeros(3), [], SAFE, GAINS)
        np.testing.assert_array_equal(u, [0, 0, 0])

    def test_launch_skips_ground_term(self):
        u = control(np.array([0.0, 0.0, 0.0]), False, np.zeros(3), [], SAFE, GAINS, ground_repulsion=False)
        assert u[2] == pytest.approx(0.06 * 60)


class TestIntegrate:
    def test_zero_velocity(self):
        np.testing.assert_array_equal(integrate((1, 2, 3), (0, 0, 0), 1.0), [1, 2, 3])

    def test_euler(self):
        np.testing.assert_allclose(integrate((0, 0, 10), (1, 2, 3), 0.5), [0.5, 1, 11.5])

    def test_floor(self):
        assert integrate((0, 0, 1), (0, 0, -5), 1.0)[2] == 0.0

    def test_rendezvous_contracts(self):
        p = np.array([300.0, 300.0, 20.0])
        target = np.array(GAINS.rendezvous)
        d = [np.linalg.norm(p - target)]
        for _ in range(50):
            p = integrate(p, attract(target, p, 0.06), 1.0)
            d.append(np.linalg.norm(p - target))
        ratios = np.array(d[1:]) / np.array(d[:-1])
        np.testing.assert_allclose(ratios, 1 - 0.06, rtol=1e-9)


class TestParams:
    def test_safety_invariants(self):
        with pytest.raises(ValueError):
            SafetyParams(0.0, 15.0, 2.1, 1e3)
        with pytest.raises(ValueError):
            SafetyParams(10.0, 15.0, -2.1, 1e3)

    def test_attract_invariants(self):
        with pytest.raises(ValueError):
            AttractGains(-0.1, 0.06, (0, 0, 0))
        with pytest.raises(ValueError):
            AttractGains(0.1, 0.06, (0, 0, 0), dt=0.0)
