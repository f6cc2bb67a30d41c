"""Potential-field controller: attraction to a target plus peer and ground repulsion."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class SingularRepulsion(ArithmeticError):
    """Two agents coincide, or an airborne agent touches the ground."""


@dataclass(frozen=True)
class SafetyParams:
    safe_distance: float  # d
    min_altitude: float  # z_min
    neighbor_gain: float  # nu
    ground_gain: float  # nu'

    def __post_init__(self):
        if self.safe_distance <= 0 or self.min_altitude <= 0:
            raise ValueError("safe_distance and min_altitude must be positive")
        if self.neighbor_gain <= 0 or self.ground_gain <= 0:
            raise ValueError("repulsion gains must be positive")


@dataclass(frozen=True)
class AttractGains:
    rendezvous_gain: float  # k_r
    desired_gain: float  # k_d
    rendezvous: tuple[float, float, float]  # p_r
    dt: float = 1.0

    def __post_init__(self):
        if self.rendezvous_gain < 0 or self.desired_gain < 0:
            raise ValueError("attraction gains must be non-negative")
        if self.dt <= 0:
            raise ValueError("dt must be positive")


def attract(to, frm, gain: float) -> np.ndarray:
    """Negative gradient of the quadratic well ``gain/2 * |frm - to|^2``."""
    return -gain * (np.asarray(frm, dtype=float) - np.asarray(to, dtype=float))


def _kernel(gain: float, dist: float, threshold: float, away: np.ndarray) -> np.ndarray:
    # Magnitude nu (1/x - 1/d) / x^2 along the unit vector away from the obstacle.
    return gain * (1.0 / dist - 1.0 / threshold) / dist**3 * away


def repulse_neighbors(p, neighbors, safety: SafetyParams) -> np.ndarray:
    """Push away from every neighbour closer than the safe distance.

    Contributions are summed in a canonical order so the result does not
    depend on how the neighbours are listed.
    """
    p = np.asarray(p, dtype=float)
    total = np.zeros(3)
    if len(neighbors) == 0:
        return total
    nb = np.asarray(neighbors, dtype=float).reshape(-1, 3)
    nb = nb[np.lexsort(nb.T[::-1])]
    for q in nb:
        diff = p - q
        dist = float(np.linalg.norm(diff))
        if dist == 0.0:
            raise SingularRepulsion("coincident agents")
        if dist < safety.safe_distance:
            total += _kernel(safety.neighbor_gain, dist, safety.safe_distance, diff)
    return total


def repulse_ground(p, safety: SafetyParams) -> np.ndarray:
    """Vertical push away from the ground image (x, y, 0) below ``min_altitude``."""
    z = float(np.asarray(p, dtype=float)[2])
    if z <= 0.0:
        raise SingularRepulsion("agent at ground level")
    if z >= safety.min_altitude:
        return np.zeros(3)
    return _kernel(safety.ground_gain, z, safety.min_altitude, np.array([0.0, 0.0, z]))


def control(
    p,
    zeta: bool,
    desired,
    neighbors,
    safety: SafetyParams,
    gains: AttractGains,
    ground_repulsion: bool = True,
) -> np.ndarray:
    """Velocity command: repulsion plus attraction to p_r (zeta = 0) or p_d (zeta = 1).

    ``ground_repulsion=False`` skips the ground term, which is singular for an
    agent still sitting on the ground before launch.
    """
    p = np.asarray(p, dtype=float)
    u = repulse_neighbors(p, neighbors, safety)
    if ground_repulsion:
        u = u + repulse_ground(p, safety)
    if zeta:
        return u + attract(desired, p, gains.desired_gain)
    return u + attract(gains.rendezvous, p, gains.rendezvous_gain)


def integrate(p, u, dt: float) -> np.ndarray:
    """Forward Euler step of the single integrator, altitude floored at 0."""
    new = np.asarray(p, dtype=float) + np.asarray(u, dtype=float) * dt
    new[2] = max(new[2], 0.0)
    return new
