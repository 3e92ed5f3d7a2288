"""Force extraction and rigid-body motion of the floater.

Every cell gets a virtual local force vector pointing toward the less
excited side of its neighbourhood: minus the mean of unit vectors toward
its excited Moore neighbours. The integral force is the sum of the local
vectors over all cells; the torque is the matching rigid-body sum about the
lattice centre. Both drive a first-order (quasi-static) pose update -- the
protoplasm the model imitates carries no inertia worth keeping.

All per-cell vectors have the form (a + b*sqrt(1/2)) / n with small integers
a, b and n in 1..8, so the lattice-wide sums are accumulated as exact
integers scaled by 840 = lcm(1..8). That makes the integral independent of
summation order (backends and platforms agree bit-for-bit) and exactly
antisymmetric under lattice mirroring.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from . import backend
from .rules import EXCITED, Lattice

SQRT1_2 = math.sqrt(0.5)
FORCE_SCALE = 840


def _require_finite(name: str, v: float) -> float:
    if not math.isfinite(v):
        raise ValueError(f"{name} must be finite, got {v!r}")
    return float(v)


@dataclass(frozen=True)
class Vec2:
    x: float
    y: float

    def __post_init__(self):
        _require_finite("x", self.x)
        _require_finite("y", self.y)

    def __add__(self, other: "Vec2") -> "Vec2":
        return Vec2(self.x + other.x, self.y + other.y)

    def __sub__(self, other: "Vec2") -> "Vec2":
        return Vec2(self.x - other.x, self.y - other.y)

    def norm(self) -> float:
        return math.hypot(self.x, self.y)


@dataclass(frozen=True)
class IntegralForce:
    """Net force (body frame, cell units) and signed z-torque about the
    lattice centre."""

    force: Vec2
    torque: float

    def __post_init__(self):
        _require_finite("torque", self.torque)


@dataclass(frozen=True)
class Pose:
    """World position and heading of the rigid lattice.

    heading is wrapped to (-pi, pi] at construction, so the invariant holds
    no matter what callers add to it.
    """

    position: Vec2
    heading: float

    def __post_init__(self):
        _require_finite("heading", self.heading)
        object.__setattr__(self, "heading", wrap_angle(self.heading))


@dataclass(frozen=True)
class MotionGains:
    """World units per unit force per step, and radians per unit torque."""

    k_translate: float = 0.005
    k_rotate: float = 5e-6

    def __post_init__(self):
        for name in ("k_translate", "k_rotate"):
            v = _require_finite(name, getattr(self, name))
            if v <= 0:
                raise ValueError(f"{name} must be > 0, got {v}")


def wrap_angle(a: float) -> float:
    """Wrap to (-pi, pi]."""
    a = math.remainder(a, math.tau)
    if a <= -math.pi:
        a = math.pi
    return a


def local_force(lattice: Lattice, x: int, y: int) -> Vec2:
    """Per-cell force: minus the mean unit vector toward excited neighbours.

    Zero when no neighbour is excited; always has magnitude <= 1.
    """
    if not (0 <= x < lattice.width and 0 <= y < lattice.height):
        raise IndexError(f"cell ({x}, {y}) outside lattice")
    g = lattice.grid
    ax = ay = bx = by = n = 0
    for dy in (-1, 0, 1):
        ny = y + dy
        if not 0 <= ny < lattice.height:
            continue
        for dx in (-1, 0, 1):
            if dx == 0 and dy == 0:
                continue
            nx = x + dx
            if 0 <= nx < lattice.width and g[ny, nx] == EXCITED:
                n += 1
                if dx == 0 or dy == 0:
                    ax += dx
                    ay += dy
                else:
                    bx += dx
                    by += dy
    if n == 0:
        return Vec2(0.0, 0.0)
    return Vec2(-(ax + bx * SQRT1_2) / n, -(ay + by * SQRT1_2) / n)


def integral_force(lattice: Lattice) -> IntegralForce:
    """Sum of local forces over all cells, plus torque about the centre."""
    fx, fy, torque = integral_force_raw(lattice.grid)
    return IntegralForce(Vec2(fx, fy), torque)


def integral_force_raw(grid) -> tuple[float, float, float]:
    """(fx, fy, torque) from a bare uint8 grid; the engine's fast path."""
    fa, fb, ga, gb, ta, tb = backend.force_coeffs(grid)
    fx = (fa + fb * SQRT1_2) / FORCE_SCALE
    fy = (ga + gb * SQRT1_2) / FORCE_SCALE
    torque = (ta + tb * SQRT1_2) / (2 * FORCE_SCALE)
    return fx, fy, torque


def integrate_pose(pose: Pose, f: IntegralForce, gains: MotionGains) -> Pose:
    """Explicit first-order step: rotate by the torque, then translate the
    body-frame force into the world frame at the updated heading."""
    x, y, heading = step_pose_raw(
        pose.position.x, pose.position.y, pose.heading,
        f.force.x, f.force.y, f.torque,
        gains.k_translate, gains.k_rotate,
    )
    return Pose(Vec2(x, y), heading)


def step_pose_raw(px: float, py: float, heading: float,
                  fx: float, fy: float, torque: float,
                  k_translate: float, k_rotate: float) -> tuple[float, float, float]:
    heading = wrap_angle(heading + k_rotate * torque)
    ch = math.cos(heading)
    sh = math.sin(heading)
    tx = k_translate * fx
    ty = k_translate * fy
    return px + (ch * tx - sh * ty), py + (sh * tx + ch * ty), heading
