"""Light source and the stochastic excitation of the dark-facing boundary.

The lattice edges "most distant from the light" are made precise as: the
perimeter cells whose world distance to the light strictly exceeds the
distance from the lattice centre to the light. Each such cell, when resting,
independently becomes excited with probability p_excite each step. Interior
cells are never touched, and light has no other effect on the dynamics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .kinetics import Pose, Vec2, _require_finite
from .rng import SplitMix64
from .rules import Lattice
from . import backend


@dataclass(frozen=True)
class LightSource:
    """Stationary (until steered) illumination point; radius is only for
    rendering the solid disc."""

    position: Vec2
    radius: float = 8.0

    def __post_init__(self):
        if _require_finite("radius", self.radius) < 0:
            raise ValueError(f"radius must be >= 0, got {self.radius}")


@dataclass(frozen=True)
class StimulusConfig:
    p_excite: float = 0.15

    def __post_init__(self):
        v = _require_finite("p_excite", self.p_excite)
        if not 0.0 <= v <= 1.0:
            raise ValueError(f"p_excite must be in [0, 1], got {v}")


def world_position_of_cell(pose: Pose, width: int, height: int, x: int, y: int) -> Vec2:
    """Cell centre in world units: body offset from the lattice centre,
    rotated by the heading, translated by the pose. One cell = one unit."""
    if not (0 <= x < width and 0 <= y < height):
        raise IndexError(f"cell ({x}, {y}) outside {width}x{height} lattice")
    bx = x - (width - 1) / 2.0
    by = y - (height - 1) / 2.0
    ch = math.cos(pose.heading)
    sh = math.sin(pose.heading)
    px, py = pose.position.x, pose.position.y
    return Vec2(px + (ch * bx - sh * by), py + (sh * bx + ch * by))


def eligible_boundary_cells(pose: Pose, width: int, height: int,
                            light: LightSource) -> set[tuple[int, int]]:
    """Perimeter cells strictly farther from the light than the centre is.

    Reference implementation; the stimulus kernels evaluate the same squared
    distance test inline.
    """
    lx, ly = light.position.x, light.position.y
    dcx = pose.position.x - lx
    dcy = pose.position.y - ly
    dc2 = dcx * dcx + dcy * dcy
    out = set()
    for y in range(height):
        xs = range(width) if y in (0, height - 1) else (0, width - 1)
        for x in xs:
            w = world_position_of_cell(pose, width, height, x, y)
            dx = w.x - lx
            dy = w.y - ly
            if dx * dx + dy * dy > dc2:
                out.add((x, y))
    return out


def apply_light_stimulus(lattice: Lattice, pose: Pose, light: LightSource,
                         cfg: StimulusConfig, rng: SplitMix64) -> Lattice:
    """Excite eligible resting perimeter cells with probability p_excite.

    One rng draw per eligible resting cell, consumed in row-major perimeter
    order, so a run is a pure function of the seed. Returns a new Lattice at
    the same generation; `rng` is advanced in place.
    """
    out = lattice.copy()
    apply_light_stimulus_inplace(out.grid, pose.position.x, pose.position.y,
                                 pose.heading, light, cfg.p_excite, rng)
    return out


def apply_light_stimulus_inplace(grid, px: float, py: float, heading: float,
                                 light: LightSource, p_excite: float,
                                 rng: SplitMix64) -> None:
    """In-place variant on a bare grid; the engine's fast path."""
    lx, ly = light.position.x, light.position.y
    dcx = px - lx
    dcy = py - ly
    dc2 = dcx * dcx + dcy * dcy
    rng.state = backend.apply_stimulus(
        grid, px, py, math.cos(heading), math.sin(heading),
        lx, ly, dc2, p_excite, rng.state,
    )
