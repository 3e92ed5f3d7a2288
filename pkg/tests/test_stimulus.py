"""Light geometry, boundary eligibility, and stochastic excitation."""

import math

import numpy as np
import pytest

from floatersim.kinetics import Pose, Vec2
from floatersim.rng import SplitMix64
from floatersim.rules import EXCITED, REFRACTORY, RESTING, Lattice
from floatersim.stimulus import (
    LightSource,
    StimulusConfig,
    apply_light_stimulus,
    apply_light_stimulus_inplace,
    eligible_boundary_cells,
    world_position_of_cell,
)
from floatersim import backend

from oracles import oracle_eligible

# Frozen from the brute-force eligibility oracle: 3x3 lattice at the origin,
# heading 0, light far east -> west column plus mid-north and mid-south.
ELIGIBLE_3X3_EAST = {(0, 0), (0, 1), (0, 2), (1, 0), (1, 2)}


def light(x, y, r=8.0):
    return LightSource(Vec2(x, y), r)


# -- geometry -----------------------------------------------------------------

def test_world_position_identity_pose():
    p = world_position_of_cell(Pose(Vec2(0, 0), 0.0), 3, 3, 2, 1)
    assert (p.x, p.y) == (1.0, 0.0)


def test_world_position_translation():
    p = world_position_of_cell(Pose(Vec2(10, 0), 0.0), 3, 3, 2, 1)
    assert (p.x, p.y) == (11.0, 0.0)


def test_world_position_quarter_turn():
    p = world_position_of_cell(Pose(Vec2(0, 0), math.pi / 2), 3, 3, 2, 1)
    assert p.x == pytest.approx(0.0, abs=1e-12)
    assert p.y == pytest.approx(1.0, abs=1e-12)


def test_world_position_center_cell_is_pose_position():
    p = world_position_of_cell(Pose(Vec2(-4.5, 2.25), 1.234), 5, 5, 2, 2)
    assert (p.x, p.y) == (-4.5, 2.25)


def test_world_position_rejects_out_of_range():
    with pytest.raises(IndexError):
        world_position_of_cell(Pose(Vec2(0, 0), 0.0), 3, 3, 3, 1)


# -- eligibility --------------------------------------------------------------

def test_eligible_golden_3x3_light_east():
    got = eligible_boundary_cells(Pose(Vec2(0, 0), 0.0), 3, 3, light(1000.0, 0.0))
    assert got == ELIGIBLE_3X3_EAST
    assert got == oracle_eligible(0.0, 0.0, 0.0, 3, 3, 1000.0, 0.0)


def test_eligible_all_perimeter_when_light_at_center():
    got = eligible_boundary_cells(Pose(Vec2(0, 0), 0.0), 5, 5, light(0.0, 0.0))
    assert got == {(x, y) for x in range(5) for y in range(5)
                   if x in (0, 4) or y in (0, 4)}


def test_eligible_symmetric_about_light_axis():
    got = eligible_boundary_cells(Pose(Vec2(0, 0), 0.0), 7, 7, light(10000.0, 0.0))
    assert got == {(x, 6 - y) for (x, y) in got}


def test_eligible_contains_no_interior_cells():
    got = eligible_boundary_cells(Pose(Vec2(3, -2), 0.7), 9, 6, light(50.0, 5.0))
    for (x, y) in got:
        assert x in (0, 8) or y in (0, 5)


def test_eligible_rigid_translation_invariance():
    base = eligible_boundary_cells(Pose(Vec2(0, 0), 0.4), 8, 5, light(60.0, -20.0))
    for shift in [(13.5, -7.25), (-400.0, 1e3)]:
        moved = eligible_boundary_cells(
            Pose(Vec2(shift[0], shift[1]), 0.4), 8, 5,
            light(60.0 + shift[0], -20.0 + shift[1]))
        assert moved == base


def test_eligible_matches_oracle_random_poses():
    rng = np.random.default_rng(424242)
    for _ in range(40):
        px, py = rng.uniform(-30, 30, 2)
        heading = rng.uniform(-math.pi, math.pi)
        lx, ly = rng.uniform(-200, 200, 2)
        w, h = int(rng.integers(3, 12)), int(rng.integers(3, 12))
        got = eligible_boundary_cells(Pose(Vec2(px, py), heading), w, h, light(lx, ly))
        assert got == oracle_eligible(px, py, heading, w, h, lx, ly)


# -- stimulation --------------------------------------------------------------

def test_p_zero_changes_nothing():
    lat = Lattice.blank(6, 6)
    rng = SplitMix64(1)
    out = apply_light_stimulus(lat, Pose(Vec2(0, 0), 0.0), light(100, 0),
                               StimulusConfig(0.0), rng)
    assert out == lat


def test_p_one_excites_every_eligible_resting_cell():
    lat = Lattice.blank(5, 5)
    pose = Pose(Vec2(0, 0), 0.0)
    ls = light(1000.0, 0.0)
    out = apply_light_stimulus(lat, pose, ls, StimulusConfig(1.0), SplitMix64(9))
    want = eligible_boundary_cells(pose, 5, 5, ls)
    got = {(x, y) for y in range(5) for x in range(5) if out.get(x, y) == EXCITED}
    assert got == want


def test_only_resting_cells_are_excited():
    lat = Lattice.blank(5, 5)
    lat.grid[0, 0] = REFRACTORY
    lat.grid[2, 0] = EXCITED  # row 2, col 0: mid-west, eligible for east light
    pose = Pose(Vec2(0, 0), 0.0)
    out = apply_light_stimulus(lat, pose, light(1000.0, 0.0),
                               StimulusConfig(1.0), SplitMix64(4))
    assert out.get(0, 0) == REFRACTORY
    assert out.get(0, 2) == EXCITED  # unchanged, was already excited
    # every other eligible resting cell fired
    want = eligible_boundary_cells(pose, 5, 5, light(1000.0, 0.0))
    for (x, y) in want:
        assert out.get(x, y) in (EXCITED, REFRACTORY)


def test_interior_never_touched():
    rng = np.random.default_rng(3)
    grid = rng.choice(np.arange(3, dtype=np.uint8), size=(9, 9))
    lat = Lattice(grid.copy())
    out = apply_light_stimulus(lat, Pose(Vec2(0, 0), 0.2), light(-40.0, 13.0),
                               StimulusConfig(1.0), SplitMix64(8))
    assert np.array_equal(out.grid[1:-1, 1:-1], grid[1:-1, 1:-1])


def test_same_seed_same_outcome():
    lat = Lattice.blank(8, 8)
    pose = Pose(Vec2(1.5, -0.5), 0.9)
    ls = light(77.0, 20.0)
    outs = [apply_light_stimulus(lat, pose, ls, StimulusConfig(0.5), SplitMix64(31))
            for _ in range(2)]
    assert outs[0] == outs[1]


def test_different_seeds_usually_differ():
    lat = Lattice.blank(12, 12)
    pose = Pose(Vec2(0, 0), 0.0)
    ls = light(500.0, 0.0)
    a = apply_light_stimulus(lat, pose, ls, StimulusConfig(0.5), SplitMix64(1))
    b = apply_light_stimulus(lat, pose, ls, StimulusConfig(0.5), SplitMix64(2))
    assert a != b


def test_draw_consumption_is_one_per_eligible_resting_cell():
    # The rng advances by exactly one draw per eligible resting cell, in
    # row-major perimeter order, regardless of hit or miss.
    lat = Lattice.blank(5, 5)
    pose = Pose(Vec2(0, 0), 0.0)
    ls = light(1000.0, 0.0)
    n_eligible = len(eligible_boundary_cells(pose, 5, 5, ls))
    rng = SplitMix64(17)
    start = rng.state
    apply_light_stimulus(lat, pose, ls, StimulusConfig(0.15), rng)
    expected = SplitMix64(start)
    expected.skip(n_eligible)
    assert rng.state == expected.state


def test_excitation_pattern_matches_scalar_replay():
    # Replaying the documented consumption order by hand must reproduce the
    # kernel's exact excitation pattern.
    lat = Lattice.blank(6, 4)
    pose = Pose(Vec2(2.0, 1.0), 0.35)
    ls = light(64.0, -9.0)
    p = 0.4
    rng = SplitMix64(2718)
    out = apply_light_stimulus(lat, pose, ls, StimulusConfig(p), rng)

    replay = SplitMix64(2718)
    eligible = eligible_boundary_cells(pose, 6, 4, ls)
    want = np.zeros((4, 6), dtype=np.uint8)
    for y in range(4):
        for x in range(6):
            if (x == 0 or x == 5 or y == 0 or y == 3) and (x, y) in eligible:
                if replay.random() < p:
                    want[y, x] = EXCITED
    assert np.array_equal(out.grid, want)
    assert rng.state == replay.state


def test_stimulus_config_validates_probability():
    with pytest.raises(ValueError):
        StimulusConfig(-0.01)
    with pytest.raises(ValueError):
        StimulusConfig(1.01)


def test_inplace_variant_equals_pure_variant():
    lat = Lattice.blank(7, 7)
    pose = Pose(Vec2(0.5, 0.5), -0.6)
    ls = light(-88.0, 3.0)
    pure = apply_light_stimulus(lat, pose, ls, StimulusConfig(0.3), SplitMix64(5))
    grid = lat.grid.copy()
    rng = SplitMix64(5)
    apply_light_stimulus_inplace(grid, 0.5, 0.5, -0.6, ls, 0.3, rng)
    assert np.array_equal(pure.grid, grid)


def test_monte_carlo_excitation_frequency():
    # Empirical per-cell excitation frequency over 1e5 trials: 0.15 +/- 0.005.
    # One fixed eligible resting cell observed across trials with a fresh
    # blank lattice each time; stream runs on across trials.
    lat = Lattice.blank(5, 5)
    pose = Pose(Vec2(0, 0), 0.0)
    ls = light(1000.0, 0.0)
    cfg = StimulusConfig(0.15)
    rng = SplitMix64(60221023)
    trials = 100_000
    hits = 0
    grid = np.zeros((5, 5), dtype=np.uint8)
    for _ in range(trials):
        grid[:] = 0
        apply_light_stimulus_inplace(grid, 0.0, 0.0, 0.0, ls, 0.15, rng)
        if grid[1, 0] == EXCITED:  # cell (x=0, y=1): golden eligible set member
            hits += 1
    freq = hits / trials
    assert abs(freq - 0.15) < 0.005, freq


def test_backends_agree_on_stimulus(np_rng):
    impls = [backend.get_backend(n) for n in backend.available_backends()]
    if len(impls) < 2:
        pytest.skip("only one backend built")
    for trial in range(30):
        base = np_rng.choice(np.arange(3, dtype=np.uint8), size=(11, 13))
        px, py = np_rng.uniform(-20, 20, 2)
        heading = np_rng.uniform(-math.pi, math.pi)
        lx, ly = np_rng.uniform(-150, 150, 2)
        dc2 = (px - lx) ** 2 + (py - ly) ** 2
        ch, sh = math.cos(heading), math.sin(heading)
        results = []
        for impl in impls:
            g = base.copy()
            s = impl.apply_stimulus(g, px, py, ch, sh, lx, ly, dc2, 0.3,
                                    123456789 + trial)
            results.append((s, g))
        assert results[0][0] == results[1][0]
        assert np.array_equal(results[0][1], results[1][1])
