"""Snapshot rasterization and P6 pixmap IO."""

import math

import numpy as np
import pytest

from floatersim.kinetics import Pose, Vec2
from floatersim.render import (
    COLOR_BACKGROUND,
    COLOR_EXCITED,
    COLOR_LIGHT,
    COLOR_REFRACTORY,
    COLOR_RESTING,
    COLOR_TRAIL,
    render_snapshot,
    read_ppm,
    write_ppm,
)
from floatersim.rules import Lattice
from floatersim.stimulus import LightSource

ORIGIN = Pose(Vec2(0.0, 0.0), 0.0)


def far_light(r=8.0):
    # parked far outside every window used here
    return LightSource(Vec2(1e6, 1e6), r)


def test_palette_values():
    assert COLOR_BACKGROUND == (255, 255, 255)
    assert COLOR_EXCITED == (0, 0, 0)
    assert COLOR_REFRACTORY == (128, 128, 128)
    assert COLOR_RESTING == (220, 220, 220)
    assert COLOR_LIGHT == (0, 0, 0)
    assert COLOR_TRAIL == (128, 128, 128)


def test_empty_world_is_all_white():
    img = render_snapshot(None, ORIGIN, far_light(), [], (-10, -10, 10, 10), 5.0)
    assert img.shape == (100, 100, 3)
    assert (img == 255).all()


def test_window_must_have_positive_area():
    with pytest.raises(ValueError):
        render_snapshot(None, ORIGIN, far_light(), [], (0, 0, 0, 10), 5.0)
    with pytest.raises(ValueError):
        render_snapshot(None, ORIGIN, far_light(), [], (0, 5, 10, 5), 5.0)


def test_scale_must_be_positive():
    with pytest.raises(ValueError):
        render_snapshot(None, ORIGIN, far_light(), [], (-1, -1, 1, 1), 0.0)
    with pytest.raises(ValueError):
        render_snapshot(None, ORIGIN, far_light(), [], (-1, -1, 1, 1), -2.0)


def test_single_excited_cell_centered_black_block():
    lat = Lattice.from_text("1\n")
    img = render_snapshot(lat, ORIGIN, far_light(), [], (-5, -5, 5, 5), 10.0)
    assert img.shape == (100, 100, 3)
    center = img[45:55, 45:55]
    assert (center == 0).all()
    # nothing but the one cell is drawn
    assert int(np.count_nonzero((img == 0).all(axis=2))) == 100


def test_lattice_cell_colors():
    lat = Lattice.from_text("012\n")
    img = render_snapshot(lat, ORIGIN, far_light(), [], (-2, -1, 2, 1), 10.0)
    # cells sit at world x = -1, 0, 1 on the y=0 row; sample pixel centres
    h, w, _ = img.shape  # 20 x 40
    row = h // 2
    assert tuple(img[row, 10]) == COLOR_RESTING
    assert tuple(img[row, 20]) == COLOR_EXCITED
    assert tuple(img[row, 30]) == COLOR_REFRACTORY


def test_rotated_lattice_still_renders_cells():
    lat = Lattice(np.ones((3, 3), dtype=np.uint8))
    img = render_snapshot(lat, Pose(Vec2(0, 0), math.pi / 4), far_light(), [],
                          (-4, -4, 4, 4), 8.0)
    black = (img == 0).all(axis=2)
    assert black.any()
    # rotation by 45 degrees leaves the corners of the window empty
    assert not black[0, 0] and not black[-1, -1]


def test_light_disc_pixel_count():
    radius = 8.0
    ppu = 2.0
    ls = LightSource(Vec2(0.0, 0.0), radius)
    img = render_snapshot(None, ORIGIN, ls, [], (-20, -20, 20, 20), ppu)
    black = int(np.count_nonzero((img == 0).all(axis=2)))
    r_px = radius * ppu
    area = math.pi * r_px * r_px
    ring = 2 * math.pi * r_px + 4  # one-pixel boundary ring tolerance
    assert abs(black - area) <= ring


def test_trail_draws_gray_segments():
    trail = [(-8.0, 0.0), (8.0, 0.0)]
    img = render_snapshot(None, ORIGIN, far_light(), trail, (-10, -10, 10, 10), 5.0)
    gray = (img == 128).all(axis=2)
    assert int(np.count_nonzero(gray)) >= 70  # ~80 pixels for a 16-unit line
    ys, xs = np.nonzero(gray)
    assert set(ys) == {50}  # horizontal 1px line through the middle


def test_trail_single_point_no_crash():
    img = render_snapshot(None, ORIGIN, far_light(), [(0.0, 0.0)],
                          (-5, -5, 5, 5), 2.0)
    assert img.shape == (20, 20, 3)


def test_world_y_up_row0_is_top():
    # a cell at world (0, +3) must land in the upper half of the image
    lat = Lattice.from_text("1\n")
    img = render_snapshot(lat, Pose(Vec2(0.0, 3.0), 0.0), far_light(), [],
                          (-5, -5, 5, 5), 10.0)
    black_rows = np.nonzero((img == 0).all(axis=2).any(axis=1))[0]
    assert black_rows.max() < 50


def test_ppm_round_trip(tmp_path):
    rng = np.random.default_rng(8)
    img = rng.integers(0, 256, size=(13, 7, 3), dtype=np.uint8)
    path = tmp_path / "x.ppm"
    write_ppm(img, path)
    raw = path.read_bytes()
    assert raw.startswith(b"P6\n7 13\n255\n")
    assert len(raw) == len(b"P6\n7 13\n255\n") + 13 * 7 * 3
    back = read_ppm(path)
    assert np.array_equal(back, img)


def test_read_ppm_rejects_non_p6(tmp_path):
    path = tmp_path / "bad.ppm"
    path.write_bytes(b"P3\n1 1\n255\n0 0 0\n")
    with pytest.raises(ValueError):
        read_ppm(path)
