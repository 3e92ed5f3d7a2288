"""Raster snapshots: lattice, light disc and trajectory in a world window.

Output is a binary P6 pixmap. Cells are nearest-neighbour sampled through
the inverse pose transform, so the lattice appears at its true rotated world
position; the light is a solid black disc; the trajectory-so-far is a 1 px
mid-gray polyline.
"""

from __future__ import annotations

import math

import numpy as np

from .kinetics import Pose
from .rules import EXCITED, REFRACTORY, Lattice
from .stimulus import LightSource

COLOR_BACKGROUND = (255, 255, 255)
COLOR_EXCITED = (0, 0, 0)
COLOR_REFRACTORY = (128, 128, 128)
COLOR_RESTING = (220, 220, 220)
COLOR_TRAIL = (128, 128, 128)
COLOR_LIGHT = (0, 0, 0)


def render_snapshot(lattice: Lattice | None, pose: Pose, light: LightSource,
                    trail: list[tuple[float, float]],
                    window: tuple[float, float, float, float],
                    pixels_per_unit: float) -> np.ndarray:
    """Render to an (H, W, 3) uint8 image.

    window is (x_min, y_min, x_max, y_max) in world units; world +y is up,
    so image row 0 is the window's top edge. trail is the sequence of
    recorded floater centres, oldest first. lattice may be None for a
    light-and-trail-only frame.
    """
    x_min, y_min, x_max, y_max = window
    if not (x_max > x_min and y_max > y_min):
        raise ValueError(f"window must have positive area, got {window}")
    if not (math.isfinite(pixels_per_unit) and pixels_per_unit > 0):
        raise ValueError(f"pixels_per_unit must be > 0, got {pixels_per_unit}")
    width = max(1, round((x_max - x_min) * pixels_per_unit))
    height = max(1, round((y_max - y_min) * pixels_per_unit))

    img = np.full((height, width, 3), 255, dtype=np.uint8)

    # World coordinates of pixel centres.
    wx = x_min + (np.arange(width, dtype=np.float64) + 0.5) / pixels_per_unit
    wy = y_max - (np.arange(height, dtype=np.float64) + 0.5) / pixels_per_unit
    wxg = wx[np.newaxis, :]
    wyg = wy[:, np.newaxis]

    _draw_lattice(img, lattice, pose, wxg, wyg)
    _draw_trail(img, trail, window, pixels_per_unit, width, height)
    _draw_light(img, light, wxg, wyg)
    return img


def _draw_lattice(img, lattice, pose, wxg, wyg):
    if lattice is None:
        return
    # Inverse transform pixel centres into cell indices.
    ch = math.cos(pose.heading)
    sh = math.sin(pose.heading)
    rx = wxg - pose.position.x
    ry = wyg - pose.position.y
    bx = ch * rx + sh * ry
    by = -sh * rx + ch * ry
    cx = np.floor(bx + (lattice.width - 1) / 2.0 + 0.5).astype(np.int64)
    cy = np.floor(by + (lattice.height - 1) / 2.0 + 0.5).astype(np.int64)
    inside = (cx >= 0) & (cx < lattice.width) & (cy >= 0) & (cy < lattice.height)
    if not inside.any():
        return
    states = np.zeros(img.shape[:2], dtype=np.uint8)
    states[inside] = lattice.grid[cy[inside], cx[inside]]
    img[inside & (states == 0)] = COLOR_RESTING
    img[inside & (states == EXCITED)] = COLOR_EXCITED
    img[inside & (states == REFRACTORY)] = COLOR_REFRACTORY


def _draw_light(img, light, wxg, wyg):
    dx = wxg - light.position.x
    dy = wyg - light.position.y
    disc = dx * dx + dy * dy <= light.radius * light.radius
    img[disc] = COLOR_LIGHT


def _draw_trail(img, trail, window, ppu, width, height):
    if len(trail) < 2:
        return
    x_min, _, _, y_max = window
    pts = [
        (int(math.floor((x - x_min) * ppu)), int(math.floor((y_max - y) * ppu)))
        for x, y in trail
    ]
    for (x0, y0), (x1, y1) in zip(pts, pts[1:]):
        for px, py in _bresenham(x0, y0, x1, y1):
            if 0 <= px < width and 0 <= py < height:
                img[py, px] = COLOR_TRAIL


def _bresenham(x0, y0, x1, y1):
    dx = abs(x1 - x0)
    dy = -abs(y1 - y0)
    sx = 1 if x0 < x1 else -1
    sy = 1 if y0 < y1 else -1
    err = dx + dy
    while True:
        yield x0, y0
        if x0 == x1 and y0 == y1:
            return
        e2 = 2 * err
        if e2 >= dy:
            err += dy
            x0 += sx
        if e2 <= dx:
            err += dx
            y0 += sy


def write_ppm(img: np.ndarray, path) -> None:
    """Binary P6 with maxval 255."""
    if img.ndim != 3 or img.shape[2] != 3 or img.dtype != np.uint8:
        raise ValueError("image must be (H, W, 3) uint8")
    height, width = img.shape[:2]
    with open(path, "wb") as fh:
        fh.write(f"P6\n{width} {height}\n255\n".encode("ascii"))
        fh.write(img.tobytes())


def read_ppm(path) -> np.ndarray:
    """Inverse of write_ppm, for tests and tooling."""
    with open(path, "rb") as fh:
        data = fh.read()
    if not data.startswith(b"P6"):
        raise ValueError("not a P6 pixmap")
    # Three whitespace-separated header tokens after the magic, then raw pixels.
    tokens = []
    i = 2
    while len(tokens) < 3:
        while i < len(data) and data[i] in b" \t\r\n":
            i += 1
        if i < len(data) and data[i:i + 1] == b"#":
            while i < len(data) and data[i] not in b"\r\n":
                i += 1
            continue
        j = i
        while j < len(data) and data[j] not in b" \t\r\n":
            j += 1
        tokens.append(int(data[i:j]))
        i = j
    i += 1  # single whitespace after maxval
    width, height, maxval = tokens
    if maxval != 255:
        raise ValueError(f"unsupported maxval {maxval}")
    pixels = np.frombuffer(data, dtype=np.uint8, count=width * height * 3, offset=i)
    return pixels.reshape(height, width, 3).copy()
