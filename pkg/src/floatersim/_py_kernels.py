"""numpy fallback for the hot kernels.

Every function here must be an exact stand-in for its twin in _kernels.pyx:
same integers, same floats, same rng consumption. Integer work is trivially
exact; the float expressions in apply_stimulus are written as the same
sequence of IEEE-754 operations the compiled kernel performs (which is built
with fp-contraction off), so the results agree to the last bit.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from .rng import GOLDEN, MASK64

RESTING = 0
EXCITED = 1
REFRACTORY = 2

FORCE_SCALE = 840  # lcm(1..8); clears every per-cell divisor

_U64_GOLDEN = np.uint64(GOLDEN)
_TO_DOUBLE = 1.0 / 9007199254740992.0


def ca_step(src: np.ndarray, dst: np.ndarray, t1: int, t2: int, d1: int, d2: int) -> None:
    h, w = src.shape
    sigma = _excited_neighbor_counts(src)
    resting = src == RESTING
    excited = src == EXCITED
    dst[...] = RESTING
    dst[resting & (sigma >= t1) & (sigma <= t2)] = EXCITED
    retained = (sigma >= d1) & (sigma <= d2)
    dst[excited & retained] = EXCITED
    dst[excited & ~retained] = REFRACTORY


def _excited_neighbor_counts(grid: np.ndarray) -> np.ndarray:
    """Per-cell count of excited Moore-8 neighbours, edges truncated."""
    h, w = grid.shape
    exc = np.zeros((h + 2, w + 2), dtype=np.uint8)
    exc[1:-1, 1:-1] = grid == EXCITED
    return (
        exc[:-2, :-2] + exc[:-2, 1:-1] + exc[:-2, 2:]
        + exc[1:-1, :-2] + exc[1:-1, 2:]
        + exc[2:, :-2] + exc[2:, 1:-1] + exc[2:, 2:]
    )


def force_coeffs(grid: np.ndarray) -> tuple[int, int, int, int, int, int]:
    h, w = grid.shape
    exc = np.zeros((h + 2, w + 2), dtype=np.int64)
    exc[1:-1, 1:-1] = grid == EXCITED

    # Shifted views: n_<dir>[y, x] is 1 iff the neighbour at that offset is
    # excited. Row +1 is body-frame north (+y).
    n_e = exc[1:-1, 2:]
    n_w = exc[1:-1, :-2]
    n_n = exc[2:, 1:-1]
    n_s = exc[:-2, 1:-1]
    n_ne = exc[2:, 2:]
    n_nw = exc[2:, :-2]
    n_se = exc[:-2, 2:]
    n_sw = exc[:-2, :-2]

    sigma = n_e + n_w + n_n + n_s + n_ne + n_nw + n_se + n_sw
    m = FORCE_SCALE // np.maximum(sigma, 1)

    ax = n_e - n_w                 # axial unit vectors: x components
    ay = n_n - n_s
    bx = (n_ne + n_se) - (n_nw + n_sw)   # diagonal components, in sqrt(1/2) units
    by = (n_ne + n_nw) - (n_se + n_sw)

    fa = -int(np.sum(m * ax))
    fb = -int(np.sum(m * bx))
    ga = -int(np.sum(m * ay))
    gb = -int(np.sum(m * by))

    # Torque about the lattice centre; 2*offset keeps everything integral.
    tdx = (2 * np.arange(w, dtype=np.int64) - (w - 1))[np.newaxis, :]
    tdy = (2 * np.arange(h, dtype=np.int64) - (h - 1))[:, np.newaxis]
    ta = int(np.sum(m * (tdy * ax - tdx * ay)))
    tb = int(np.sum(m * (tdy * bx - tdx * by)))
    return fa, fb, ga, gb, ta, tb


@lru_cache(maxsize=8)
def _perimeter_indices(w: int, h: int) -> tuple[np.ndarray, np.ndarray]:
    """Perimeter cell coordinates in row-major order."""
    xs, ys = [], []
    for y in range(h):
        if y == 0 or y == h - 1:
            xs.extend(range(w))
            ys.extend([y] * w)
        else:
            xs.extend((0, w - 1))
            ys.extend((y, y))
    return np.asarray(xs, dtype=np.int64), np.asarray(ys, dtype=np.int64)


def _bulk_uniform(state: int, n: int) -> np.ndarray:
    """The next n splitmix64 doubles after `state`, as one vector."""
    ks = np.uint64(state) + np.arange(1, n + 1, dtype=np.uint64) * _U64_GOLDEN
    z = ks
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    z = z ^ (z >> np.uint64(31))
    return (z >> np.uint64(11)).astype(np.float64) * _TO_DOUBLE


def apply_stimulus(grid, px, py, ch, sh, lx, ly, dc2, p_excite, state):
    h, w = grid.shape
    xs, ys = _perimeter_indices(w, h)

    # Same operation sequence as the compiled kernel, elementwise.
    bx = xs.astype(np.float64) - (w - 1) / 2.0
    by = ys.astype(np.float64) - (h - 1) / 2.0
    wx = px + (ch * bx - sh * by)
    wy = py + (sh * bx + ch * by)
    dx = wx - lx
    dy = wy - ly
    eligible = (dx * dx + dy * dy) > dc2

    takers = eligible & (grid[ys, xs] == RESTING)
    n = int(np.count_nonzero(takers))
    if n:
        u = _bulk_uniform(state, n)
        hit = u < p_excite
        grid[ys[takers][hit], xs[takers][hit]] = EXCITED
    return (state + n * GOLDEN) & MASK64
