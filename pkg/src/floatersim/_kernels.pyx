# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled core for the hot per-step kernels.

Must stay bit-compatible with _py_kernels (see that module's docstring):
integer accumulation for forces, and the exact same IEEE operation sequence
for the stimulus geometry. Built with -ffp-contract=off so the compiler
cannot fuse multiply-adds into FMA and drift from the fallback.
"""

from libc.stdint cimport uint8_t, int64_t, uint64_t

cdef enum:
    RESTING = 0
    EXCITED = 1
    REFRACTORY = 2

cdef int64_t FORCE_SCALE = 840

cdef uint64_t GOLDEN = 0x9E3779B97F4A7C15ULL
cdef double TO_DOUBLE = 1.0 / 9007199254740992.0


cdef inline uint64_t mix64(uint64_t z) nogil:
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL
    return z ^ (z >> 31)


cdef inline uint8_t _next_state(uint8_t s, int sigma, int t1, int t2, int d1, int d2) nogil:
    if s == RESTING:
        return EXCITED if t1 <= sigma <= t2 else RESTING
    if s == EXCITED:
        return EXCITED if d1 <= sigma <= d2 else REFRACTORY
    return RESTING


def ca_step(const uint8_t[:, ::1] src, uint8_t[:, ::1] dst,
            int t1, int t2, int d1, int d2):
    """Synchronous update of src into dst; edges truncate the neighbourhood."""
    cdef Py_ssize_t h = src.shape[0]
    cdef Py_ssize_t w = src.shape[1]
    if dst.shape[0] != h or dst.shape[1] != w:
        raise ValueError("dst shape mismatch")
    cdef Py_ssize_t x, y, nx, ny
    cdef int sigma
    with nogil:
        # Interior cells: all eight neighbours exist.
        for y in range(1, h - 1):
            for x in range(1, w - 1):
                sigma = 0
                if src[y - 1, x - 1] == EXCITED: sigma += 1
                if src[y - 1, x] == EXCITED: sigma += 1
                if src[y - 1, x + 1] == EXCITED: sigma += 1
                if src[y, x - 1] == EXCITED: sigma += 1
                if src[y, x + 1] == EXCITED: sigma += 1
                if src[y + 1, x - 1] == EXCITED: sigma += 1
                if src[y + 1, x] == EXCITED: sigma += 1
                if src[y + 1, x + 1] == EXCITED: sigma += 1
                dst[y, x] = _next_state(src[y, x], sigma, t1, t2, d1, d2)
        # Border cells: bounds-checked scan.
        for y in range(h):
            for x in range(w):
                if 0 < y < h - 1 and 0 < x < w - 1:
                    continue
                sigma = 0
                for ny in range(y - 1, y + 2):
                    if ny < 0 or ny >= h:
                        continue
                    for nx in range(x - 1, x + 2):
                        if nx < 0 or nx >= w or (nx == x and ny == y):
                            continue
                        if src[ny, nx] == EXCITED:
                            sigma += 1
                dst[y, x] = _next_state(src[y, x], sigma, t1, t2, d1, d2)


def force_coeffs(const uint8_t[:, ::1] grid):
    """Exact integer force/torque accumulators; see backend.force_coeffs."""
    cdef Py_ssize_t h = grid.shape[0]
    cdef Py_ssize_t w = grid.shape[1]
    cdef Py_ssize_t x, y, nx, ny, dx, dy
    cdef int64_t ax, ay, bx, by, sigma, m, tdx, tdy
    cdef int64_t fa = 0, fb = 0, ga = 0, gb = 0, ta = 0, tb = 0
    with nogil:
        for y in range(h):
            for x in range(w):
                ax = ay = bx = by = sigma = 0
                for dy in range(-1, 2):
                    ny = y + dy
                    if ny < 0 or ny >= h:
                        continue
                    for dx in range(-1, 2):
                        if dx == 0 and dy == 0:
                            continue
                        nx = x + dx
                        if nx < 0 or nx >= w:
                            continue
                        if grid[ny, nx] == EXCITED:
                            sigma += 1
                            if dx == 0 or dy == 0:
                                ax += dx
                                ay += dy
                            else:
                                bx += dx
                                by += dy
                if sigma == 0:
                    continue
                m = FORCE_SCALE / sigma      # exact: 840 divisible by 1..8
                fa -= m * ax
                fb -= m * bx
                ga -= m * ay
                gb -= m * by
                tdx = 2 * x - (w - 1)
                tdy = 2 * y - (h - 1)
                ta += m * (tdy * ax - tdx * ay)
                tb += m * (tdy * bx - tdx * by)
    return fa, fb, ga, gb, ta, tb


def apply_stimulus(uint8_t[:, ::1] grid,
                   double px, double py, double ch, double sh,
                   double lx, double ly, double dc2,
                   double p_excite, state):
    """Excite eligible resting perimeter cells in place; returns new rng state.

    Perimeter is walked in row-major order; one draw per eligible resting
    cell. The geometry below must stay operation-for-operation identical to
    _py_kernels.apply_stimulus.
    """
    cdef Py_ssize_t h = grid.shape[0]
    cdef Py_ssize_t w = grid.shape[1]
    cdef uint64_t s = <uint64_t> (<unsigned long long> state)
    cdef double cxf = (w - 1) / 2.0
    cdef double cyf = (h - 1) / 2.0
    cdef Py_ssize_t x, y
    cdef double bx, by, wx, wy, dx, dy, u
    with nogil:
        for y in range(h):
            for x in range(w):
                if not (x == 0 or x == w - 1 or y == 0 or y == h - 1):
                    continue
                if grid[y, x] != RESTING:
                    continue
                bx = x - cxf
                by = y - cyf
                wx = px + (ch * bx - sh * by)
                wy = py + (sh * bx + ch * by)
                dx = wx - lx
                dy = wy - ly
                if dx * dx + dy * dy > dc2:
                    s += GOLDEN
                    u = <double> (mix64(s) >> 11) * TO_DOUBLE
                    if u < p_excite:
                        grid[y, x] = EXCITED
    return int(s)
