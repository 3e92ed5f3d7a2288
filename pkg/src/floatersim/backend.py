"""Kernel backend selection.

The hot per-step work (CA update, force integral, boundary stimulus) has two
interchangeable implementations:

  * floatersim._kernels    -- Cython extension, built at install time
  * floatersim._py_kernels -- numpy fallback, always available

The compiled core is used when importable; set FLOATERSIM_BACKEND=python or
FLOATERSIM_BACKEND=compiled to force one side (the latter raises if the
extension is missing). Both backends produce bit-identical results -- the CA
is integer-only, force accumulation is integer-exact, and the stimulus
geometry is evaluated with the same fixed sequence of IEEE operations -- so
which one is active never changes a trajectory. `floatersim bench` measures
the speed difference.
"""

from __future__ import annotations

import os

import numpy as np

from . import _py_kernels

_FORCED = os.environ.get("FLOATERSIM_BACKEND", "").strip().lower()

if _FORCED == "python":
    _impl = _py_kernels
elif _FORCED == "compiled":
    from . import _kernels as _impl  # noqa: F401  (ImportError is the point)
elif _FORCED in ("", "auto"):
    try:
        from . import _kernels as _impl
    except ImportError:
        _impl = _py_kernels
else:
    raise RuntimeError(
        f"FLOATERSIM_BACKEND must be 'compiled', 'python' or 'auto', got {_FORCED!r}"
    )


def backend_name() -> str:
    """'compiled' or 'python', whichever is active."""
    return "compiled" if _impl.__name__.endswith("_kernels") and not _impl.__name__.endswith("_py_kernels") else "python"


def get_backend(name: str):
    """Fetch a specific backend module by name (for benchmarks and tests)."""
    if name == "python":
        return _py_kernels
    if name == "compiled":
        from . import _kernels
        return _kernels
    raise ValueError(f"unknown backend {name!r}")


def available_backends() -> list[str]:
    names = ["python"]
    try:
        from . import _kernels  # noqa: F401
        names.insert(0, "compiled")
    except ImportError:
        pass
    return names


def ca_step(src, dst, t1, t2, d1, d2):
    """Synchronous CA update of src into dst (both uint8 (h, w) C-contiguous)."""
    _impl.ca_step(src, dst, t1, t2, d1, d2)


def force_coeffs(grid):
    """Six exact integer accumulators (FA, FB, GA, GB, TA, TB) such that

        fx = (FA + FB*sqrt(1/2)) / 840
        fy = (GA + GB*sqrt(1/2)) / 840
        torque = (TA + TB*sqrt(1/2)) / 1680

    Integer accumulation makes the integral independent of summation order,
    hence identical across backends and exactly antisymmetric under
    mirroring. Accepts any uint8 (h, w) array; non-contiguous views are
    copied (ascontiguousarray is free on the hot path's owned buffers).
    """
    return _impl.force_coeffs(np.ascontiguousarray(grid, dtype=np.uint8))


def apply_stimulus(grid, px, py, ch, sh, lx, ly, dc2, p_excite, state):
    """Excite eligible resting perimeter cells in place.

    Perimeter cells are visited in row-major order; each one that is resting
    and strictly farther from the light (squared world distance > dc2)
    consumes one splitmix64 draw from `state` and becomes excited when the
    draw is below p_excite. Returns the advanced rng state.
    """
    return _impl.apply_stimulus(grid, px, py, ch, sh, lx, ly, dc2, p_excite, state)
