"""Three-state retained-excitation cellular automaton.

A cell is resting, excited or refractory. Per synchronous step, with sigma
the number of excited cells among a cell's Moore-8 neighbours:

    resting    -> excited     iff theta1 <= sigma <= theta2
    excited    -> excited     iff delta1 <= sigma <= delta2, else refractory
    refractory -> resting     always

Rules are written as four digits "theta1 theta2 delta1 delta2". Digits 0 and
9 are legal: interval bounds outside 0..8 simply make the test always-true
or never-true (e.g. delta "99" means excitation is never retained).

Neighbours beyond the lattice edge count as resting (the lattice models a
finite organism, so there is no wrap-around).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import backend

RESTING = 0
EXCITED = 1
REFRACTORY = 2

_STATE_NAMES = {RESTING: "resting", EXCITED: "excited", REFRACTORY: "refractory"}


class RuleParseError(ValueError):
    """Raised for a malformed rule code or out-of-range threshold digits."""


@dataclass(frozen=True)
class RuleParams:
    """The four threshold digits of a rule R(theta1 theta2 delta1 delta2)."""

    theta1: int
    theta2: int
    delta1: int
    delta2: int

    def __post_init__(self):
        for name in ("theta1", "theta2", "delta1", "delta2"):
            v = getattr(self, name)
            if not isinstance(v, int) or not 0 <= v <= 9:
                raise RuleParseError(f"{name} must be an integer in 0..9, got {v!r}")

    @property
    def code(self) -> str:
        return f"{self.theta1}{self.theta2}{self.delta1}{self.delta2}"


def parse_rule(code: str) -> RuleParams:
    """Parse a 4-character digit string into RuleParams.

    Raises RuleParseError naming the offending character or the bad length.
    """
    if not isinstance(code, str) or len(code) != 4:
        raise RuleParseError(
            f"rule code must be exactly 4 digits, got {code!r}"
        )
    for i, ch in enumerate(code):
        if ch not in "0123456789":
            raise RuleParseError(
                f"rule code {code!r}: character {ch!r} at position {i + 1} is not a digit"
            )
    return RuleParams(int(code[0]), int(code[1]), int(code[2]), int(code[3]))


def format_rule(rule: RuleParams) -> str:
    """Inverse of parse_rule."""
    return rule.code


def next_cell_state(state: int, sigma: int, rule: RuleParams) -> int:
    """Single-cell transition; the ground truth the step kernels must match."""
    if not 0 <= sigma <= 8:
        raise ValueError(f"sigma must be in 0..8, got {sigma}")
    if state == RESTING:
        return EXCITED if rule.theta1 <= sigma <= rule.theta2 else RESTING
    if state == EXCITED:
        return EXCITED if rule.delta1 <= sigma <= rule.delta2 else REFRACTORY
    if state == REFRACTORY:
        return RESTING
    raise ValueError(f"not a cell state: {state!r}")


class Lattice:
    """Rectangular grid of three-state cells plus a generation counter.

    States live in a C-contiguous uint8 array of shape (height, width);
    grid[y, x] is the cell in column x of row y. Row index increases along
    the body-frame +y axis.
    """

    __slots__ = ("grid", "generation")

    def __init__(self, grid: np.ndarray, generation: int = 0):
        grid = np.ascontiguousarray(grid, dtype=np.uint8)
        if grid.ndim != 2 or grid.shape[0] < 1 or grid.shape[1] < 1:
            raise ValueError(f"grid must be a 2-D array, got shape {grid.shape}")
        if not np.isin(grid, (RESTING, EXCITED, REFRACTORY)).all():
            raise ValueError("grid contains values outside {0, 1, 2}")
        self.grid = grid
        self.generation = generation

    @property
    def width(self) -> int:
        return self.grid.shape[1]

    @property
    def height(self) -> int:
        return self.grid.shape[0]

    @classmethod
    def blank(cls, width: int, height: int) -> "Lattice":
        return cls(np.zeros((height, width), dtype=np.uint8))

    @classmethod
    def with_center_seed(cls, width: int, height: int) -> "Lattice":
        """All resting except one excited cell at the grid centre."""
        lat = cls.blank(width, height)
        lat.grid[height // 2, width // 2] = EXCITED
        return lat

    @classmethod
    def from_text(cls, text: str, generation: int = 0) -> "Lattice":
        """Parse the test serialization: one line of digits per row, row 0 first."""
        rows = [line for line in text.splitlines() if line]
        if not rows:
            raise ValueError("empty lattice text")
        width = len(rows[0])
        grid = np.empty((len(rows), width), dtype=np.uint8)
        for y, line in enumerate(rows):
            if len(line) != width:
                raise ValueError(f"row {y} has length {len(line)}, expected {width}")
            for x, ch in enumerate(line):
                if ch not in "012":
                    raise ValueError(f"bad state digit {ch!r} at row {y} col {x}")
                grid[y, x] = int(ch)
        return cls(grid, generation)

    def to_text(self) -> str:
        """Serialize as height lines of width digits, newline-terminated."""
        return "".join(
            "".join(str(int(v)) for v in row) + "\n" for row in self.grid
        )

    def get(self, x: int, y: int) -> int:
        if not (0 <= x < self.width and 0 <= y < self.height):
            raise IndexError(f"cell ({x}, {y}) outside {self.width}x{self.height} lattice")
        return int(self.grid[y, x])

    def counts(self) -> tuple[int, int]:
        """(excited, refractory) cell counts."""
        return (
            int(np.count_nonzero(self.grid == EXCITED)),
            int(np.count_nonzero(self.grid == REFRACTORY)),
        )

    def copy(self) -> "Lattice":
        return Lattice(self.grid.copy(), self.generation)

    def __eq__(self, other) -> bool:
        """Same configuration; generation is provenance, not part of the value."""
        return (
            isinstance(other, Lattice)
            and self.grid.shape == other.grid.shape
            and bool((self.grid == other.grid).all())
        )

    def __repr__(self) -> str:
        return f"Lattice({self.width}x{self.height}, generation={self.generation})"


def count_excited_neighbors(lattice: Lattice, x: int, y: int) -> int:
    """Number of excited Moore-8 neighbours of (x, y); edges truncate."""
    if not (0 <= x < lattice.width and 0 <= y < lattice.height):
        raise IndexError(f"cell ({x}, {y}) outside lattice")
    g = lattice.grid
    y0, y1 = max(0, y - 1), min(lattice.height, y + 2)
    x0, x1 = max(0, x - 1), min(lattice.width, x + 2)
    window = g[y0:y1, x0:x1]
    n = int(np.count_nonzero(window == EXCITED))
    if g[y, x] == EXCITED:
        n -= 1
    return n


def step_lattice(lattice: Lattice, rule: RuleParams, out: np.ndarray | None = None) -> Lattice:
    """One synchronous update; every next state is read from the previous
    generation only. Returns a new Lattice with generation + 1.

    `out` optionally supplies a preallocated destination grid so tight loops
    can avoid churning buffers; it must not alias the source.
    """
    src = lattice.grid
    if out is None:
        out = np.empty_like(src)
    elif out is src or (out.base is not None and out.base is src.base):
        raise ValueError("out must not alias the source grid")
    backend.ca_step(src, out, rule.theta1, rule.theta2, rule.delta1, rule.delta2)
    return Lattice(out, lattice.generation + 1)
