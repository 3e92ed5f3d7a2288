"""Per-step orchestration, trajectory recording and metrics.

One simulation step is, in fixed order:

    1. stimulate the dark-facing boundary  (the only random input)
    2. synchronous CA update
    3. integral force and torque from the new excitation pattern
    4. first-order pose update, clamped into the arena

The ordering is part of the contract -- reordering is observable -- and the
whole (lattice, pose) sequence is a pure function of the config, seed
included.
"""

from __future__ import annotations

import math
import statistics
from dataclasses import dataclass, fields

import numpy as np

from . import backend
from .kinetics import MotionGains, Pose, Vec2, step_pose_raw, integral_force_raw
from .rng import SplitMix64
from .rules import EXCITED, REFRACTORY, Lattice, RuleParams, parse_rule
from .stimulus import LightSource, StimulusConfig, apply_light_stimulus_inplace

# Fractions of the initial light distance used by the trajectory metrics:
# an approach/retreat cycle completes when the distance drops below
# HYST_IN_FRACTION * D0 and later rises above HYST_OUT_FRACTION * D0.
HYST_IN_FRACTION = 0.25
HYST_OUT_FRACTION = 0.5
ESCAPE_FRACTION = 2.0
DEFAULT_TRANSIENT_FRACTION = 0.2

CSV_HEADER = "step,x,y,heading,fx,fy,torque,excited,refractory,dist"


@dataclass
class SimConfig:
    """Flat, file-loadable simulation configuration.

    Field names double as the config-file keys. The defaults reproduce the
    200x200 reference setup: floater at the origin, light 1.5 lattice-widths
    due east, edge stimulation probability 0.15.
    """

    rule: str = "2201"
    width: int = 200
    height: int = 200
    light_x: float = 300.0
    light_y: float = 0.0
    light_radius: float = 8.0
    start_x: float = 0.0
    start_y: float = 0.0
    heading: float = 0.0
    k_translate: float = 0.005
    k_rotate: float = 5e-6
    p_excite: float = 0.15
    seed: int = 1
    steps: int = 20000
    record_every: int = 10
    render_every: int = 2000
    arena_halfwidth: float = 3000.0
    seed_center: bool = True

    def validate(self) -> "SimConfig":
        parse_rule(self.rule)
        if self.width < 3 or self.height < 3:
            raise ValueError("lattice dimensions must be at least 3")
        if self.steps < 1:
            raise ValueError("steps must be >= 1")
        if self.record_every < 1 or self.render_every < 1:
            raise ValueError("record_every and render_every must be >= 1")
        if self.arena_halfwidth <= 0:
            raise ValueError("arena_halfwidth must be > 0")
        for f in fields(self):
            v = getattr(self, f.name)
            if isinstance(v, float) and not math.isfinite(v):
                raise ValueError(f"{f.name} must be finite")
        StimulusConfig(self.p_excite)
        MotionGains(self.k_translate, self.k_rotate)
        return self

    @property
    def initial_distance(self) -> float:
        return math.hypot(self.start_x - self.light_x, self.start_y - self.light_y)


class ConfigError(ValueError):
    """Malformed config file or unknown key."""


_BOOL_WORDS = {"true": True, "false": False, "1": True, "0": False,
               "yes": True, "no": False}


def parse_config_text(text: str) -> SimConfig:
    """Parse flat `key=value` lines (blank lines and # comments allowed).

    Keys must match SimConfig field names; anything else is rejected.
    """
    return apply_config_text(SimConfig(), text)


def apply_config_text(cfg: SimConfig, text: str) -> SimConfig:
    typed = {f.name: f.type for f in fields(SimConfig)}
    values = {}
    for lineno, key, value in _config_lines(text):
        if key not in typed:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        values[key] = _coerce(key, typed[key], value, lineno)
    out = SimConfig(**{**{f.name: getattr(cfg, f.name) for f in fields(SimConfig)}, **values})
    return out


def parse_config_keys(text: str) -> set[str]:
    """The key names a config file sets, without applying them."""
    return {key for _, key, _ in _config_lines(text)}


def _config_lines(text: str):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value, got {raw!r}")
        key, _, value = line.partition("=")
        yield lineno, key.strip(), value.strip()


def _coerce(key: str, typ: str, value: str, lineno: int):
    try:
        if typ == "int":
            return int(value)
        if typ == "float":
            return float(value)
        if typ == "bool":
            if value.lower() not in _BOOL_WORDS:
                raise ValueError(value)
            return _BOOL_WORDS[value.lower()]
        return value
    except ValueError:
        raise ConfigError(f"line {lineno}: bad {typ} value for {key}: {value!r}") from None


@dataclass(frozen=True)
class TrajectoryRecord:
    """One log row: pose, body-frame force, excitation census, distance."""

    step: int
    x: float
    y: float
    heading: float
    fx: float
    fy: float
    torque: float
    excited: int
    refractory: int
    dist: float


@dataclass(frozen=True)
class TrajectoryMetrics:
    mean_dist: float
    median_dist: float
    min_dist: float
    radius_of_gyration: float
    approach_retreat_cycles: int
    escaped: bool


class Simulation:
    """A stepping simulation instance; owns the lattice buffers, pose and rng.

    The steering service mutates `light` (and rule/seed via the setters)
    between steps; batch runs just call run().
    """

    def __init__(self, cfg: SimConfig):
        cfg.validate()
        self.cfg = cfg
        self.rule: RuleParams = parse_rule(cfg.rule)
        self.gains = MotionGains(cfg.k_translate, cfg.k_rotate)
        self.light = LightSource(Vec2(cfg.light_x, cfg.light_y), cfg.light_radius)
        self.reset(cfg.seed)

    def reset(self, seed: int) -> None:
        """Back to step 0 with a fresh stream; config geometry unchanged."""
        cfg = self.cfg
        if cfg.seed_center:
            lat = Lattice.with_center_seed(cfg.width, cfg.height)
        else:
            lat = Lattice.blank(cfg.width, cfg.height)
        self._grid = lat.grid
        self._spare = np.empty_like(self._grid)
        self.rng = SplitMix64(seed)
        self.seed = seed
        self.pose_x = cfg.start_x
        self.pose_y = cfg.start_y
        self.pose_heading = cfg.heading
        self.step_count = 0
        self.last_force = (0.0, 0.0, 0.0)

    def set_rule(self, code: str) -> None:
        self.rule = parse_rule(code)

    def set_light(self, x: float, y: float) -> None:
        if not (math.isfinite(x) and math.isfinite(y)):
            raise ValueError("light position must be finite")
        self.light = LightSource(Vec2(x, y), self.light.radius)

    @property
    def lattice(self) -> Lattice:
        return Lattice(self._grid.copy(), self.step_count)

    @property
    def pose(self) -> Pose:
        return Pose(Vec2(self.pose_x, self.pose_y), self.pose_heading)

    def dist_to_light(self) -> float:
        return math.hypot(self.pose_x - self.light.position.x,
                          self.pose_y - self.light.position.y)

    def step(self) -> None:
        """One full iteration: stimulate, CA step, force, pose, clamp."""
        cfg = self.cfg
        apply_light_stimulus_inplace(
            self._grid, self.pose_x, self.pose_y, self.pose_heading,
            self.light, cfg.p_excite, self.rng,
        )
        backend.ca_step(self._grid, self._spare, self.rule.theta1,
                        self.rule.theta2, self.rule.delta1, self.rule.delta2)
        self._grid, self._spare = self._spare, self._grid
        fx, fy, torque = integral_force_raw(self._grid)
        self.last_force = (fx, fy, torque)
        self.pose_x, self.pose_y, self.pose_heading = step_pose_raw(
            self.pose_x, self.pose_y, self.pose_heading,
            fx, fy, torque, cfg.k_translate, cfg.k_rotate,
        )
        a = cfg.arena_halfwidth
        self.pose_x = min(max(self.pose_x, -a), a)
        self.pose_y = min(max(self.pose_y, -a), a)
        self.step_count += 1

    def record(self) -> TrajectoryRecord:
        excited = int(np.count_nonzero(self._grid == EXCITED))
        refractory = int(np.count_nonzero(self._grid == REFRACTORY))
        fx, fy, torque = self.last_force
        return TrajectoryRecord(
            step=self.step_count,
            x=self.pose_x, y=self.pose_y, heading=self.pose_heading,
            fx=fx, fy=fy, torque=torque,
            excited=excited, refractory=refractory,
            dist=self.dist_to_light(),
        )

    def run(self) -> list[TrajectoryRecord]:
        """Step to cfg.steps, recording step 0, every record_every, and the end."""
        records = [self.record()]
        for _ in range(self.cfg.steps):
            self.step()
            if self.step_count % self.cfg.record_every == 0 or self.step_count == self.cfg.steps:
                records.append(self.record())
        return records


def run_simulation(cfg: SimConfig) -> list[TrajectoryRecord]:
    """Run a config to completion; deterministic in every byte given the seed."""
    return Simulation(cfg).run()


def compute_metrics(records: list[TrajectoryRecord], light: LightSource,
                    transient_fraction: float = DEFAULT_TRANSIENT_FRACTION) -> TrajectoryMetrics:
    """Distance statistics plus the approach/retreat cycle count.

    The first transient_fraction of the records is dropped for mean, median
    and radius of gyration; min, cycles and escape look at the whole run.
    D0 is the distance at the first record.
    """
    if len(records) < 2:
        raise ValueError(f"need at least 2 records, got {len(records)}")
    if not 0.0 <= transient_fraction < 1.0:
        raise ValueError(f"transient_fraction must be in [0, 1), got {transient_fraction}")
    lx, ly = light.position.x, light.position.y
    dists = [math.hypot(r.x - lx, r.y - ly) for r in records]
    d0 = dists[0]

    cut = int(len(dists) * transient_fraction)
    settled = dists[cut:] if cut < len(dists) else dists[-1:]

    r_in = HYST_IN_FRACTION * d0
    r_out = HYST_OUT_FRACTION * d0
    cycles = 0
    inside = False
    for d in dists:
        if not inside and d < r_in:
            inside = True
        elif inside and d > r_out:
            cycles += 1
            inside = False

    return TrajectoryMetrics(
        mean_dist=statistics.fmean(settled),
        median_dist=statistics.median(settled),
        min_dist=min(dists),
        radius_of_gyration=math.sqrt(statistics.fmean(d * d for d in settled)),
        approach_retreat_cycles=cycles,
        escaped=dists[-1] > ESCAPE_FRACTION * d0,
    )


def write_trajectory_csv(records: list[TrajectoryRecord], path) -> None:
    """CSV with full round-trip float precision (repr), one row per record."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(CSV_HEADER + "\n")
        for r in records:
            fh.write(
                f"{r.step},{r.x!r},{r.y!r},{r.heading!r},{r.fx!r},{r.fy!r},"
                f"{r.torque!r},{r.excited},{r.refractory},{r.dist!r}\n"
            )


def read_trajectory_csv(path) -> list[TrajectoryRecord]:
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n")
        if header != CSV_HEADER:
            raise ValueError(f"unexpected CSV header: {header!r}")
        out = []
        for line in fh:
            parts = line.rstrip("\n").split(",")
            if len(parts) != 10:
                raise ValueError(f"bad CSV row: {line!r}")
            out.append(TrajectoryRecord(
                step=int(parts[0]), x=float(parts[1]), y=float(parts[2]),
                heading=float(parts[3]), fx=float(parts[4]), fy=float(parts[5]),
                torque=float(parts[6]), excited=int(parts[7]),
                refractory=int(parts[8]), dist=float(parts[9]),
            ))
    return out
