"""floatersim: a mobile excitable-lattice floater that steers toward light.

A rectangular three-state cellular automaton rides a rigid "floater". The
boundary cells facing away from a light source are excited at random, the
excitation pattern is summed into a net force and torque, and the pose is
integrated step by step -- the lattice propels itself toward the light and
then wanders around it in irregular cycles.
"""

from .backend import available_backends, backend_name
from .engine import (
    SimConfig,
    Simulation,
    TrajectoryMetrics,
    TrajectoryRecord,
    compute_metrics,
    parse_config_text,
    read_trajectory_csv,
    run_simulation,
    write_trajectory_csv,
)
from .kinetics import (
    IntegralForce,
    MotionGains,
    Pose,
    Vec2,
    integral_force,
    integrate_pose,
    local_force,
)
from .render import render_snapshot, write_ppm
from .rng import SplitMix64
from .rules import (
    EXCITED,
    REFRACTORY,
    RESTING,
    Lattice,
    RuleParams,
    RuleParseError,
    count_excited_neighbors,
    format_rule,
    next_cell_state,
    parse_rule,
    step_lattice,
)
from .stimulus import (
    LightSource,
    StimulusConfig,
    apply_light_stimulus,
    eligible_boundary_cells,
    world_position_of_cell,
)

__version__ = "0.1.0"

__all__ = [
    "EXCITED", "REFRACTORY", "RESTING",
    "IntegralForce", "Lattice", "LightSource", "MotionGains", "Pose",
    "RuleParams", "RuleParseError", "SimConfig", "Simulation", "SplitMix64",
    "StimulusConfig", "TrajectoryMetrics", "TrajectoryRecord", "Vec2",
    "apply_light_stimulus", "available_backends", "backend_name",
    "compute_metrics", "count_excited_neighbors", "eligible_boundary_cells",
    "format_rule", "integral_force", "integrate_pose", "local_force",
    "next_cell_state", "parse_config_text", "parse_rule",
    "read_trajectory_csv", "render_snapshot", "run_simulation",
    "step_lattice", "world_position_of_cell", "write_ppm",
    "write_trajectory_csv",
]
