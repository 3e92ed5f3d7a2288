"""Command-line experiment harness.

Subcommands:

    run    -- one simulation: trajectory CSV, PPM snapshots, metrics report
    sweep  -- N seeds of one configuration, per-seed metrics plus aggregates
    serve  -- interactive steering service (move the light, watch it follow)
    bench  -- compare the compiled kernel core against the numpy fallback

Exit codes: 0 success, 1 runtime/IO failure, 2 bad arguments.
"""

from __future__ import annotations

import argparse
import math
import statistics
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path

from . import backend, bench
from .engine import (
    DEFAULT_TRANSIENT_FRACTION,
    HYST_IN_FRACTION,
    ConfigError,
    SimConfig,
    Simulation,
    TrajectoryMetrics,
    apply_config_text,
    compute_metrics,
    parse_config_keys,
    write_trajectory_csv,
)
from .render import render_snapshot, write_ppm
from .rules import RuleParseError, parse_rule

# Each named preset pins one rule code. The flagship fig5 preset also pins
# its calibrated translation gain: the approach-and-cycle behavior it
# demonstrates lives in a faster response regime than the package default
# gain, which is tuned for the fig6 trajectory-taxonomy sweeps.
PRESETS = {
    "fig5": {"rule": "2201", "k_translate": 0.08},
    "fig6a": {"rule": "1899"},
    "fig6b": {"rule": "1299"},
    "fig6c": {"rule": "2222"},
    "fig6d": {"rule": "2201"},
    "fig6e": {"rule": "2211"},
    "fig6f": {"rule": "2246"},
}


class CliError(Exception):
    """Bad usage detected after argparse; maps to exit code 2."""


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (RuleParseError, ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="floatersim",
        description="Excitable-lattice floater simulator with light steering.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run one simulation and write artifacts")
    _add_sim_args(run_p)
    run_p.add_argument("--out", required=True, help="output directory")
    run_p.set_defaults(func=cmd_run)

    sweep_p = sub.add_parser("sweep", help="run a seed sweep and aggregate metrics")
    _add_sim_args(sweep_p)
    sweep_p.add_argument("--out", required=True, help="output directory")
    sweep_p.add_argument("--seeds", type=int, default=10,
                         help="number of consecutive seeds starting at --seed")
    sweep_p.add_argument("--jobs", type=int, default=1,
                         help="parallel worker processes")
    sweep_p.set_defaults(func=cmd_sweep)

    serve_p = sub.add_parser("serve", help="serve an interactive steering session")
    _add_sim_args(serve_p)
    serve_p.add_argument("--port", type=int, default=8700)
    serve_p.add_argument("--host", default="127.0.0.1")
    serve_p.add_argument("--fps", type=float, default=10.0,
                         help="state frames per second broadcast to clients")
    serve_p.add_argument("--sps", type=int, default=200,
                         help="simulation steps per second")
    serve_p.set_defaults(func=cmd_serve)

    bench_p = sub.add_parser("bench", help="benchmark compiled vs fallback kernels")
    bench_p.add_argument("--size", type=int, default=200)
    bench_p.add_argument("--steps", type=int, default=500)
    bench_p.add_argument("--rule", default="2201")
    bench_p.add_argument("--seed", type=int, default=42)
    bench_p.set_defaults(func=cmd_bench)
    return parser


def _add_sim_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--preset", choices=sorted(PRESETS),
                   help="named preset (pins the rule code and tuned gains)")
    p.add_argument("--rule", help="4-digit rule code, e.g. 2201")
    p.add_argument("--config", help="key=value config file; flags override it")
    p.add_argument("--size", type=int, help="square lattice side in cells")
    p.add_argument("--steps", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--record-every", type=int, dest="record_every")
    p.add_argument("--render-every", type=int, dest="render_every")
    p.add_argument("--light-x", type=float, dest="light_x")
    p.add_argument("--light-y", type=float, dest="light_y")
    p.add_argument("--kt", type=float, dest="k_translate")
    p.add_argument("--kr", type=float, dest="k_rotate")
    p.add_argument("--p-excite", type=float, dest="p_excite")


def build_config(args) -> SimConfig:
    """Merge defaults < preset < config file < explicit flags.

    Unless the light position is pinned by file or flag, it sits 1.5 lattice
    widths due east of the start, and the arena clamp spans 10 initial
    distances.
    """
    if args.preset and args.rule:
        raise CliError("give exactly one of --preset or --rule, not both")
    cfg = SimConfig()
    rule_given = bool(args.preset or args.rule)
    if args.preset:
        cfg = replace(cfg, **PRESETS[args.preset])
    elif args.rule:
        parse_rule(args.rule)
        cfg = replace(cfg, rule=args.rule)

    light_pinned = False
    arena_pinned = False
    if args.config:
        text = Path(args.config).read_text(encoding="utf-8")
        keys = parse_config_keys(text)
        light_pinned = bool({"light_x", "light_y"} & keys)
        arena_pinned = "arena_halfwidth" in keys
        rule_given = rule_given or "rule" in keys
        if args.preset or args.rule:
            # flags override the file; strip its rule line so the file
            # cannot silently undo an explicit choice
            cfg_rule = cfg.rule
            cfg = apply_config_text(cfg, text)
            cfg = replace(cfg, rule=cfg_rule)
        else:
            cfg = apply_config_text(cfg, text)
    if not rule_given:
        raise CliError("a rule is required: --preset, --rule, or rule= in --config")

    overrides = {}
    for name in ("steps", "seed", "record_every", "render_every",
                 "light_x", "light_y", "k_translate", "k_rotate", "p_excite"):
        v = getattr(args, name, None)
        if v is not None:
            overrides[name] = v
    if getattr(args, "size", None) is not None:
        overrides["width"] = args.size
        overrides["height"] = args.size
    if "light_x" in overrides or "light_y" in overrides:
        light_pinned = True
    cfg = replace(cfg, **overrides)

    if not light_pinned:
        cfg = replace(cfg, light_x=cfg.start_x + 1.5 * cfg.width, light_y=cfg.start_y)
    if not arena_pinned:
        d0 = cfg.initial_distance
        cfg = replace(cfg, arena_halfwidth=10.0 * d0 if d0 > 0 else 10.0 * cfg.width)
    return cfg.validate()


def cmd_run(args) -> int:
    cfg = build_config(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    sim = Simulation(cfg)
    window, ppu = _snapshot_window(cfg)
    records = [sim.record()]
    trail = [(sim.pose_x, sim.pose_y)]
    _write_snapshot(out, sim, trail, window, ppu)
    for _ in range(cfg.steps):
        sim.step()
        n = sim.step_count
        if n % cfg.record_every == 0 or n == cfg.steps:
            records.append(sim.record())
        trail.append((sim.pose_x, sim.pose_y))
        if n % cfg.render_every == 0 or n == cfg.steps:
            _write_snapshot(out, sim, trail, window, ppu)

    write_trajectory_csv(records, out / "trajectory.csv")
    metrics = compute_metrics(records, sim.light)
    (out / "metrics.txt").write_text(
        format_metrics(metrics, cfg), encoding="utf-8")
    print(f"wrote {out}/trajectory.csv ({len(records)} records), "
          f"metrics.txt, snapshots [backend: {backend.backend_name()}]")
    return 0


def _snapshot_window(cfg: SimConfig) -> tuple[tuple[float, float, float, float], float]:
    d0 = cfg.initial_distance
    half = max(1.75 * d0, 1.5 * cfg.width)
    window = (cfg.light_x - half, cfg.light_y - half,
              cfg.light_x + half, cfg.light_y + half)
    ppu = 900.0 / (2.0 * half)
    return window, ppu


def _write_snapshot(out: Path, sim: Simulation, trail, window, ppu) -> None:
    img = render_snapshot(sim.lattice, sim.pose, sim.light, trail, window, ppu)
    write_ppm(img, out / f"snap_{sim.step_count:06d}.ppm")


def format_metrics(m: TrajectoryMetrics, cfg: SimConfig) -> str:
    return (
        f"rule={cfg.rule}\n"
        f"seed={cfg.seed}\n"
        f"steps={cfg.steps}\n"
        f"initial_dist={cfg.initial_distance!r}\n"
        f"mean_dist={m.mean_dist!r}\n"
        f"median_dist={m.median_dist!r}\n"
        f"min_dist={m.min_dist!r}\n"
        f"radius_of_gyration={m.radius_of_gyration!r}\n"
        f"approach_retreat_cycles={m.approach_retreat_cycles}\n"
        f"escaped={str(m.escaped).lower()}\n"
    )


def _sweep_one(payload) -> tuple[int, TrajectoryMetrics]:
    cfg_kwargs, seed = payload
    cfg = SimConfig(**cfg_kwargs)
    cfg = replace(cfg, seed=seed)
    sim = Simulation(cfg)
    records = sim.run()
    return seed, compute_metrics(records, sim.light)


def cmd_sweep(args) -> int:
    if args.seeds < 1:
        raise CliError("--seeds must be >= 1")
    cfg = build_config(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    from dataclasses import asdict
    seeds = [cfg.seed + i for i in range(args.seeds)]
    payloads = [(asdict(cfg), s) for s in seeds]
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_sweep_one, payloads))
    else:
        results = [_sweep_one(p) for p in payloads]

    rows = ["seed,min_dist,mean_dist,median_dist,radius_of_gyration,cycles,escaped"]
    for seed, m in results:
        rows.append(f"{seed},{m.min_dist!r},{m.mean_dist!r},{m.median_dist!r},"
                    f"{m.radius_of_gyration!r},{m.approach_retreat_cycles},"
                    f"{str(m.escaped).lower()}")
    (out / "sweep.csv").write_text("\n".join(rows) + "\n", encoding="utf-8")

    d0 = cfg.initial_distance
    metrics = [m for _, m in results]
    approach_rate = sum(m.min_dist < HYST_IN_FRACTION * d0 for m in metrics) / len(metrics)
    escape_rate = sum(m.escaped for m in metrics) / len(metrics)
    summary = (
        f"rule={cfg.rule}\n"
        f"seeds={args.seeds}\n"
        f"first_seed={cfg.seed}\n"
        f"initial_dist={d0!r}\n"
        f"median_of_median_dist={statistics.median(m.median_dist for m in metrics)!r}\n"
        f"median_min_dist={statistics.median(m.min_dist for m in metrics)!r}\n"
        f"approach_rate={approach_rate!r}\n"
        f"escape_rate={escape_rate!r}\n"
        f"mean_cycles={statistics.fmean(m.approach_retreat_cycles for m in metrics)!r}\n"
        f"transient_fraction={DEFAULT_TRANSIENT_FRACTION!r}\n"
    )
    (out / "summary.txt").write_text(summary, encoding="utf-8")
    print(summary, end="")
    return 0


def cmd_serve(args) -> int:
    from .service import SteeringServer

    if not 1 <= args.port <= 65535:
        raise CliError(f"--port must be in 1..65535, got {args.port}")
    if args.fps <= 0 or args.sps < 1:
        raise CliError("--fps must be > 0 and --sps >= 1")
    cfg = build_config(args)
    server = SteeringServer(cfg, host=args.host, port=args.port,
                            fps=args.fps, steps_per_second=args.sps)
    try:
        server.start()
    except OSError as exc:
        print(f"error: cannot bind {args.host}:{args.port}: {exc}", file=sys.stderr)
        return 1
    print(f"steering service on {args.host}:{server.port} "
          f"(rule {cfg.rule}, {cfg.width}x{cfg.height}, seed {cfg.seed}); Ctrl-C stops")
    try:
        server.join()
    except KeyboardInterrupt:
        print("\nshutting down")
    finally:
        server.stop()
    return 0


def cmd_bench(args) -> int:
    if args.size < 3 or args.steps < 1:
        raise CliError("--size must be >= 3 and --steps >= 1")
    parse_rule(args.rule)
    results = bench.run_benchmark(size=args.size, steps=args.steps,
                                  rule=args.rule, seed=args.seed)
    print(bench.format_results(results))
    if len(results) == 1:
        print("note: compiled backend not built; only the fallback was measured")
    return 0


if __name__ == "__main__":
    sys.exit(main())
