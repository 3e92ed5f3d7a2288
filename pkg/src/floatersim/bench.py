"""Backend benchmark: compiled kernels vs numpy fallback on identical runs."""

from __future__ import annotations

import time
from dataclasses import replace

from . import backend
from .engine import SimConfig, Simulation


def bench_backend(name: str, cfg: SimConfig) -> dict:
    """Run cfg on one backend; returns timing plus an end-state fingerprint."""
    impl = backend.get_backend(name)
    saved = backend._impl
    backend._impl = impl
    try:
        sim = Simulation(cfg)
        t0 = time.perf_counter()
        for _ in range(cfg.steps):
            sim.step()
        elapsed = time.perf_counter() - t0
        grid_hash = hash(sim._grid.tobytes())
        return {
            "backend": name,
            "steps": cfg.steps,
            "seconds": elapsed,
            "steps_per_second": cfg.steps / elapsed if elapsed > 0 else float("inf"),
            "end_pose": (sim.pose_x, sim.pose_y, sim.pose_heading),
            "grid_hash": grid_hash,
        }
    finally:
        backend._impl = saved


def run_benchmark(size: int = 200, steps: int = 500, rule: str = "2201",
                  seed: int = 42) -> list[dict]:
    """Benchmark every available backend on the same config.

    End states are compared: a mismatch means the backends have diverged,
    which is a bug worth failing loudly over.
    """
    cfg = replace(SimConfig(), rule=rule, width=size, height=size,
                  light_x=1.5 * size, steps=steps, seed=seed,
                  arena_halfwidth=15.0 * size)
    results = [bench_backend(name, cfg) for name in backend.available_backends()]
    if len(results) > 1:
        ref = results[0]
        for r in results[1:]:
            if r["end_pose"] != ref["end_pose"] or r["grid_hash"] != ref["grid_hash"]:
                raise AssertionError(
                    f"backend divergence: {ref['backend']} vs {r['backend']}"
                )
    return results


def format_results(results: list[dict]) -> str:
    lines = [f"{'backend':<10} {'steps':>7} {'seconds':>9} {'steps/s':>10}"]
    for r in results:
        lines.append(
            f"{r['backend']:<10} {r['steps']:>7} {r['seconds']:>9.3f} "
            f"{r['steps_per_second']:>10.1f}"
        )
    if len(results) == 2 and results[1]["seconds"] > 0:
        speedup = results[1]["seconds"] / results[0]["seconds"]
        lines.append(f"speedup: {speedup:.1f}x ({results[0]['backend']} over {results[1]['backend']})")
    if len(results) > 1:
        lines.append("end states identical across backends")
    return "\n".join(lines)
