#!/usr/bin/env python3
"""Train the bandwidth-slicing agent and compare it with both baselines.

Runs a shortened training session (1000 steps instead of the benchmark's
8000, smaller networks) so the demo finishes in seconds, then lines the run
up against the even split and the water-filling optimum with `compare`, and
writes plot-ready CSVs of the allocation shares and per-slice scores.
"""

from pathlib import Path

from rlalloc.harness import (
    ExperimentConfig,
    compare,
    emit_plot_data,
    run_experiment,
)
from rlalloc.slicing import default_analytic_config

OUT = Path("demo-output")


def main():
    OUT.mkdir(exist_ok=True)
    env = default_analytic_config()
    env.demand_changes = {500: env.demand_changes[4000]}  # change mid-demo

    paths = []
    for policy in ("td3", "sra", "optimal"):
        overrides = (
            {
                "actor_hidden": [64, 64],
                "critic_hidden": [64, 64],
                "exploration_steps": 40,
            }
            if policy == "td3"
            else {}
        )
        cfg = ExperimentConfig(
            scenario="slicing",
            policy=policy,
            seed=0,
            env=env,
            agent_overrides=overrides,
            total_steps=1000,
        )
        path = run_experiment(cfg, OUT / f"slicing-{policy}.jsonl")
        paths.append(path)
        print(f"ran {policy:<8} -> {path}")

    summary = compare(paths)
    print("\nfinal-window utilities (last 5% of steps):")
    for row in summary["runs"]:
        print(f"  {row['policy']:<8} U = {row['final_window_mean']:.6f}")
    ratio = summary["final_window_ratios"]["td3/optimal"]
    print(f"\nlearned policy reaches {100 * ratio:.1f}% of the optimum")
    print("(demo-sized run; the full 8000-step benchmark with default networks")
    print(" reaches >95% — see tests/test_acceptance.py)")

    for kind in ("allocation", "scores"):
        out = emit_plot_data([paths[0]], kind, OUT / f"slicing-td3-{kind}.csv")
        print(f"wrote {out}")


if __name__ == "__main__":
    main()
