#!/usr/bin/env python3
"""How much does exploration cost during training?

Reruns one seeded offloading experiment at three exploration rates. All three
runs share the master seed, so the arrival sequences are identical and any
difference in latency is purely behavioral: a higher epsilon keeps taking
random routings long after the greedy policy has settled.
"""

from pathlib import Path

from rlalloc.harness import ExperimentConfig, sweep_epsilon
from rlalloc.mec import small_contention_config

OUT = Path("demo-output")


def main():
    OUT.mkdir(exist_ok=True)
    cfg = ExperimentConfig(
        scenario="mec",
        policy="dqn",
        seed=0,
        env=small_contention_config(),
        agent_overrides={"hidden": [64, 64], "exploration_steps": 100},
        total_steps=1500,
    )
    summary = sweep_epsilon(cfg, [0.1, 0.3, 0.5], out_dir=OUT / "sweep")
    print("final-window mean L_max by exploration rate:")
    for row in summary["runs"]:
        print(f"  epsilon {row['epsilon']}: {row['final_window_mean_L_max']:.6f}")
    print(f"\naligned per-slot CSV: {summary['csv_path']}")


if __name__ == "__main__":
    main()
