#!/usr/bin/env python3
"""Train the offloading agent, then grade its greedy policy.

Uses the fixed four-server contention instance: every slot repeats the same
arrivals, so there is a single best routing the agent should discover. After
a shortened training run, 100 greedy evaluation slots are appended; each eval
record carries the brute-force optimum (`L_opt`) and a random-routing draw
(`L_rra`) on the same arrivals, which makes grading a one-liner.
"""

from collections import Counter
from pathlib import Path

import numpy as np

from rlalloc.harness import ExperimentConfig, load_metrics, run_experiment
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
        total_steps=1000,
        eval_slots=100,
    )
    path = run_experiment(cfg, OUT / "mec-dqn-small.jsonl")
    records = load_metrics(path)
    train = [r for r in records if r["phase"] == "train"]
    evals = [r for r in records if r["phase"] == "eval"]
    print(f"ran {len(train)} training slots + {len(evals)} greedy eval slots -> {path}")

    l_eval = np.array([r["L_max"] for r in evals])
    l_opt = np.array([r["L_opt"] for r in evals])
    l_rra = np.array([r["L_rra"] for r in evals])
    within = np.mean(l_eval <= 1.05 * l_opt)
    print(f"\ngreedy policy over {len(evals)} eval slots:")
    print(f"  mean L_max          {l_eval.mean():.6f}")
    print(f"  brute-force optimum {l_opt.mean():.6f}")
    print(f"  random routing      {l_rra.mean():.6f}")
    print(f"  within 5% of optimal on {100 * within:.0f}% of slots")
    routing_counts = Counter(tuple(r["effective"]) for r in evals)
    routing, hits = routing_counts.most_common(1)[0]
    print(f"  most common routing: {routing} ({hits}/{len(evals)} slots)")


if __name__ == "__main__":
    main()
