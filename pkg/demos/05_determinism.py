#!/usr/bin/env python3
"""Every run is a pure function of its config and seed.

Two properties worth seeing once:

* Rerunning the identical config produces a byte-identical metrics file —
  including every exploration draw, replay sample, and weight update.
* A longer run extends a shorter one line for line (randomness is consumed
  at a fixed per-step rate), so partial runs stay comparable.
"""

from pathlib import Path

from rlalloc.harness import ExperimentConfig, run_experiment
from rlalloc.mec import default_mec_config

OUT = Path("demo-output")


def config(total_steps):
    return ExperimentConfig(
        scenario="mec",
        policy="dqn",
        seed=42,
        env=default_mec_config(),
        agent_overrides={"hidden": [32, 32], "exploration_steps": 50},
        total_steps=total_steps,
    )


def main():
    OUT.mkdir(exist_ok=True)
    first = run_experiment(config(300), OUT / "det-a.jsonl")
    second = run_experiment(config(300), OUT / "det-b.jsonl")
    print(f"rerun byte-identical: {first.read_bytes() == second.read_bytes()}")

    longer = run_experiment(config(600), OUT / "det-long.jsonl")
    short_lines = first.read_text().splitlines()
    long_lines = longer.read_text().splitlines()
    prefix = long_lines[: len(short_lines)] == short_lines
    print(f"600-step run extends the 300-step run line for line: {prefix}")


if __name__ == "__main__":
    main()
