"""Deterministic workbench for learned radio-resource allocation.

Two desk-scale scenarios, each with a learner and closed-form baselines:

* bandwidth slicing — a continuous-action twin-critic policy-gradient agent
  splits a bandwidth budget across service slices, benchmarked against the
  water-filling optimum and a static equal split;
* edge task offloading — a discrete-action value learner routes overflow work
  between edge servers and the core, benchmarked against per-slot brute force
  and a uniform-random router.

Everything is float64 numpy, seeded through ``numpy.random.SeedSequence`` so
identical configurations reproduce byte-identical metrics.
"""

from rlalloc.dqn import DqnAgent, DqnHyperparams
from rlalloc.exceptions import ConfigError, TrainingDiverged
from rlalloc.harness import (
    ExperimentConfig,
    compare,
    emit_plot_data,
    load_metrics,
    oracle_report,
    run_experiment,
    sweep_epsilon,
)
from rlalloc.mec import MecConfig, MecEnv, default_mec_config, small_contention_config
from rlalloc.slicing import (
    SliceConfig,
    SlicingEnv,
    default_analytic_config,
    default_emulated_config,
)
from rlalloc.td3 import Td3Agent, Td3Hyperparams
from rlalloc.version import __version__

__all__ = [
    "ConfigError",
    "DqnAgent",
    "DqnHyperparams",
    "ExperimentConfig",
    "MecConfig",
    "MecEnv",
    "SliceConfig",
    "SlicingEnv",
    "Td3Agent",
    "Td3Hyperparams",
    "TrainingDiverged",
    "__version__",
    "compare",
    "default_analytic_config",
    "default_emulated_config",
    "default_mec_config",
    "emit_plot_data",
    "load_metrics",
    "oracle_report",
    "run_experiment",
    "small_contention_config",
    "sweep_epsilon",
]
