"""Bandwidth slicing: environment, score models, and closed-form baselines.

A budget ``B`` is split across ``I`` service slices each step. Actions live in
``[-1, 1]^I`` and are mapped to bandwidths that respect per-slice floors and
caps. Each slice earns a satisfaction score; the step reward is the product of
scores, so starving any slice collapses the objective.

Two score modes:

* ``analytic`` — a slice with allocation ``k`` against demand ``d`` scores
  ``(min(k, d)/d)**1.1 / c0``; demands may switch to a new vector at
  scheduled steps.
* ``emulated`` — scores come from simulated traffic
  (``(r + l0/l)**1.1 / c0 + f`` with per-step completions ``r``, mean latency
  ``l``, and a video-completion flag ``f``).

Baselines: ``water_fill_optimal`` maximizes the product of analytic scores
exactly (common water level with floors and caps), ``sra`` is the static even
split.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from rlalloc.traffic import ServiceProfile, SliceTraffic, StepStats

Array = np.ndarray

SCORE_EXPONENT = 1.1
MODES = ("analytic", "emulated")


@dataclass
class SliceConfig:
    """Static description of a slicing scenario.

    ``demand_changes`` maps a 1-based step index ``c`` to a replacement demand
    vector; steps ``> c`` see the new demands (analytic mode only).
    """

    total_bandwidth: float
    k_min: Array
    k_max: Array
    ideal_scores: Array
    demands: Array | None = None
    demand_changes: dict[int, Array] = field(default_factory=dict)
    mode: str = "analytic"
    services: list[ServiceProfile] | None = None
    latency_weights: Array | None = None
    step_duration: float = 1.0

    def __post_init__(self) -> None:
        self.k_min = np.asarray(self.k_min, dtype=float)
        self.k_max = np.asarray(self.k_max, dtype=float)
        self.ideal_scores = np.asarray(self.ideal_scores, dtype=float)
        if self.demands is not None:
            self.demands = np.asarray(self.demands, dtype=float)
        self.demand_changes = {
            int(step): np.asarray(vec, dtype=float) for step, vec in self.demand_changes.items()
        }
        if self.latency_weights is not None:
            self.latency_weights = np.asarray(self.latency_weights, dtype=float)

    @property
    def num_slices(self) -> int:
        return self.k_min.shape[0]

    def validate(self) -> None:
        i = self.num_slices
        if i < 1:
            raise ValueError("need at least one slice")
        if not self.total_bandwidth > 0:
            raise ValueError(f"total_bandwidth must be positive, got {self.total_bandwidth}")
        for name, arr in (("k_max", self.k_max), ("ideal_scores", self.ideal_scores)):
            if arr.shape != (i,):
                raise ValueError(f"{name} must have shape ({i},), got {arr.shape}")
        if np.any(self.k_min <= 0):
            raise ValueError("k_min entries must be positive")
        if np.any(self.k_min > self.k_max):
            raise ValueError("k_min must not exceed k_max")
        if np.any(self.k_max > self.total_bandwidth + 1e-12):
            raise ValueError("k_max must not exceed the total bandwidth")
        if self.k_min.sum() > self.total_bandwidth + 1e-12:
            raise ValueError("sum of k_min exceeds the total bandwidth: infeasible")
        if np.any(self.ideal_scores <= 0):
            raise ValueError("ideal_scores must be positive")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.step_duration <= 0:
            raise ValueError("step_duration must be positive")
        if self.mode == "analytic":
            if self.demands is None or self.demands.shape != (i,):
                raise ValueError(f"analytic mode needs a demand vector of shape ({i},)")
            if np.any(self.demands <= 0):
                raise ValueError("demands must be positive")
            for step, vec in self.demand_changes.items():
                if step < 1:
                    raise ValueError(f"demand-change step must be >= 1, got {step}")
                if vec.shape != (i,) or np.any(vec <= 0):
                    raise ValueError(f"demand change at step {step} must be {i} positive values")
        else:
            if self.services is None or len(self.services) != i:
                raise ValueError(f"emulated mode needs one service profile per slice ({i})")
            if self.latency_weights is None or self.latency_weights.shape != (i,):
                raise ValueError(f"emulated mode needs latency_weights of shape ({i},)")
            if np.any(self.latency_weights <= 0):
                raise ValueError("latency_weights must be positive")

    def demands_at(self, step: int) -> Array:
        """Demand vector in force at 1-based step ``step`` (analytic mode)."""
        if self.demands is None:
            raise ValueError("no demand vector: config is not in analytic mode")
        current = self.demands
        for change_step in sorted(self.demand_changes):
            if step > change_step:
                current = self.demand_changes[change_step]
        return current

    def to_dict(self) -> dict:
        payload: dict = {
            "total_bandwidth": self.total_bandwidth,
            "k_min": self.k_min.tolist(),
            "k_max": self.k_max.tolist(),
            "ideal_scores": self.ideal_scores.tolist(),
            "mode": self.mode,
            "step_duration": self.step_duration,
        }
        if self.demands is not None:
            payload["demands"] = self.demands.tolist()
        if self.demand_changes:
            payload["demand_changes"] = {
                str(step): vec.tolist() for step, vec in self.demand_changes.items()
            }
        if self.services is not None:
            payload["services"] = [s.to_dict() for s in self.services]
        if self.latency_weights is not None:
            payload["latency_weights"] = self.latency_weights.tolist()
        return payload

    @classmethod
    def from_dict(cls, payload: dict) -> "SliceConfig":
        services = payload.get("services")
        config = cls(
            total_bandwidth=payload["total_bandwidth"],
            k_min=payload["k_min"],
            k_max=payload["k_max"],
            ideal_scores=payload["ideal_scores"],
            demands=payload.get("demands"),
            demand_changes=payload.get("demand_changes", {}),
            mode=payload.get("mode", "analytic"),
            services=[ServiceProfile.from_dict(s) for s in services] if services else None,
            latency_weights=payload.get("latency_weights"),
            step_duration=payload.get("step_duration", 1.0),
        )
        config.validate()
        return config


def default_analytic_config() -> SliceConfig:
    """Three-slice benchmark: B=1.5, floors 0.05*B, demand shift at step 4000."""
    return SliceConfig(
        total_bandwidth=1.5,
        k_min=np.full(3, 0.075),
        k_max=np.full(3, 1.5),
        ideal_scores=np.array([0.5, 0.5, 1.0]),
        demands=np.array([1.0, 1.0, 0.1]),
        demand_changes={4000: np.array([0.5, 1.5, 0.1])},
        mode="analytic",
    )


def default_emulated_config() -> SliceConfig:
    """Three-slice emulated demo: video / voice / chat services."""
    return SliceConfig(
        total_bandwidth=1.5,
        k_min=np.full(3, 0.075),
        k_max=np.full(3, 1.5),
        ideal_scores=np.array([2.0, 2.0, 2.0]),
        mode="emulated",
        services=[
            ServiceProfile.video(file_size=4.0, cycle_length=10, chunk_count=4),
            ServiceProfile.voice(packet_size=0.3),
            ServiceProfile.chat(mean_arrivals=2.0, size_min=0.05, size_max=0.15),
        ],
        latency_weights=np.array([2.0, 1.0, 1.0]),
    )


def map_action(action: Array, config: SliceConfig) -> Array:
    """Map an action in ``[-1, 1]^I`` to a bandwidth split.

    Each slice gets its floor plus a share of the residual budget proportional
    to ``action_i + 1``, capped at ``k_max``. When every component is -1 the
    residual is split evenly. Capping may leave budget unallocated; there is
    no redistribution pass.
    """
    a = np.asarray(action, dtype=float)
    i = config.num_slices
    if a.shape != (i,):
        raise ValueError(f"action must have shape ({i},), got {a.shape}")
    if np.any(np.abs(a) > 1.0 + 1e-9):
        raise ValueError(f"action components must lie in [-1, 1], got {a}")
    a = np.clip(a, -1.0, 1.0)
    residual = config.total_bandwidth - config.k_min.sum()
    weights = a + 1.0
    denom = weights.sum()
    if denom <= 0.0:
        shares = np.full(i, residual / i)
    else:
        shares = residual * weights / denom
    return np.minimum(config.k_max, config.k_min + shares)


def score_analytic(allocation: Array, demands: Array, ideal_scores: Array) -> Array:
    """Demand-satisfaction scores ``(min(k, d)/d)**1.1 / c0``."""
    k = np.asarray(allocation, dtype=float)
    d = np.asarray(demands, dtype=float)
    c0 = np.asarray(ideal_scores, dtype=float)
    if k.shape != d.shape or k.shape != c0.shape:
        raise ValueError(
            f"shape mismatch: allocation {k.shape}, demands {d.shape}, ideal {c0.shape}"
        )
    if np.any(d <= 0):
        raise ValueError("demands must be positive")
    if np.any(k < 0):
        raise ValueError("allocations must be non-negative")
    return (np.minimum(k, d) / d) ** SCORE_EXPONENT / c0


@dataclass
class ScoreInputs:
    """Per-slice traffic measurements feeding the emulated score."""

    completed: Array  # requests finished this step
    latency: Array  # mean completion latency (time units)
    video_flag: Array  # 0/1 whole-file completion flags

    @classmethod
    def from_stats(cls, stats: list[StepStats]) -> "ScoreInputs":
        return cls(
            completed=np.array([s.completed for s in stats], dtype=float),
            latency=np.array([s.mean_latency for s in stats], dtype=float),
            video_flag=np.array([s.video_flag for s in stats], dtype=float),
        )


def score_emulated(inputs: ScoreInputs, config: SliceConfig) -> Array:
    """Traffic-driven scores ``(r + l0/l)**1.1 / c0 + f``."""
    r = np.asarray(inputs.completed, dtype=float)
    l = np.asarray(inputs.latency, dtype=float)
    f = np.asarray(inputs.video_flag, dtype=float)
    if config.latency_weights is None:
        raise ValueError("config has no latency_weights: not an emulated-mode config")
    if np.any(r < 0):
        raise ValueError("completion counts must be non-negative")
    if np.any(l <= 0):
        raise ValueError("latencies must be positive")
    return (r + config.latency_weights / l) ** SCORE_EXPONENT / config.ideal_scores + f


def utility(scores: Array) -> float:
    """Product of per-slice scores (the step reward)."""
    c = np.asarray(scores, dtype=float)
    if np.any(c <= 0):
        warnings.warn("non-positive slice score: utility loses its product meaning")
    return float(np.prod(c))


def water_fill_optimal(demands: Array, config: SliceConfig, tol: float = 1e-9) -> Array:
    """Allocation maximizing the product of analytic scores.

    The optimum equalizes effective allocations at a common level ``nu``:
    ``k_i = clip(min(nu, d_i), k_min_i, k_max_i)``, with ``nu`` found by
    bisection so the budget is spent — unless every demand can be met inside
    the caps, in which case the saturating allocation is returned and the
    leftover budget stays idle.
    """
    d = np.asarray(demands, dtype=float)
    i = config.num_slices
    if d.shape != (i,):
        raise ValueError(f"demands must have shape ({i},), got {d.shape}")
    if np.any(d <= 0):
        raise ValueError("demands must be positive")
    config.validate()
    b = config.total_bandwidth
    saturated = np.clip(d, config.k_min, config.k_max)
    if saturated.sum() <= b:
        return saturated

    def spent(nu: float) -> float:
        return float(np.clip(np.minimum(nu, d), config.k_min, config.k_max).sum())

    lo, hi = 0.0, float(d.max())
    for _ in range(500):
        if hi - lo <= min(tol, 1e-12):
            break
        mid = 0.5 * (lo + hi)
        if spent(mid) < b:
            lo = mid
        else:
            hi = mid
    nu = 0.5 * (lo + hi)
    return np.clip(np.minimum(nu, d), config.k_min, config.k_max)


def sra(config: SliceConfig) -> Array:
    """Static even split ``B/I`` per slice; rejects configs where that violates a bound."""
    config.validate()
    share = config.total_bandwidth / config.num_slices
    k = np.full(config.num_slices, share)
    if np.any(k < config.k_min - 1e-12) or np.any(k > config.k_max + 1e-12):
        raise ValueError(f"even share {share} violates per-slice bounds")
    return k


class SlicingEnv:
    """Step-by-step slicing environment over either score mode.

    Observations are flat vectors of per-slice triples ``(o, l, d)``:
    previous allocation over ``B``, normalized mean latency (0 in analytic
    mode), and normalized demand. Steps are 1-based.
    """

    def __init__(self, config: SliceConfig, rng: np.random.Generator | int | None = None):
        config.validate()
        self.config = config
        self._rng = np.random.default_rng(rng)
        self._step_count = 0
        self._prev_allocation: Array | None = None
        self._traffic: list[SliceTraffic] | None = None
        self._last_obs: Array | None = None

    @property
    def num_slices(self) -> int:
        return self.config.num_slices

    @property
    def observation_dim(self) -> int:
        return 3 * self.config.num_slices

    @property
    def step_count(self) -> int:
        return self._step_count

    def _observation(self, latencies: Array, demand_obs: Array) -> Array:
        o = self._prev_allocation / self.config.total_bandwidth
        return np.column_stack([o, latencies, demand_obs]).ravel()

    def reset(self) -> Array:
        cfg = self.config
        i = cfg.num_slices
        self._step_count = 0
        self._prev_allocation = np.full(i, cfg.total_bandwidth / i)
        if cfg.mode == "emulated":
            self._traffic = [SliceTraffic(p, cfg.step_duration) for p in cfg.services]
            latencies = np.full(i, cfg.step_duration) / cfg.latency_weights
            demand_obs = np.zeros(i)
        else:
            self._traffic = None
            latencies = np.zeros(i)
            demand_obs = cfg.demands_at(1) / cfg.total_bandwidth
        self._last_obs = self._observation(latencies, demand_obs)
        return self._last_obs

    def step(self, action: Array) -> tuple[Array, float, dict]:
        """Apply an action in ``[-1, 1]^I``; returns (obs, utility, info)."""
        k = map_action(action, self.config)
        obs, reward, info = self.step_allocation(k)
        info["action"] = np.asarray(action, dtype=float)
        return obs, reward, info

    def step_allocation(self, allocation: Array) -> tuple[Array, float, dict]:
        """Apply a bandwidth split directly (used by the closed-form baselines)."""
        if self._last_obs is None:
            raise RuntimeError("call reset() before stepping the environment")
        cfg = self.config
        k = np.asarray(allocation, dtype=float)
        if k.shape != (cfg.num_slices,):
            raise ValueError(f"allocation must have shape ({cfg.num_slices},), got {k.shape}")
        t = self._step_count + 1
        if cfg.mode == "analytic":
            demands_now = cfg.demands_at(t)
            scores = score_analytic(k, demands_now, cfg.ideal_scores)
            reward = utility(scores)
            self._prev_allocation = k
            self._step_count = t
            obs = self._observation(
                np.zeros(cfg.num_slices), cfg.demands_at(t + 1) / cfg.total_bandwidth
            )
            info = {"k": k, "scores": scores, "utility": reward, "demands": demands_now}
        else:
            stats = [tr.advance(k_i, self._rng) for tr, k_i in zip(self._traffic, k)]
            inputs = ScoreInputs.from_stats(stats)
            scores = score_emulated(inputs, cfg)
            reward = utility(scores)
            self._prev_allocation = k
            self._step_count = t
            latencies = inputs.latency / cfg.latency_weights
            demand_obs = np.array(
                [s.arrived for s in stats]
            ) / (cfg.total_bandwidth * cfg.step_duration)
            obs = self._observation(latencies, demand_obs)
            info = {"k": k, "scores": scores, "utility": reward, "stats": stats}
        self._last_obs = obs
        return obs, reward, info
