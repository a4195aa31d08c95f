"""Value learner over a fixed catalog of joint discrete actions.

Latencies are costs, so action selection is an arg-min and the bootstrap
target uses the minimum over next-slot action values:

    y = r + gamma * min_a Q'(s', a)

(rewards are *not* negated anywhere). The target network is refreshed by a
periodic hard copy, driven by the training loop.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from rlalloc.exceptions import TrainingDiverged
from rlalloc.numerics import (
    adam_from_payload,
    adam_init,
    adam_step,
    adam_to_payload,
    mlp_forward,
    mlp_from_payload,
    mlp_gradients,
    mlp_init,
    mlp_to_payload,
    soft_update,
)
from rlalloc.replay import Batch

Array = np.ndarray

ACTION_MODES = ("explore", "train", "eval")


@dataclass
class DqnHyperparams:
    """Training constants; defaults are the offloading-benchmark settings."""

    learning_rate: float = 1e-3
    discount: float = 0.99
    epsilon: float = 0.1
    target_sync_period: int = 100
    batch_size: int = 64
    buffer_capacity: int = 10_000
    exploration_steps: int = 500
    total_steps: int = 5000
    hidden: tuple[int, ...] = (256, 256)

    def __post_init__(self) -> None:
        self.hidden = tuple(self.hidden)

    def validate(self) -> None:
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if not 0 <= self.discount <= 1:
            raise ValueError("discount must lie in [0, 1]")
        if not 0 <= self.epsilon <= 1:
            raise ValueError("epsilon must lie in [0, 1]")
        if self.target_sync_period < 1:
            raise ValueError("target_sync_period must be >= 1")
        if self.batch_size < 1 or self.buffer_capacity < self.batch_size:
            raise ValueError("need buffer_capacity >= batch_size >= 1")
        if not 0 <= self.exploration_steps <= self.total_steps:
            raise ValueError("need 0 <= exploration_steps <= total_steps")


class DqnAgent:
    """Cost-minimizing Q-learner: Q(s, a) estimates discounted future latency."""

    def __init__(
        self,
        state_dim: int,
        num_actions: int,
        hyperparams: DqnHyperparams | None = None,
        *,
        rng: np.random.Generator | int,
    ):
        hp = hyperparams if hyperparams is not None else DqnHyperparams()
        hp.validate()
        if num_actions < 1:
            raise ValueError(f"num_actions must be >= 1, got {num_actions}")
        self.hp = hp
        self.state_dim = int(state_dim)
        self.num_actions = int(num_actions)
        init_rng = np.random.default_rng(rng)
        sizes = (self.state_dim, *hp.hidden, self.num_actions)
        self.online = mlp_init(sizes, "linear", rng=init_rng)
        self.target = self.online.copy()
        self.opt = adam_init(self.online, hp.learning_rate)
        self.train_calls = 0

    def q_values(self, state: Array) -> Array:
        q, _ = mlp_forward(self.online, np.asarray(state, dtype=float))
        return q

    def select_action(
        self, state: Array, mode: str, rng: np.random.Generator | None = None
    ) -> int:
        """Pick an action index: uniform (explore), epsilon-greedy (train), greedy (eval)."""
        if mode not in ACTION_MODES:
            raise ValueError(f"mode must be one of {ACTION_MODES}, got {mode!r}")
        if mode == "explore":
            if rng is None:
                raise ValueError("explore mode needs an rng")
            return int(rng.integers(0, self.num_actions))
        if mode == "train":
            if rng is None:
                raise ValueError("train mode needs an rng")
            if rng.uniform() < self.hp.epsilon:
                return int(rng.integers(0, self.num_actions))
        return int(np.argmin(self.q_values(state)))

    def train_step(self, batch: Batch) -> float:
        """One gradient step on the squared Bellman error; returns the loss."""
        n = len(batch)
        q_next, _ = mlp_forward(self.target, batch.next_states)
        y = batch.rewards + self.hp.discount * q_next.min(axis=1)
        q_all, cache = mlp_forward(self.online, batch.states)
        taken = batch.actions.astype(int)
        err = q_all[np.arange(n), taken] - y
        loss = float(np.mean(err**2))
        if not np.isfinite(loss):
            raise TrainingDiverged(f"value loss is not finite: {loss}")
        grad_out = np.zeros_like(q_all)
        grad_out[np.arange(n), taken] = 2.0 * err / n
        adam_step(self.online, mlp_gradients(self.online, cache, grad_out), self.opt)
        self.train_calls += 1
        return loss

    def sync_target(self) -> None:
        """Hard-copy online weights into the target network."""
        soft_update(self.target, self.online, 1.0)

    def to_payload(self) -> dict:
        return {
            "state_dim": self.state_dim,
            "num_actions": self.num_actions,
            "train_calls": self.train_calls,
            "online": mlp_to_payload(self.online),
            "target": mlp_to_payload(self.target),
            "opt": adam_to_payload(self.opt),
        }

    def load_payload(self, payload: dict) -> None:
        if payload["state_dim"] != self.state_dim or payload["num_actions"] != self.num_actions:
            raise ValueError("checkpoint dimensions do not match this agent")
        self.train_calls = int(payload["train_calls"])
        self.online = mlp_from_payload(payload["online"])
        self.target = mlp_from_payload(payload["target"])
        self.opt = adam_from_payload(payload["opt"], self.online)
