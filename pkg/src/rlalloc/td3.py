"""Twin-critic delayed policy-gradient agent for continuous allocation actions.

The agent keeps two critics trained against the same clipped-double target

    y = r + gamma * min(Q1'(s', a~), Q2'(s', a~)),
    a~ = clip(actor'(s') + clip(noise, +-smoothing_clip), -1, 1),

and an actor updated every ``policy_delay``-th training call by ascending the
first critic's value at the actor's own action (gradient flows through the
critic's action input). Target networks trail the online ones by Polyak
blending with rate ``soft_tau`` on the same delayed cadence.
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
class Td3Hyperparams:
    """Training constants; defaults are the slicing-benchmark settings."""

    critic_lr: float = 1e-4
    actor_lr: float = 2e-4
    exploration_sigma: float = 0.1
    smoothing_sigma: float = 0.1
    smoothing_clip: float = 0.5
    discount: float = 0.99
    soft_tau: float = 0.005
    policy_delay: int = 2
    batch_size: int = 64
    buffer_capacity: int = 100_000
    exploration_steps: int = 40
    total_steps: int = 8000
    actor_hidden: tuple[int, ...] = (256, 256, 256)
    critic_hidden: tuple[int, ...] = (256, 256)

    def __post_init__(self) -> None:
        self.actor_hidden = tuple(self.actor_hidden)
        self.critic_hidden = tuple(self.critic_hidden)

    def validate(self) -> None:
        if not (self.critic_lr > 0 and self.actor_lr > 0):
            raise ValueError("learning rates must be positive")
        if self.exploration_sigma < 0 or self.smoothing_sigma < 0:
            raise ValueError("noise scales must be non-negative")
        if self.smoothing_clip <= 0:
            raise ValueError("smoothing_clip must be positive")
        if not 0 <= self.discount <= 1:
            raise ValueError("discount must lie in [0, 1]")
        if not 0 < self.soft_tau <= 1:
            raise ValueError("soft_tau must lie in (0, 1]")
        if self.policy_delay < 1:
            raise ValueError("policy_delay must be >= 1")
        if self.batch_size < 1 or self.buffer_capacity < self.batch_size:
            raise ValueError("need buffer_capacity >= batch_size >= 1")
        if not 0 <= self.exploration_steps <= self.total_steps:
            raise ValueError("need 0 <= exploration_steps <= total_steps")


class Td3Agent:
    """Actor-critic learner over states in R^S and actions in [-1, 1]^A."""

    def __init__(
        self,
        state_dim: int,
        action_dim: int,
        hyperparams: Td3Hyperparams | None = None,
        *,
        rng: np.random.Generator | int,
    ):
        hp = hyperparams if hyperparams is not None else Td3Hyperparams()
        hp.validate()
        self.hp = hp
        self.state_dim = int(state_dim)
        self.action_dim = int(action_dim)
        gen = np.random.default_rng(rng)
        init_rng, self._noise_rng = gen.spawn(2)
        actor_sizes = (self.state_dim, *hp.actor_hidden, self.action_dim)
        critic_sizes = (self.state_dim + self.action_dim, *hp.critic_hidden, 1)
        self.actor = mlp_init(actor_sizes, "tanh", rng=init_rng)
        self.critic1 = mlp_init(critic_sizes, "linear", rng=init_rng)
        self.critic2 = mlp_init(critic_sizes, "linear", rng=init_rng)
        self.actor_target = self.actor.copy()
        self.critic1_target = self.critic1.copy()
        self.critic2_target = self.critic2.copy()
        self.actor_opt = adam_init(self.actor, hp.actor_lr)
        self.critic1_opt = adam_init(self.critic1, hp.critic_lr)
        self.critic2_opt = adam_init(self.critic2, hp.critic_lr)
        self.train_calls = 0

    def select_action(
        self, state: Array, mode: str, rng: np.random.Generator | None = None
    ) -> Array:
        """Pick an action: uniform (explore), noisy policy (train), or policy (eval)."""
        if mode not in ACTION_MODES:
            raise ValueError(f"mode must be one of {ACTION_MODES}, got {mode!r}")
        if mode == "explore":
            if rng is None:
                raise ValueError("explore mode needs an rng")
            return rng.uniform(-1.0, 1.0, size=self.action_dim)
        action, _ = mlp_forward(self.actor, np.asarray(state, dtype=float))
        if mode == "train":
            if rng is None:
                raise ValueError("train mode needs an rng")
            action = action + rng.normal(0.0, self.hp.exploration_sigma, size=self.action_dim)
        return np.clip(action, -1.0, 1.0)

    def _critic_input(self, states: Array, actions: Array) -> Array:
        return np.hstack([states, actions])

    def train_step(self, batch: Batch) -> tuple[float, float | None]:
        """One gradient step on both critics, every d-th call also on the actor.

        Returns (mean critic loss, actor loss or None when skipped). Raises
        :class:`TrainingDiverged` on a non-finite loss.
        """
        hp = self.hp
        n = len(batch)
        states = batch.states
        actions = batch.actions
        rewards = batch.rewards[:, None]
        next_states = batch.next_states

        noise = np.clip(
            self._noise_rng.normal(0.0, hp.smoothing_sigma, size=(n, self.action_dim)),
            -hp.smoothing_clip,
            hp.smoothing_clip,
        )
        next_actions, _ = mlp_forward(self.actor_target, next_states)
        next_actions = np.clip(next_actions + noise, -1.0, 1.0)
        target_in = self._critic_input(next_states, next_actions)
        q1_t, _ = mlp_forward(self.critic1_target, target_in)
        q2_t, _ = mlp_forward(self.critic2_target, target_in)
        y = rewards + hp.discount * np.minimum(q1_t, q2_t)

        critic_in = self._critic_input(states, actions)
        losses = []
        for critic, opt in ((self.critic1, self.critic1_opt), (self.critic2, self.critic2_opt)):
            q, cache = mlp_forward(critic, critic_in)
            err = q - y
            loss = float(np.mean(err**2))
            if not np.isfinite(loss):
                raise TrainingDiverged(f"critic loss is not finite: {loss}")
            grads = mlp_gradients(critic, cache, (2.0 / n) * err)
            adam_step(critic, grads, opt)
            losses.append(loss)
        critic_loss = 0.5 * (losses[0] + losses[1])

        self.train_calls += 1
        actor_loss: float | None = None
        if self.train_calls % hp.policy_delay == 0:
            pi, actor_cache = mlp_forward(self.actor, states)
            q_in = self._critic_input(states, pi)
            q, q_cache = mlp_forward(self.critic1, q_in)
            actor_loss = float(-np.mean(q))
            if not np.isfinite(actor_loss):
                raise TrainingDiverged(f"actor loss is not finite: {actor_loss}")
            critic_grads = mlp_gradients(self.critic1, q_cache, np.full((n, 1), -1.0 / n))
            action_grad = critic_grads.wrt_input[:, self.state_dim :]
            actor_grads = mlp_gradients(self.actor, actor_cache, action_grad)
            adam_step(self.actor, actor_grads, self.actor_opt)
            soft_update(self.actor_target, self.actor, hp.soft_tau)
            soft_update(self.critic1_target, self.critic1, hp.soft_tau)
            soft_update(self.critic2_target, self.critic2, hp.soft_tau)
        return critic_loss, actor_loss

    def to_payload(self) -> dict:
        return {
            "state_dim": self.state_dim,
            "action_dim": self.action_dim,
            "train_calls": self.train_calls,
            "actor": mlp_to_payload(self.actor),
            "critic1": mlp_to_payload(self.critic1),
            "critic2": mlp_to_payload(self.critic2),
            "actor_target": mlp_to_payload(self.actor_target),
            "critic1_target": mlp_to_payload(self.critic1_target),
            "critic2_target": mlp_to_payload(self.critic2_target),
            "actor_opt": adam_to_payload(self.actor_opt),
            "critic1_opt": adam_to_payload(self.critic1_opt),
            "critic2_opt": adam_to_payload(self.critic2_opt),
        }

    def load_payload(self, payload: dict) -> None:
        if payload["state_dim"] != self.state_dim or payload["action_dim"] != self.action_dim:
            raise ValueError("checkpoint dimensions do not match this agent")
        self.train_calls = int(payload["train_calls"])
        self.actor = mlp_from_payload(payload["actor"])
        self.critic1 = mlp_from_payload(payload["critic1"])
        self.critic2 = mlp_from_payload(payload["critic2"])
        self.actor_target = mlp_from_payload(payload["actor_target"])
        self.critic1_target = mlp_from_payload(payload["critic1_target"])
        self.critic2_target = mlp_from_payload(payload["critic2_target"])
        self.actor_opt = adam_from_payload(payload["actor_opt"], self.actor)
        self.critic1_opt = adam_from_payload(payload["critic1_opt"], self.critic1)
        self.critic2_opt = adam_from_payload(payload["critic2_opt"], self.critic2)
