"""Pure PPO math kernels used to validate reward outputs end to end.

Only the quantities an external trainer would recompute live here: the
probability ratio, the clipped surrogate, the one-step advantage, and
per-token KL shaping.  No optimizer is shipped; the learning-rate field in
PpoConfig documents the update step that belongs to the trainer.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import LengthMismatch, NonFinite


@dataclass(frozen=True)
class PpoConfig:
    epsilon: float = 0.2
    gamma: float = 1.0
    learning_rate: float = 1e-5
    kl_coefficient: float = 0.03

    def __post_init__(self) -> None:
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if not (0.0 <= self.gamma <= 1.0):
            raise ValueError("gamma must be in [0, 1]")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.kl_coefficient < 0:
            raise ValueError("kl_coefficient must be >= 0")


def prob_ratio(logp_new: float, logp_old: float) -> float:
    """exp(logp_new - logp_old); the new/old policy probability ratio."""
    if not (math.isfinite(logp_new) and math.isfinite(logp_old)):
        raise NonFinite(f"log-probs must be finite, got {logp_new}, {logp_old}")
    return math.exp(logp_new - logp_old)


def clipped_surrogate(ratio: float, advantage: float, epsilon: float) -> float:
    """min(ratio * A, clip(ratio, 1 - eps, 1 + eps) * A)."""
    clipped = min(max(ratio, 1.0 - epsilon), 1.0 + epsilon)
    return min(ratio * advantage, clipped * advantage)


def one_step_advantage(reward: float, gamma: float, v_next: float, v_curr: float) -> float:
    """reward + gamma * V(next) - V(current)."""
    return reward + gamma * v_next - v_curr


def kl_penalized_rewards(rewards, kl_per_token, beta: float) -> np.ndarray:
    """Element-wise rewards - beta * KL."""
    r = np.asarray(rewards, dtype=np.float64)
    kl = np.asarray(kl_per_token, dtype=np.float64)
    if r.shape != kl.shape:
        raise LengthMismatch(f"rewards shape {r.shape} != kl shape {kl.shape}")
    return r - beta * kl
