"""Softmax bandit policy over a fixed set of candidate essays."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class TemplatePolicy:
    """K-armed softmax policy; arm k stands for one pre-parsed template essay."""

    n_arms: int
    temperature: float = 1.0
    logits: np.ndarray = field(init=False)

    def __post_init__(self) -> None:
        if self.n_arms < 2:
            raise ValueError("need at least two arms")
        if self.temperature <= 0:
            raise ValueError("temperature must be positive")
        self.logits = np.zeros(self.n_arms, dtype=np.float64)

    def probabilities(self) -> np.ndarray:
        scaled = self.logits / self.temperature
        scaled = scaled - np.max(scaled)
        weights = np.exp(scaled)
        return weights / np.sum(weights)

    def sample(self, rng: np.random.Generator) -> int:
        return int(rng.choice(self.n_arms, p=self.probabilities()))
