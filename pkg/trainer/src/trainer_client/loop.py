"""The toy alignment loop.

Each step samples an arm, fetches that template's reward tensor from the
scoring service (never recomputing rewards locally), forms a one-step
advantage against a running-mean baseline, and ascends the clipped surrogate
on the arm logits.  Raw response bytes are retained keyed by their SHA-256 so
every logged reward stays byte-traceable to a service reply.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from typing import Callable

import httpx
import numpy as np

from .policy import TemplatePolicy


class ServiceUnavailable(Exception):
    """Scoring service unreachable or returned an unusable response."""


@dataclass(frozen=True)
class PpoUpdateConfig:
    epsilon: float = 0.2
    gamma: float = 1.0
    learning_rate: float = 0.3
    kl_coefficient: float = 0.03  # applied service-side to token rewards; kept for parity
    inner_epochs: int = 4

    def __post_init__(self) -> None:
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if not (0.0 <= self.gamma <= 1.0):
            raise ValueError("gamma must be in [0, 1]")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.inner_epochs < 1:
            raise ValueError("inner_epochs must be >= 1")


@dataclass(frozen=True)
class StepLog:
    step: int
    arm: int
    reward: float
    episodic: float
    prob_arm0: float
    batch_index: int
    response_sha256: str


@dataclass
class TrajectoryLog:
    rows: list[StepLog] = field(default_factory=list)
    responses: dict[str, bytes] = field(default_factory=dict)
    trend: list[tuple[int, float]] = field(default_factory=list)
    converged_at: int | None = None
    non_convergence: bool = False
    final_probabilities: np.ndarray = field(default_factory=lambda: np.array([]))

    def write_csv(self, path) -> None:
        import csv

        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(
                ["step", "arm", "reward", "episodic", "prob_arm0", "batch_index", "response_sha256"]
            )
            for row in self.rows:
                writer.writerow(
                    [
                        row.step,
                        row.arm,
                        repr(row.reward),
                        repr(row.episodic),
                        repr(row.prob_arm0),
                        row.batch_index,
                        row.response_sha256,
                    ]
                )

    def write_responses(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            for digest, body in self.responses.items():
                fh.write(json.dumps({"sha256": digest, "body": body.decode("utf-8")}))
                fh.write("\n")


@dataclass(frozen=True)
class PullResult:
    reward: float
    episodic: float
    raw_body: bytes
    distinctive_motifs: int = 0
    total_motifs: int = 0


FetchFn = Callable[[int], PullResult]


def _service_fetch(client: httpx.Client, service_url: str, templates: list[dict], mode: str) -> FetchFn:
    url = service_url.rstrip("/") + "/v1/score"

    def fetch(arm: int) -> PullResult:
        try:
            response = client.post(url, json={"documents": [templates[arm]], "mode": mode})
        except httpx.HTTPError as exc:
            raise ServiceUnavailable(f"POST {url} failed: {exc}") from exc
        if response.status_code != 200:
            raise ServiceUnavailable(f"service returned {response.status_code}: {response.text[:200]}")
        body = response.content
        payload = json.loads(body)
        result = payload["results"][0]
        if "error" in result:
            raise ServiceUnavailable(f"service rejected template {arm}: {result['error']}")
        reward = reward_from_result(result)
        diagnostics = result.get("diagnostics", {})
        return PullResult(
            reward=reward,
            episodic=float(result["episodic"]),
            raw_body=body,
            distinctive_motifs=int(diagnostics.get("distinctive_motifs", 0)),
            total_motifs=int(diagnostics.get("total_motifs", 0)),
        )

    return fetch


def reward_from_result(result: dict) -> float:
    """Scalar pull reward: episodic plus all dense entries of the tensor."""
    dense = sum(entry["value"] for entry in result.get("dense", []))
    return float(result["episodic"]) + float(dense)


def run_toy_alignment(
    service_url: str,
    templates: list[dict],
    steps: int,
    cfg: PpoUpdateConfig = PpoUpdateConfig(),
    seed: int = 0,
    mode: str = "graph",
    temperature: float = 1.0,
    batch_size: int = 10,
    early_stop_probability: float | None = None,
    timeout: float = 30.0,
) -> TrajectoryLog:
    """Run the bandit loop against a live scoring service."""
    if len(templates) < 2:
        raise ValueError("need at least two templates with distinct reward profiles")
    with httpx.Client(timeout=timeout) as client:
        fetch = _service_fetch(client, service_url, templates, mode)
        return _alignment_loop(
            fetch,
            n_arms=len(templates),
            steps=steps,
            cfg=cfg,
            seed=seed,
            temperature=temperature,
            batch_size=batch_size,
            early_stop_probability=early_stop_probability,
        )


def simulate_alignment(
    rewards: list[float],
    steps: int,
    cfg: PpoUpdateConfig = PpoUpdateConfig(),
    seed: int = 0,
    temperature: float = 1.0,
    batch_size: int = 10,
    early_stop_probability: float | None = None,
) -> TrajectoryLog:
    """Oracle variant: fixed local per-arm rewards, no HTTP, same update kernels."""

    def fetch(arm: int) -> PullResult:
        body = json.dumps({"arm": arm, "reward": rewards[arm]}).encode()
        return PullResult(reward=rewards[arm], episodic=rewards[arm], raw_body=body)

    return _alignment_loop(
        fetch,
        n_arms=len(rewards),
        steps=steps,
        cfg=cfg,
        seed=seed,
        temperature=temperature,
        batch_size=batch_size,
        early_stop_probability=early_stop_probability,
    )


def _alignment_loop(
    fetch: FetchFn,
    n_arms: int,
    steps: int,
    cfg: PpoUpdateConfig,
    seed: int,
    temperature: float,
    batch_size: int,
    early_stop_probability: float | None,
) -> TrajectoryLog:
    rng = np.random.default_rng(seed)
    policy = TemplatePolicy(n_arms=n_arms, temperature=temperature)
    log = TrajectoryLog()
    baseline = 0.0
    pulls = 0
    batch_distinctive = 0
    batch_total = 0
    batch_index = 0

    for step in range(steps):
        old_probs = policy.probabilities()
        arm = int(rng.choice(n_arms, p=old_probs))
        pull = fetch(arm)

        digest = hashlib.sha256(pull.raw_body).hexdigest()
        log.responses.setdefault(digest, pull.raw_body)

        # one-step advantage: terminal value is zero, V is the running mean of
        # rewards seen so far (current pull included, so equal-reward arms
        # yield exactly zero advantage and the policy stays put)
        pulls += 1
        baseline += (pull.reward - baseline) / pulls
        advantage = pull.reward + cfg.gamma * 0.0 - baseline

        for _ in range(cfg.inner_epochs):
            probs = policy.probabilities()
            ratio = probs[arm] / old_probs[arm]
            clipped_out = (advantage >= 0 and ratio > 1.0 + cfg.epsilon) or (
                advantage < 0 and ratio < 1.0 - cfg.epsilon
            )
            if clipped_out:
                break
            grad = advantage * ratio * (-probs)
            grad[arm] += advantage * ratio
            policy.logits += cfg.learning_rate * grad

        probs = policy.probabilities()
        batch_distinctive += pull.distinctive_motifs
        batch_total += pull.total_motifs
        log.rows.append(
            StepLog(
                step=step,
                arm=arm,
                reward=pull.reward,
                episodic=pull.episodic,
                prob_arm0=float(probs[0]),
                batch_index=batch_index,
                response_sha256=digest,
            )
        )
        if (step + 1) % batch_size == 0:
            proportion = batch_distinctive / batch_total if batch_total else 0.0
            log.trend.append((batch_index, proportion))
            batch_distinctive = 0
            batch_total = 0
            batch_index += 1

        if (
            log.converged_at is None
            and early_stop_probability is not None
            and probs[0] > early_stop_probability
        ):
            log.converged_at = step + 1
            break

    if batch_total or batch_distinctive:
        log.trend.append(
            (batch_index, batch_distinctive / batch_total if batch_total else 0.0)
        )
    log.non_convergence = early_stop_probability is not None and log.converged_at is None
    log.final_probabilities = policy.probabilities()
    return log
