"""Reward tensor assembly: episodic score selection, length penalty, dense shaping.

The episodic reward (surface rubric average or authorship probability) is
length-penalized and placed at the final token; every token of an EDU covered
by a distinctive motif additionally earns 1/(2n), where n is the sequence
token count, so the dense mass never exceeds 1/2.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .classifier import ClassifierModel, predict
from .distinctive import DistinctiveMotifSet, aggregate, motif_token_indices
from .documents import DiscourseDocument
from .errors import (
    EmptyDocument,
    IndexOutOfRange,
    MissingDependency,
    NegativeScore,
)
from .evaluator import EvaluatorClient, evaluate
from .motifs import build_hypergraph, enumerate_motifs
from .segmentation import TokenSequence, align_tokens, tokenize

MODE_SURFACE = "surface"
MODE_GRAPH = "graph"
MODE_BLENDED = "blended"  # flagged extension: weighted surface + graph

DENSE_DENOM_SEQUENCE = "sequence"  # default: 1/(2 * sequence token count)
DENSE_DENOM_MOTIF = "motif"  # alternative: 1/(2 * covering motif token count)


@dataclass(frozen=True)
class LengthPenaltyConfig:
    alpha: float
    desired_length: int

    def __post_init__(self) -> None:
        if not (0.0 <= self.alpha <= 1.0):
            raise ValueError(f"alpha must be in [0, 1], got {self.alpha}")
        if self.desired_length < 1:
            raise ValueError(f"desired_length must be >= 1, got {self.desired_length}")


def apply_length_penalty(original: float, response_length: int, cfg: LengthPenaltyConfig) -> float:
    """Scale a score down in proportion to the shortfall below the target length."""
    if original < 0:
        raise NegativeScore(f"episodic score must be non-negative, got {original}")
    if response_length < 0:
        raise ValueError(f"response_length must be >= 0, got {response_length}")
    shortfall = max(0.0, (cfg.desired_length - response_length) / cfg.desired_length)
    return original * (1.0 - cfg.alpha * shortfall)


@dataclass(frozen=True)
class RewardTensor:
    """Per-token rewards with the episodic reward folded into the final entry.

    ``dense`` keeps the motif entries as sorted (index, value) pairs so that
    callers (and the wire format) can reconstruct the tensor bit-exactly.
    """

    rewards: np.ndarray
    episodic: float
    source: str
    dense: tuple[tuple[int, float], ...]

    @property
    def n(self) -> int:
        return len(self.rewards)

    @property
    def episodic_index(self) -> int:
        return self.n - 1

    @property
    def dense_count(self) -> int:
        return len(self.dense)


def assemble(
    episodic: float,
    motif_tokens: frozenset[int] | set[int],
    n: int,
    source: str = MODE_GRAPH,
) -> RewardTensor:
    """Dense entries of 1/(2n) at motif token positions, episodic added at n-1."""
    if n < 1:
        raise EmptyDocument(f"reward tensor needs n >= 1, got {n}")
    unit = 1.0 / (2 * n)
    return _assemble_weighted(episodic, {index: unit for index in motif_tokens}, n, source)


def _assemble_weighted(
    episodic: float,
    token_values: dict[int, float],
    n: int,
    source: str,
) -> RewardTensor:
    if n < 1:
        raise EmptyDocument(f"reward tensor needs n >= 1, got {n}")
    rewards = np.zeros(n, dtype=np.float64)
    for index, value in token_values.items():
        if not (0 <= index < n):
            raise IndexOutOfRange(f"motif token index {index} outside [0, {n})")
        rewards[index] = value
    rewards[n - 1] += episodic
    dense = tuple(sorted((i, float(v)) for i, v in token_values.items()))
    return RewardTensor(rewards=rewards, episodic=episodic, source=source, dense=dense)


@dataclass(frozen=True)
class RewardRequest:
    text: str
    desired_length: int
    mode: str = MODE_GRAPH
    doc_id: str = ""
    instruction: str | None = None
    tokens: TokenSequence | None = None
    document: DiscourseDocument | None = None


ParseProvider = Callable[[str, TokenSequence], DiscourseDocument]


@dataclass
class RewardEngine:
    """Bundles the dependencies compute_rewards needs; immutable after startup."""

    motif_set: DistinctiveMotifSet | None = None
    model: ClassifierModel | None = None
    evaluator_client: EvaluatorClient | None = None
    alpha: float = 0.5
    parse_provider: ParseProvider | None = None
    dense_denominator: str = DENSE_DENOM_SEQUENCE
    blend_weight: float = 0.5  # surface share in blended mode

    def compute_rewards(self, request: RewardRequest) -> tuple[RewardTensor, dict]:
        """Score one request; returns the tensor plus a diagnostics record."""
        mode = request.mode
        if mode not in (MODE_SURFACE, MODE_GRAPH, MODE_BLENDED):
            raise MissingDependency(f"unknown scoring mode {mode!r}")

        doc = request.document
        if doc is None and request.mode != MODE_SURFACE and self.parse_provider is None:
            raise MissingDependency(
                f"{mode} mode needs a pre-parsed document or a parse provider"
            )

        tokens = request.tokens
        if tokens is None:
            tokens = doc.tokens if doc is not None else tokenize(request.text)
        if doc is None and self.parse_provider is not None:
            doc = self.parse_provider(request.text, tokens)
        if doc is not None:
            tokens = doc.tokens
        n = len(tokens)
        if n == 0:
            raise EmptyDocument(f"document {request.doc_id!r} has no tokens")

        diagnostics: dict = {"mode": mode, "n_tokens": n}
        penalty_cfg = LengthPenaltyConfig(alpha=self.alpha, desired_length=request.desired_length)

        p_human = None
        if mode in (MODE_GRAPH, MODE_BLENDED):
            if self.model is None or self.motif_set is None:
                raise MissingDependency("graph scoring needs a classifier model and a motif set")
            assert doc is not None
            counts = [
                enumerate_motifs(build_hypergraph(seg.tree), self.motif_set.k)
                for seg in doc.segments
            ]
            vector = aggregate(counts, self.motif_set)
            logit, p_human = predict(self.model, vector)
            diagnostics["segment_count"] = len(doc.segments)
            diagnostics["logit"] = logit
            diagnostics["p_human"] = p_human
            diagnostics["total_motifs"] = int(sum(c.total for c in counts))
            diagnostics["distinctive_motifs"] = int(
                sum(
                    count
                    for c in counts
                    for key, count in c.counts.items()
                    if key in self.motif_set.distinctive
                )
            )

        surface_value = None
        if mode in (MODE_SURFACE, MODE_BLENDED):
            if self.evaluator_client is None:
                raise MissingDependency("surface scoring needs an evaluator client")
            if request.instruction is None:
                raise MissingDependency("surface scoring needs the writing instruction")
            score = evaluate(request.instruction, request.text, self.evaluator_client)
            surface_value = score.value
            diagnostics["surface_raw"] = (
                None
                if score.raw is None
                else {
                    "flow": score.raw.flow,
                    "organization": score.raw.organization,
                    "balance": score.raw.balance,
                }
            )
            diagnostics["surface_attempts"] = score.attempts
            diagnostics["surface_degraded"] = score.degraded

        if mode == MODE_GRAPH:
            raw_score = float(p_human)  # type: ignore[arg-type]
        elif mode == MODE_SURFACE:
            raw_score = float(surface_value)  # type: ignore[arg-type]
        else:
            raw_score = self.blend_weight * float(surface_value) + (  # type: ignore[arg-type]
                1.0 - self.blend_weight
            ) * float(p_human)
        diagnostics["raw_score"] = raw_score

        episodic = apply_length_penalty(raw_score, n, penalty_cfg)
        diagnostics["episodic"] = episodic
        diagnostics["penalty_multiplier"] = (
            episodic / raw_score if raw_score > 0 else 1.0
        )

        motif_tokens: frozenset[int] = frozenset()
        token_weights: dict[int, float] = {}
        if doc is not None and self.motif_set is not None:
            edu_map = align_tokens(tokens, doc.all_edus())
            if self.dense_denominator == DENSE_DENOM_MOTIF:
                token_weights = _per_motif_token_values(doc, edu_map, self.motif_set)
                motif_tokens = frozenset(token_weights)
            else:
                motif_tokens = motif_token_indices(doc, edu_map, self.motif_set)
        diagnostics["dense_count"] = len(motif_tokens)
        diagnostics["motif_coverage"] = len(motif_tokens) / n

        if self.dense_denominator == DENSE_DENOM_MOTIF:
            tensor = _assemble_weighted(episodic, token_weights, n, source=mode)
        else:
            tensor = assemble(episodic, motif_tokens, n, source=mode)
        return tensor, diagnostics


def _per_motif_token_values(
    doc: DiscourseDocument,
    edu_map: tuple[tuple[int, ...], ...],
    dset: DistinctiveMotifSet,
) -> dict[int, float]:
    """Alternative denominator: each token earns 1/(2 * tokens of its largest covering motif)."""
    from .motifs import iter_motif_instances

    values: dict[int, float] = {}
    offsets = doc.segment_edu_offsets()
    for seg, offset in zip(doc.segments, offsets):
        graph = build_hypergraph(seg.tree)
        for inst in iter_motif_instances(graph, dset.k):
            if inst.canonical_key not in dset.distinctive:
                continue
            covered: set[int] = set()
            for edu_index in inst.edu_indices:
                flat = offset + edu_index
                if flat < len(edu_map):
                    covered.update(edu_map[flat])
            if not covered:
                continue
            value = 1.0 / (2 * len(covered))
            for token in covered:
                if value > values.get(token, 0.0):
                    values[token] = value
    return values
