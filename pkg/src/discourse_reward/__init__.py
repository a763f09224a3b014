"""Discourse-structure reward engine.

Scores long-form text two complementary ways — a surface rubric judged by a
remote evaluator LLM, and an authorship classifier over discourse-motif
vectors — then shapes the result into a dense per-token reward tensor for an
external RL trainer.
"""

__version__ = "0.1.0"

from .analysis import DiffRow, MotifTrendSeries, TrendPoint, distribution_diff, motif_trend, pearson
from .classifier import (
    ClassifierModel,
    LabeledExample,
    TrainConfig,
    load_model,
    predict,
    save_model,
    train,
)
from .distinctive import (
    DistinctiveMotifSet,
    MotifVector,
    aggregate,
    compute_distinctive,
    load_motif_set,
    motif_token_indices,
    save_motif_set,
)
from .documents import (
    AuthorLabel,
    DiscourseDocument,
    DiscourseNode,
    Edu,
    Segment,
    load_corpus,
    parse_document,
    serialize_document,
    validate_document,
)
from .errors import EngineError
from .evaluator import (
    EvaluatorClient,
    EvaluatorClientConfig,
    EvaluatorScores,
    ScriptedTransport,
    SurfaceScore,
    build_prompt,
    evaluate,
    parse_evaluation,
)
from .motifs import (
    HyperNode,
    Motif,
    MotifCounts,
    MotifPattern,
    build_hypergraph,
    canonicalize,
    document_motif_counts,
    enumerate_motifs,
)
from .ppo import PpoConfig, clipped_surrogate, kl_penalized_rewards, one_step_advantage, prob_ratio
from .rewards import (
    LengthPenaltyConfig,
    RewardEngine,
    RewardRequest,
    RewardTensor,
    apply_length_penalty,
    assemble,
)
from .segmentation import TokenSequence, align_tokens, segment_text, tokenize

__all__ = [name for name in dir() if not name.startswith("_")]
