"""Linear authorship classifier over motif vectors.

Logistic regression trained by full-batch gradient descent with L2
regularization on the weights (bias unregularized).  The soft probability of
human authorship is the graph-level reward.  An optional fixed-width dense
slot lets callers append an opaque external embedding to the motif features.

Training loss is non-increasing per epoch whenever the learning rate stays
below 2 / (max_i ||x_i||^2 / 4 + l2), the smoothness bound of the regularized
logistic objective.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .distinctive import MotifVector
from .errors import (
    CorruptFile,
    FingerprintMismatch,
    SingleClassCorpus,
    VersionMismatch,
    WidthMismatch,
)

MODEL_FORMAT = "discourse-authorship-model"
MODEL_VERSION = "1.0"

LABEL_HUMAN = 1
LABEL_MACHINE = 0


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 500
    learning_rate: float = 0.5
    l2: float = 1e-4
    seed: int = 0
    dense_width: int = 0

    def __post_init__(self) -> None:
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.l2 < 0:
            raise ValueError("l2 must be non-negative")
        if self.dense_width < 0:
            raise ValueError("dense_width must be non-negative")


@dataclass(frozen=True)
class LabeledExample:
    vector: MotifVector
    label: int  # LABEL_HUMAN or LABEL_MACHINE
    dense: np.ndarray | None = None


@dataclass(frozen=True)
class ClassifierModel:
    weights: np.ndarray  # len(vocabulary) + 1 (OOV) + dense_width
    bias: float
    vocab_fingerprint: str
    config: TrainConfig
    final_loss: float = float("nan")

    @property
    def feature_width(self) -> int:
        return len(self.weights)


def _features(example: LabeledExample, dense_width: int) -> np.ndarray:
    base = example.vector.values
    if dense_width == 0:
        if example.dense is not None and len(example.dense) > 0:
            raise WidthMismatch("model declares no dense slot but example carries dense features")
        return base
    dense = example.dense
    if dense is None or len(dense) != dense_width:
        got = 0 if dense is None else len(dense)
        raise WidthMismatch(f"dense slot expects width {dense_width}, got {got}")
    return np.concatenate([base, np.asarray(dense, dtype=np.float64)])


def _sigmoid(z: np.ndarray | float):
    # stable for saturated logits: the discarded np.where branch may overflow
    z = np.asarray(z, dtype=np.float64)
    with np.errstate(over="ignore", invalid="ignore"):
        ez = np.exp(z)
        out = np.where(z >= 0, 1.0 / (1.0 + np.exp(-z)), ez / (1.0 + ez))
    return out if out.shape else float(out)


def train(examples: list[LabeledExample], config: TrainConfig = TrainConfig()) -> ClassifierModel:
    """Fit the logistic model; deterministic for a fixed seed and input order."""
    if not examples:
        raise SingleClassCorpus("no training examples")
    labels = {ex.label for ex in examples}
    if labels != {LABEL_HUMAN, LABEL_MACHINE}:
        raise SingleClassCorpus(f"need both classes, got labels {sorted(labels)}")
    fingerprint = examples[0].vector.vocab_fingerprint
    for ex in examples:
        if ex.vector.vocab_fingerprint != fingerprint:
            raise FingerprintMismatch("examples built over different motif vocabularies")

    x = np.stack([_features(ex, config.dense_width) for ex in examples])
    widths = {row.shape[0] for row in x}
    if len(widths) != 1:
        raise WidthMismatch(f"inconsistent feature widths {sorted(widths)}")
    y = np.array([ex.label for ex in examples], dtype=np.float64)
    n = len(examples)

    rng = np.random.default_rng(config.seed)
    w = rng.normal(0.0, 1e-3, size=x.shape[1])
    b = 0.0
    for _epoch in range(config.epochs):
        logits = x @ w + b
        p = _sigmoid(logits)
        grad_w = x.T @ (p - y) / n + config.l2 * w
        grad_b = float(np.mean(p - y))
        w = w - config.learning_rate * grad_w
        b = b - config.learning_rate * grad_b
    logits = x @ w + b
    loss = _bce(y, logits) + 0.5 * config.l2 * float(w @ w)
    return ClassifierModel(
        weights=w,
        bias=float(b),
        vocab_fingerprint=fingerprint,
        config=config,
        final_loss=loss,
    )


def _bce(y: np.ndarray, logits: np.ndarray) -> float:
    # log(1 + exp(-z*y')) with y' in {-1, +1}, stable form
    signed = np.where(y > 0.5, -logits, logits)
    return float(np.mean(np.logaddexp(0.0, signed)))


def training_loss(model: ClassifierModel, examples: list[LabeledExample]) -> float:
    x = np.stack([_features(ex, model.config.dense_width) for ex in examples])
    y = np.array([ex.label for ex in examples], dtype=np.float64)
    logits = x @ model.weights + model.bias
    return _bce(y, logits) + 0.5 * model.config.l2 * float(model.weights @ model.weights)


def predict(
    model: ClassifierModel,
    vector: MotifVector,
    dense: np.ndarray | None = None,
) -> tuple[float, float]:
    """Return (logit, p_human) for one motif vector."""
    if vector.vocab_fingerprint != model.vocab_fingerprint:
        raise FingerprintMismatch(
            "motif vector was aggregated over a different vocabulary than the model"
        )
    features = _features(LabeledExample(vector=vector, label=LABEL_HUMAN, dense=dense), model.config.dense_width)
    if len(features) != model.feature_width:
        raise WidthMismatch(f"expected {model.feature_width} features, got {len(features)}")
    logit = float(features @ model.weights + model.bias)
    return logit, float(_sigmoid(logit))


def accuracy(model: ClassifierModel, examples: list[LabeledExample]) -> float:
    hits = 0
    for ex in examples:
        _logit, p = predict(model, ex.vector, ex.dense)
        hits += int((p >= 0.5) == (ex.label == LABEL_HUMAN))
    return hits / len(examples)


# --- persistence --------------------------------------------------------------


def model_to_json(model: ClassifierModel) -> str:
    payload = {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "vocab_fingerprint": model.vocab_fingerprint,
        "bias": model.bias,
        "weights": [float(v) for v in model.weights],
        "final_loss": model.final_loss,
        "config": {
            "epochs": model.config.epochs,
            "learning_rate": model.config.learning_rate,
            "l2": model.config.l2,
            "seed": model.config.seed,
            "dense_width": model.config.dense_width,
        },
    }
    return json.dumps(payload, ensure_ascii=False, separators=(",", ":"))


def model_from_json(text: str | bytes) -> ClassifierModel:
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CorruptFile(f"model file is not valid JSON: {exc}") from exc
    if not isinstance(payload, dict) or payload.get("format") != MODEL_FORMAT:
        raise CorruptFile("not a classifier model file")
    version = str(payload.get("version", ""))
    if version.split(".")[0] != MODEL_VERSION.split(".")[0]:
        raise VersionMismatch(f"unsupported model version {version!r}")
    try:
        cfg = payload["config"]
        config = TrainConfig(
            epochs=int(cfg["epochs"]),
            learning_rate=float(cfg["learning_rate"]),
            l2=float(cfg["l2"]),
            seed=int(cfg["seed"]),
            dense_width=int(cfg["dense_width"]),
        )
        model = ClassifierModel(
            weights=np.array(payload["weights"], dtype=np.float64),
            bias=float(payload["bias"]),
            vocab_fingerprint=str(payload["vocab_fingerprint"]),
            config=config,
            final_loss=float(payload.get("final_loss", float("nan"))),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise CorruptFile(f"model file is missing fields: {exc}") from exc
    return model


def save_model(model: ClassifierModel, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(model_to_json(model))
        fh.write("\n")


def load_model(path) -> ClassifierModel:
    with open(path, "r", encoding="utf-8") as fh:
        return model_from_json(fh.read())
