"""Deterministic corpus/document factories shared across test modules."""

from __future__ import annotations

import json

import numpy as np

from discourse_reward.classifier import LabeledExample, TrainConfig, train
from discourse_reward.distinctive import aggregate, compute_distinctive
from discourse_reward.documents import DiscourseDocument, parse_document
from discourse_reward.motifs import MotifCounts, document_motif_counts

_WORDS = [
    "rivers", "carry", "sediment", "downstream", "during", "storms",
    "cities", "along", "their", "banks", "adapt", "slowly",
    "engineers", "measure", "flow", "rates", "every", "season",
]


def _sentence(seed: int, length: int = 6) -> str:
    words = [_WORDS[(seed * 7 + j * 3) % len(_WORDS)] for j in range(length)]
    words[0] = words[0].capitalize()
    return " ".join(words) + "."


def make_record(
    doc_id: str,
    shape: str = "joint",
    n_edus: int = 4,
    author: str | None = None,
    seed: int = 0,
) -> dict:
    """Canonical record for a one-segment document with the requested tree shape.

    ``joint`` trees nest a multinuclear node (richer, human-like patterns);
    ``chain`` trees are right-branching mononuclear cascades.
    """
    sentences = [_sentence(seed + i) for i in range(n_edus)]
    spans = []
    text_parts = []
    pos = 0
    for i, sent in enumerate(sentences):
        if i > 0:
            text_parts.append(" ")
            pos += 1
        spans.append([pos, pos + len(sent)])
        text_parts.append(sent)
        pos += len(sent)
    text = "".join(text_parts)

    if shape == "joint":
        tree = _joint_tree(n_edus)
    elif shape == "chain":
        tree = _chain_tree(0, n_edus)
    else:
        raise ValueError(f"unknown shape {shape!r}")

    return {
        "doc_id": doc_id,
        "text": text,
        "author_label": author,
        "segments": [
            {
                "char_range": [0, len(text)],
                "edus": [{"span": span} for span in spans],
                "tree": tree,
            }
        ],
    }


def _leaf(i: int) -> dict:
    return {"edu": i}


def _joint_tree(n_edus: int) -> dict:
    # Elaboration(N=Joint(N...N over all but last), S=last leaf)
    assert n_edus >= 3
    joint = {
        "relation": "Joint",
        "children": [
            {"nuclearity": "Nucleus", "node": _leaf(i)} for i in range(n_edus - 1)
        ],
    }
    return {
        "relation": "Elaboration",
        "children": [
            {"nuclearity": "Nucleus", "node": joint},
            {"nuclearity": "Satellite", "node": _leaf(n_edus - 1)},
        ],
    }


def _chain_tree(lo: int, hi: int) -> dict:
    # Elaboration(N=leaf lo, S=chain over the rest)
    if hi - lo == 1:
        return _leaf(lo)
    return {
        "relation": "Elaboration",
        "children": [
            {"nuclearity": "Nucleus", "node": _leaf(lo)},
            {"nuclearity": "Satellite", "node": _chain_tree(lo + 1, hi)},
        ],
    }


def make_document(doc_id: str, shape: str = "joint", n_edus: int = 4, author: str | None = None, seed: int = 0) -> DiscourseDocument:
    return parse_document(json.dumps(make_record(doc_id, shape, n_edus, author, seed)))


def styled_corpus(n_per_class: int = 8, k: int = 3):
    """Small labeled corpus: human docs carry joint trees, machine docs chains."""
    human_docs = [
        make_document(f"h{i}", shape="joint", n_edus=4 + i % 3, author="human", seed=i)
        for i in range(n_per_class)
    ]
    machine_docs = [
        make_document(f"m{i}", shape="chain", n_edus=4 + i % 3, author="machine", seed=100 + i)
        for i in range(n_per_class)
    ]
    human_counts = [document_motif_counts(d, k) for d in human_docs]
    machine_counts = [document_motif_counts(d, k) for d in machine_docs]
    dset = compute_distinctive(human_counts, machine_counts, k)
    return human_docs, machine_docs, dset


def trained_model(dset, human_counts, machine_counts, epochs: int = 800, seed: int = 7):
    examples = [
        LabeledExample(vector=aggregate([c], dset), label=1) for c in human_counts
    ] + [
        LabeledExample(vector=aggregate([c], dset), label=0) for c in machine_counts
    ]
    return train(examples, TrainConfig(epochs=epochs, learning_rate=2.0, l2=1e-5, seed=seed))


def synthetic_motif_corpus(
    n_per_class: int = 100, seed: int = 42
) -> tuple[list[MotifCounts], list[MotifCounts]]:
    """Random motif histograms where humans use motif A five times as often."""
    rng = np.random.default_rng(seed)
    human, machine = [], []
    for _ in range(n_per_class):
        a = int(rng.integers(40, 61))
        b = int(rng.integers(8, 13))
        human.append(MotifCounts.from_dict({"A": a, "B": b}))
    for _ in range(n_per_class):
        a = int(rng.integers(8, 13))
        b = int(rng.integers(40, 61))
        machine.append(MotifCounts.from_dict({"A": a, "B": b}))
    return human, machine
