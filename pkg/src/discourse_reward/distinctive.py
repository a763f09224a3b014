"""MF-IDF selection of human-distinctive motifs and motif-vector aggregation.

Motif frequency is a within-document proportion; document frequency is
smoothed as ln(N / (1 + df)) + 1.  A motif is distinctive when its
human-minus-machine mean MF-IDF gap exceeds the vocabulary mean by more than
one population standard deviation (strict inequality).
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass

import numpy as np

from .documents import DiscourseDocument
from .errors import CorruptFile, EmptyCorpus, VersionMismatch
from .motifs import (
    DEFAULT_MOTIF_SIZE,
    MotifCounts,
    build_hypergraph,
    iter_motif_instances,
)

MOTIF_SET_FORMAT = "discourse-motif-set"
MOTIF_SET_VERSION = "1.0"


@dataclass(frozen=True)
class MotifStats:
    mean_human: float
    mean_machine: float
    delta: float


@dataclass(frozen=True)
class DistinctiveMotifSet:
    """Frozen motif vocabulary with per-key MF-IDF statistics and the threshold."""

    vocabulary: tuple[str, ...]  # sorted, deduplicated
    stats: tuple[MotifStats, ...]  # aligned with vocabulary
    distinctive: frozenset[str]
    threshold: float
    mean_delta: float
    std_delta: float
    k: int

    def __post_init__(self) -> None:
        if len(self.vocabulary) != len(self.stats):
            raise ValueError("vocabulary and stats must align")

    @property
    def fingerprint(self) -> str:
        digest = hashlib.sha256()
        digest.update(str(self.k).encode())
        for key in self.vocabulary:
            digest.update(b"\x00")
            digest.update(key.encode("utf-8"))
        return digest.hexdigest()

    def is_distinctive(self, key: str) -> bool:
        return key in self.distinctive


@dataclass(frozen=True)
class MotifVector:
    """L1-normalized dense counts over the vocabulary plus a trailing OOV bucket."""

    values: np.ndarray
    vocab_fingerprint: str

    @property
    def oov(self) -> float:
        return float(self.values[-1])


def idf(n_docs: int, doc_freq: int) -> float:
    return math.log(n_docs / (1 + doc_freq)) + 1.0


def compute_distinctive(
    human_docs: list[MotifCounts],
    machine_docs: list[MotifCounts],
    k: int = DEFAULT_MOTIF_SIZE,
) -> DistinctiveMotifSet:
    """Select motifs whose human-vs-machine MF-IDF gap clears mean + one sigma."""
    if not human_docs or not machine_docs:
        raise EmptyCorpus("need at least one document per class")
    all_docs = list(human_docs) + list(machine_docs)
    vocabulary = sorted({key for doc in all_docs for key in doc.counts})
    if not vocabulary:
        raise EmptyCorpus("corpus contains no motifs")
    n_docs = len(all_docs)
    doc_freq = {key: sum(1 for d in all_docs if key in d.counts) for key in vocabulary}

    def class_mean(key: str, docs: list[MotifCounts], key_idf: float) -> float:
        acc = 0.0
        for doc in docs:
            if doc.total > 0:
                acc += (doc.counts.get(key, 0) / doc.total) * key_idf
        return acc / len(docs)

    stats = []
    deltas = []
    for key in vocabulary:
        key_idf = idf(n_docs, doc_freq[key])
        mean_h = class_mean(key, human_docs, key_idf)
        mean_m = class_mean(key, machine_docs, key_idf)
        delta = mean_h - mean_m
        stats.append(MotifStats(mean_human=mean_h, mean_machine=mean_m, delta=delta))
        deltas.append(delta)

    mean_delta = math.fsum(deltas) / len(deltas)
    variance = math.fsum((d - mean_delta) ** 2 for d in deltas) / len(deltas)
    std_delta = math.sqrt(variance)
    threshold = mean_delta + std_delta
    distinctive = frozenset(
        key for key, stat in zip(vocabulary, stats) if stat.delta > threshold
    )
    return DistinctiveMotifSet(
        vocabulary=tuple(vocabulary),
        stats=tuple(stats),
        distinctive=distinctive,
        threshold=threshold,
        mean_delta=mean_delta,
        std_delta=std_delta,
        k=k,
    )


def aggregate(segments: list[MotifCounts], vocab: DistinctiveMotifSet) -> MotifVector:
    """Sum segment counts into the vocabulary (plus OOV) and L1-normalize."""
    values = np.zeros(len(vocab.vocabulary) + 1, dtype=np.float64)
    index = {key: i for i, key in enumerate(vocab.vocabulary)}
    total = 0
    for seg in segments:
        for key, count in seg.counts.items():
            slot = index.get(key, len(values) - 1)
            values[slot] += count
            total += count
    if total > 0:
        values /= total
    return MotifVector(values=values, vocab_fingerprint=vocab.fingerprint)


def motif_token_indices(
    doc: DiscourseDocument,
    edu_token_map: tuple[tuple[int, ...], ...],
    dset: DistinctiveMotifSet,
    k: int | None = None,
) -> frozenset[int]:
    """Token indices of every EDU that appears in some distinctive motif instance.

    ``edu_token_map`` is aligned with ``doc.all_edus()`` (flat, document order).
    """
    size = dset.k if k is None else k
    if not dset.distinctive:
        return frozenset()
    covered: set[int] = set()
    offsets = doc.segment_edu_offsets()
    for seg, offset in zip(doc.segments, offsets):
        graph = build_hypergraph(seg.tree)
        for inst in iter_motif_instances(graph, size):
            if inst.canonical_key not in dset.distinctive:
                continue
            for edu_index in inst.edu_indices:
                flat = offset + edu_index
                if flat < len(edu_token_map):
                    covered.update(edu_token_map[flat])
    return frozenset(covered)


# --- persistence --------------------------------------------------------------


def motif_set_to_json(dset: DistinctiveMotifSet) -> str:
    payload = {
        "format": MOTIF_SET_FORMAT,
        "version": MOTIF_SET_VERSION,
        "k": dset.k,
        "threshold": dset.threshold,
        "mean_delta": dset.mean_delta,
        "std_delta": dset.std_delta,
        "vocabulary": list(dset.vocabulary),
        "stats": [[s.mean_human, s.mean_machine, s.delta] for s in dset.stats],
        "distinctive": sorted(dset.distinctive),
    }
    return json.dumps(payload, ensure_ascii=False, separators=(",", ":"))


def motif_set_from_json(text: str | bytes) -> DistinctiveMotifSet:
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CorruptFile(f"motif set file is not valid JSON: {exc}") from exc
    if not isinstance(payload, dict) or payload.get("format") != MOTIF_SET_FORMAT:
        raise CorruptFile("not a motif set file")
    version = str(payload.get("version", ""))
    if version.split(".")[0] != MOTIF_SET_VERSION.split(".")[0]:
        raise VersionMismatch(f"unsupported motif set version {version!r}")
    try:
        vocabulary = tuple(payload["vocabulary"])
        stats = tuple(
            MotifStats(mean_human=s[0], mean_machine=s[1], delta=s[2])
            for s in payload["stats"]
        )
        dset = DistinctiveMotifSet(
            vocabulary=vocabulary,
            stats=stats,
            distinctive=frozenset(payload["distinctive"]),
            threshold=float(payload["threshold"]),
            mean_delta=float(payload["mean_delta"]),
            std_delta=float(payload["std_delta"]),
            k=int(payload["k"]),
        )
    except (KeyError, TypeError, IndexError, ValueError) as exc:
        raise CorruptFile(f"motif set file is missing fields: {exc}") from exc
    return dset


def save_motif_set(dset: DistinctiveMotifSet, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(motif_set_to_json(dset))
        fh.write("\n")


def load_motif_set(path) -> DistinctiveMotifSet:
    with open(path, "r", encoding="utf-8") as fh:
        return motif_set_from_json(fh.read())
