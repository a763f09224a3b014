"""Corpus-level analyses: per-batch distinctive-motif trends, distribution
diffs between two corpora, and a Pearson correlation utility."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .distinctive import DistinctiveMotifSet, MotifVector
from .errors import EmptyCorpus, LengthMismatch, VocabularyMismatch, ZeroVariance
from .motifs import OOV_KEY, MotifCounts


@dataclass(frozen=True, slots=True)
class TrendPoint:
    batch_index: int
    proportion: float  # distinctive motif share of all motifs in the batch
    empty: bool = False


@dataclass(frozen=True)
class MotifTrendSeries:
    points: tuple[TrendPoint, ...]

    def proportions(self) -> list[float]:
        return [p.proportion for p in self.points]


def motif_trend(
    batches: list[list[MotifCounts]], dset: DistinctiveMotifSet
) -> MotifTrendSeries:
    """Distinctive-motif proportion per batch of documents."""
    if not batches:
        raise EmptyCorpus("no batches to analyze")
    points = []
    for index, batch in enumerate(batches):
        total = sum(doc.total for doc in batch)
        if total == 0:
            points.append(TrendPoint(batch_index=index, proportion=0.0, empty=True))
            continue
        hits = sum(
            count
            for doc in batch
            for key, count in doc.counts.items()
            if key in dset.distinctive
        )
        points.append(TrendPoint(batch_index=index, proportion=hits / total))
    return MotifTrendSeries(points=tuple(points))


@dataclass(frozen=True, slots=True)
class DiffRow:
    key: str  # motif key, or "OOV" for the out-of-vocabulary bucket
    before: float
    after: float
    delta: float


def distribution_diff(
    before: MotifVector, after: MotifVector, dset: DistinctiveMotifSet
) -> list[DiffRow]:
    """Per-motif before/after weights sorted by |delta| descending.

    Both vectors must come from the supplied motif set's vocabulary; the OOV
    bucket appears as its own row, so the deltas of L1-normalized vectors sum
    to zero.
    """
    if before.vocab_fingerprint != after.vocab_fingerprint:
        raise VocabularyMismatch("vectors were aggregated over different vocabularies")
    if before.vocab_fingerprint != dset.fingerprint:
        raise VocabularyMismatch("vectors do not match the supplied motif set")
    rows = []
    keys = list(dset.vocabulary) + [OOV_KEY]
    for i, key in enumerate(keys):
        b = float(before.values[i])
        a = float(after.values[i])
        rows.append(DiffRow(key=key, before=b, after=a, delta=a - b))
    rows.sort(key=lambda r: (-abs(r.delta), r.key))
    return rows


def pearson(xs, ys) -> float:
    """Standard Pearson correlation; undefined for constant input."""
    xs = list(xs)
    ys = list(ys)
    if len(xs) != len(ys) or len(xs) < 2:
        raise LengthMismatch(
            f"need two equally long sequences of >= 2 points, got {len(xs)} and {len(ys)}"
        )
    n = len(xs)
    mean_x = math.fsum(xs) / n
    mean_y = math.fsum(ys) / n
    dx = [x - mean_x for x in xs]
    dy = [y - mean_y for y in ys]
    var_x = math.fsum(d * d for d in dx)
    var_y = math.fsum(d * d for d in dy)
    if var_x == 0.0 or var_y == 0.0:
        raise ZeroVariance("correlation is undefined when an input is constant")
    return math.fsum(a * b for a, b in zip(dx, dy)) / math.sqrt(var_x * var_y)
