"""Recursive-hypergraph view of discourse trees and size-k motif enumeration.

A motif is a rooted, connected subpattern of the tree-shaped hypergraph: a
node plus a subset of its descendants closed under the parent relation.  EDU
leaves are anonymized to "LEAF"; relation nodes keep their label and a
multinuclear marker; edges keep their nuclearity.  Canonical keys are
invariant under sibling reordering.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Mapping

from .documents import NUCLEUS, DiscourseNode
from .errors import InvalidK

KIND_EDU = "edu"
KIND_RELATION = "relation"

LEAF_LABEL = "LEAF"
OOV_KEY = "OOV"

DEFAULT_MOTIF_SIZE = 3


@dataclass(frozen=True)
class HyperNode:
    """One node of the hypergraph: an EDU leaf or a labeled relation edge."""

    kind: str
    label: str
    children: tuple[tuple[HyperNode, str], ...]  # (child, nuclearity)
    multinuclear: bool = False
    edu_index: int | None = None

    @property
    def arity(self) -> int:
        return len(self.children)


def build_hypergraph(tree: DiscourseNode) -> HyperNode:
    """Transcribe a discourse tree node-for-node into hypergraph form."""
    if tree.is_leaf:
        return HyperNode(
            kind=KIND_EDU, label=LEAF_LABEL, children=(), edu_index=tree.edu_index
        )
    children = tuple(
        (build_hypergraph(child), nuc) for child, nuc in tree.children
    )
    n_nuclei = sum(1 for _child, nuc in tree.children if nuc == NUCLEUS)
    return HyperNode(
        kind=KIND_RELATION,
        label=tree.relation or "",
        children=children,
        multinuclear=n_nuclei > 1,
    )


@dataclass(frozen=True)
class MotifPattern:
    """A rooted subpattern; children order is irrelevant to its identity."""

    label: str
    multinuclear: bool
    children: tuple[tuple[str, MotifPattern], ...]  # (nuclearity, child)

    def size(self) -> int:
        return 1 + sum(child.size() for _nuc, child in self.children)


@dataclass(frozen=True)
class Motif:
    canonical_key: str
    size: int
    pattern: MotifPattern

    @staticmethod
    def from_pattern(pattern: MotifPattern) -> Motif:
        return Motif(
            canonical_key=canonicalize(pattern), size=pattern.size(), pattern=pattern
        )


_ESCAPE_CHARS = "\\(),:*"


def _escape_label(label: str) -> str:
    out = []
    for ch in label:
        if ch in _ESCAPE_CHARS:
            out.append("\\")
        out.append(ch)
    return "".join(out)


def canonicalize(pattern: MotifPattern) -> str:
    """Deterministic key, identical for sibling permutations of the same pattern."""
    head = _escape_label(pattern.label)
    if pattern.multinuclear:
        head += "*"
    if not pattern.children:
        return head
    parts = sorted(
        ("N" if nuc == NUCLEUS else "S") + ":" + canonicalize(child)
        for nuc, child in pattern.children
    )
    return head + "(" + ",".join(parts) + ")"


@dataclass(frozen=True)
class MotifCounts:
    """Sparse motif histogram for one segment or document."""

    counts: Mapping[str, int]
    total: int

    @staticmethod
    def from_dict(counts: Mapping[str, int]) -> MotifCounts:
        clean = {k: int(v) for k, v in counts.items() if v > 0}
        return MotifCounts(counts=clean, total=sum(clean.values()))

    @staticmethod
    def merge(parts: list[MotifCounts]) -> MotifCounts:
        acc: dict[str, int] = {}
        for part in parts:
            for key, value in part.counts.items():
                acc[key] = acc.get(key, 0) + value
        return MotifCounts.from_dict(acc)


@dataclass(frozen=True)
class MotifInstance:
    """A concrete occurrence of a motif: its key plus the EDU leaves it touches."""

    canonical_key: str
    edu_indices: tuple[int, ...]


def _pattern_node(node: HyperNode) -> MotifPattern:
    return MotifPattern(label=node.label, multinuclear=node.multinuclear, children=())


def _rooted_patterns(
    node: HyperNode,
    size: int,
    cache: dict[tuple[int, int], list[tuple[MotifPattern, tuple[int, ...]]]],
) -> list[tuple[MotifPattern, tuple[int, ...]]]:
    """All patterns of exactly ``size`` nodes rooted at ``node``.

    Each result carries the EDU indices of the leaves included in the pattern.
    """
    key = (id(node), size)
    hit = cache.get(key)
    if hit is not None:
        return hit
    results: list[tuple[MotifPattern, tuple[int, ...]]] = []
    if size == 1:
        edus = (node.edu_index,) if node.kind == KIND_EDU else ()
        results.append((_pattern_node(node), edus))
    elif node.children:
        for picked in _child_selections(node.children, 0, size - 1, cache):
            children = tuple((nuc, pat) for nuc, pat, _edus in picked)
            ordered = tuple(
                sorted(
                    children,
                    key=lambda item: ("N" if item[0] == NUCLEUS else "S") + ":" + canonicalize(item[1]),
                )
            )
            edus: tuple[int, ...] = ()
            for _nuc, _pat, sub_edus in picked:
                edus += sub_edus
            results.append(
                (
                    MotifPattern(
                        label=node.label,
                        multinuclear=node.multinuclear,
                        children=ordered,
                    ),
                    edus,
                )
            )
    cache[key] = results
    return results


def _child_selections(
    children: tuple[tuple[HyperNode, str], ...],
    idx: int,
    remaining: int,
    cache: dict,
) -> Iterator[list[tuple[str, MotifPattern, tuple[int, ...]]]]:
    """Ways to spend ``remaining`` nodes on children[idx:], at least one node total."""
    if idx == len(children):
        if remaining == 0:
            yield []
        return
    child, nuc = children[idx]
    # skip this child entirely
    yield from _child_selections(children, idx + 1, remaining, cache)
    # include this child with a sub-pattern of s nodes
    for s in range(1, remaining + 1):
        subs = _rooted_patterns(child, s, cache)
        if not subs:
            continue
        for rest in _child_selections(children, idx + 1, remaining - s, cache):
            for pat, edus in subs:
                yield [(nuc, pat, edus)] + rest


def _all_nodes(root: HyperNode) -> list[HyperNode]:
    out = [root]
    stack = [root]
    while stack:
        node = stack.pop()
        for child, _nuc in node.children:
            out.append(child)
            stack.append(child)
    return out


def iter_motif_instances(root: HyperNode, k: int = DEFAULT_MOTIF_SIZE) -> Iterator[MotifInstance]:
    """Every size-k motif occurrence in the graph, with the EDUs it covers."""
    if k < 2:
        raise InvalidK(f"motif size must be >= 2, got {k}")
    cache: dict[tuple[int, int], list[tuple[MotifPattern, tuple[int, ...]]]] = {}
    for node in _all_nodes(root):
        if node.kind != KIND_RELATION:
            continue
        for pattern, edus in _rooted_patterns(node, k, cache):
            yield MotifInstance(canonical_key=canonicalize(pattern), edu_indices=edus)


def enumerate_motifs(root: HyperNode, k: int = DEFAULT_MOTIF_SIZE) -> MotifCounts:
    """Count every connected rooted size-k subpattern, keyed canonically."""
    counts: dict[str, int] = {}
    for inst in iter_motif_instances(root, k):
        counts[inst.canonical_key] = counts.get(inst.canonical_key, 0) + 1
    return MotifCounts.from_dict(counts)


def document_motif_counts(doc, k: int = DEFAULT_MOTIF_SIZE) -> MotifCounts:
    """Motif counts aggregated over all segments of a document."""
    parts = [enumerate_motifs(build_hypergraph(seg.tree), k) for seg in doc.segments]
    return MotifCounts.merge(parts)
