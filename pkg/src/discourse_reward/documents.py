"""Discourse document model: EDUs, trees, segments, and the canonical record format.

Documents arrive pre-parsed (the engine never runs a discourse parser); this
module validates them, derives token/EDU bookkeeping, and round-trips the
line-delimited JSON record format used by the corpus files, the CLI, and the
scoring service.
"""

from __future__ import annotations

import bisect
import enum
import json
from dataclasses import dataclass
from typing import Any, Iterable, Iterator

from .errors import EmptyDocument, InvariantViolation, MalformedInput
from .segmentation import TokenSequence, token_sequence_from_offsets, tokenize

NUCLEUS = "Nucleus"
SATELLITE = "Satellite"

# Default token band enforced on non-final segments of multi-segment documents.
DEFAULT_TOKEN_BAND: tuple[int, int] = (400, 512)


class AuthorLabel(str, enum.Enum):
    HUMAN = "human"
    MACHINE = "machine"
    UNKNOWN = "unknown"


@dataclass(frozen=True, slots=True)
class Edu:
    """Elementary discourse unit: a leaf span of the discourse tree."""

    index: int  # 0-based ordinal within its segment
    text: str
    start: int  # char offset into the source text, inclusive
    end: int  # exclusive


@dataclass(frozen=True)
class DiscourseNode:
    """A node of a rooted discourse tree.

    Leaves reference a single EDU index; internal nodes carry a relation label
    and an ordered list of (child, nuclearity) pairs.
    """

    relation: str | None = None
    edu_index: int | None = None
    children: tuple[tuple[DiscourseNode, str], ...] = ()

    @staticmethod
    def leaf(edu_index: int) -> DiscourseNode:
        return DiscourseNode(edu_index=edu_index)

    @staticmethod
    def internal(relation: str, children: Iterable[tuple[DiscourseNode, str]]) -> DiscourseNode:
        return DiscourseNode(relation=relation, children=tuple(children))

    @property
    def is_leaf(self) -> bool:
        return self.edu_index is not None

    def leaf_indices(self) -> list[int]:
        if self.is_leaf:
            return [self.edu_index]  # type: ignore[list-item]
        out: list[int] = []
        for child, _nuc in self.children:
            out.extend(child.leaf_indices())
        return out


def validate_tree(node: DiscourseNode, n_edus: int) -> None:
    """Check nuclearity and EDU-coverage invariants; raise InvariantViolation."""
    _validate_node(node)
    leaves = node.leaf_indices()
    expected = list(range(n_edus))
    if sorted(leaves) != expected:
        raise InvariantViolation(
            f"tree leaves must cover EDU indices 0..{n_edus - 1} exactly once, got {sorted(leaves)}"
        )


def _validate_node(node: DiscourseNode) -> None:
    if node.is_leaf:
        if node.relation is not None or node.children:
            raise InvariantViolation("leaf node must not carry a relation or children")
        return
    if node.relation is None:
        raise InvariantViolation("internal node missing relation label")
    if len(node.children) < 2:
        raise InvariantViolation(
            f"internal node {node.relation!r} needs >= 2 children, has {len(node.children)}"
        )
    nuclearities = [nuc for _child, nuc in node.children]
    for nuc in nuclearities:
        if nuc not in (NUCLEUS, SATELLITE):
            raise InvariantViolation(f"unknown nuclearity label {nuc!r}")
    if NUCLEUS not in nuclearities:
        raise InvariantViolation(f"node {node.relation!r} has satellite-only children")
    for child, _nuc in node.children:
        _validate_node(child)


@dataclass(frozen=True)
class Segment:
    """One non-overlapping chunk of a document with its own discourse tree."""

    char_range: tuple[int, int]
    token_range: tuple[int, int]
    edus: tuple[Edu, ...]
    tree: DiscourseNode

    @property
    def token_count(self) -> int:
        return self.token_range[1] - self.token_range[0]


@dataclass(frozen=True)
class DiscourseDocument:
    doc_id: str
    source_text: str
    segments: tuple[Segment, ...]
    tokens: TokenSequence
    author_label: AuthorLabel = AuthorLabel.UNKNOWN

    def all_edus(self) -> list[Edu]:
        """EDUs across segments, in document order."""
        out: list[Edu] = []
        for seg in self.segments:
            out.extend(seg.edus)
        return out

    def segment_edu_offsets(self) -> list[int]:
        """Flat index of each segment's first EDU within all_edus()."""
        offsets = []
        acc = 0
        for seg in self.segments:
            offsets.append(acc)
            acc += len(seg.edus)
        return offsets

    @property
    def token_count(self) -> int:
        return len(self.tokens)


def validate_document(doc: DiscourseDocument, token_band: tuple[int, int] | None = DEFAULT_TOKEN_BAND) -> None:
    """Enforce all document invariants; raise on the first violation.

    ``token_band`` bounds the token count of every non-final segment of a
    multi-segment document; pass ``None`` to skip that check (e.g. for corpora
    segmented under a different budget).
    """
    if not doc.source_text.strip():
        raise EmptyDocument(f"document {doc.doc_id!r} has no text")
    if not doc.segments:
        raise EmptyDocument(f"document {doc.doc_id!r} has no segments")
    prev_end = 0
    for si, seg in enumerate(doc.segments):
        lo, hi = seg.char_range
        if not (0 <= lo < hi <= len(doc.source_text)):
            raise InvariantViolation(f"segment {si} char_range {seg.char_range} out of bounds")
        if lo < prev_end:
            raise InvariantViolation(f"segment {si} overlaps its predecessor")
        prev_end = hi
        if not seg.edus:
            raise EmptyDocument(f"segment {si} of {doc.doc_id!r} has no EDUs")
        e_prev = lo
        for edu in seg.edus:
            if not (lo <= edu.start < edu.end <= hi):
                raise InvariantViolation(
                    f"EDU {edu.index} span [{edu.start}, {edu.end}) escapes segment {si}"
                )
            if edu.start < e_prev:
                raise InvariantViolation(f"EDU {edu.index} overlaps or reorders in segment {si}")
            e_prev = edu.end
            if edu.text != doc.source_text[edu.start:edu.end]:
                raise InvariantViolation(f"EDU {edu.index} text does not match its span")
        validate_tree(seg.tree, len(seg.edus))
    if token_band is not None and len(doc.segments) > 1:
        floor, budget = token_band
        for si, seg in enumerate(doc.segments[:-1]):
            if not (floor <= seg.token_count <= budget):
                raise InvariantViolation(
                    f"segment {si} has {seg.token_count} tokens, outside [{floor}, {budget}]"
                )


# --- canonical record format -------------------------------------------------
#
# One JSON object per document (line-delimited in corpus files):
#   doc_id        str
#   text          str
#   author_label  "human" | "machine" | "unknown" | null  (optional)
#   tokens        [[start, end], ...]                     (optional)
#   segments      [{char_range: [lo, hi],
#                   edus: [{span: [lo, hi]}, ...],
#                   tree: node}, ...]
# where node is {"edu": i} for leaves or
#   {"relation": str, "children": [{"nuclearity": "Nucleus"|"Satellite", "node": node}, ...]}


def _tree_from_json(obj: Any) -> DiscourseNode:
    if not isinstance(obj, dict):
        raise MalformedInput(f"tree node must be an object, got {type(obj).__name__}")
    if "edu" in obj:
        if not isinstance(obj["edu"], int) or isinstance(obj["edu"], bool):
            raise MalformedInput("leaf 'edu' must be an integer index")
        return DiscourseNode.leaf(obj["edu"])
    if "relation" not in obj or "children" not in obj:
        raise MalformedInput("internal node needs 'relation' and 'children'")
    if not isinstance(obj["relation"], str):
        raise MalformedInput("'relation' must be a string")
    if not isinstance(obj["children"], list):
        raise MalformedInput("'children' must be a list")
    children = []
    for entry in obj["children"]:
        if not isinstance(entry, dict) or "nuclearity" not in entry or "node" not in entry:
            raise MalformedInput("child entry needs 'nuclearity' and 'node'")
        children.append((_tree_from_json(entry["node"]), entry["nuclearity"]))
    return DiscourseNode.internal(obj["relation"], children)


def _tree_to_json(node: DiscourseNode) -> dict:
    if node.is_leaf:
        return {"edu": node.edu_index}
    return {
        "relation": node.relation,
        "children": [
            {"nuclearity": nuc, "node": _tree_to_json(child)} for child, nuc in node.children
        ],
    }


def _require(record: dict, key: str, kind: type) -> Any:
    if key not in record:
        raise MalformedInput(f"record missing field {key!r}")
    value = record[key]
    if not isinstance(value, kind):
        raise MalformedInput(f"field {key!r} must be {kind.__name__}")
    return value


def document_from_record(
    record: dict,
    token_band: tuple[int, int] | None = DEFAULT_TOKEN_BAND,
) -> DiscourseDocument:
    """Build and validate a DiscourseDocument from a decoded canonical record."""
    doc_id = _require(record, "doc_id", str)
    text = _require(record, "text", str)
    raw_label = record.get("author_label")
    if raw_label is None:
        label = AuthorLabel.UNKNOWN
    else:
        try:
            label = AuthorLabel(raw_label)
        except ValueError:
            raise MalformedInput(f"unknown author_label {raw_label!r}") from None

    if record.get("tokens") is not None:
        if not isinstance(record["tokens"], list):
            raise MalformedInput("'tokens' must be a list of [start, end) pairs")
        tokens = token_sequence_from_offsets(text, record["tokens"])
    else:
        tokens = tokenize(text)

    seg_entries = _require(record, "segments", list)
    segments = []
    for si, entry in enumerate(seg_entries):
        if not isinstance(entry, dict):
            raise MalformedInput(f"segment {si} must be an object")
        char_range = entry.get("char_range")
        if (
            not isinstance(char_range, list)
            or len(char_range) != 2
            or not all(isinstance(v, int) and not isinstance(v, bool) for v in char_range)
        ):
            raise MalformedInput(f"segment {si} needs char_range [lo, hi]")
        lo, hi = char_range
        edu_entries = entry.get("edus")
        if not isinstance(edu_entries, list):
            raise MalformedInput(f"segment {si} needs an 'edus' list")
        edus = []
        for ei, edu_entry in enumerate(edu_entries):
            if not isinstance(edu_entry, dict) or "span" not in edu_entry:
                raise MalformedInput(f"EDU {ei} of segment {si} needs a 'span'")
            span = edu_entry["span"]
            if not isinstance(span, list) or len(span) != 2:
                raise MalformedInput(f"EDU {ei} span must be [lo, hi]")
            s, e = int(span[0]), int(span[1])
            if not (0 <= s <= e <= len(text)):
                raise MalformedInput(f"EDU {ei} span [{s}, {e}) outside text")
            edus.append(Edu(index=ei, text=text[s:e], start=s, end=e))
        if "tree" not in entry:
            raise MalformedInput(f"segment {si} needs a 'tree'")
        tree = _tree_from_json(entry["tree"])
        token_range = (
            _token_index(tokens, lo),
            _token_index(tokens, hi),
        )
        segments.append(
            Segment(char_range=(lo, hi), token_range=token_range, edus=tuple(edus), tree=tree)
        )

    doc = DiscourseDocument(
        doc_id=doc_id,
        source_text=text,
        segments=tuple(segments),
        tokens=tokens,
        author_label=label,
    )
    validate_document(doc, token_band=token_band)
    return doc


def _token_index(tokens: TokenSequence, char_pos: int) -> int:
    return bisect.bisect_left(tokens.starts, char_pos)


def parse_document(
    serialized: bytes | str,
    fmt: str = "json",
    token_band: tuple[int, int] | None = DEFAULT_TOKEN_BAND,
) -> DiscourseDocument:
    """Parse one serialized document record in the canonical format."""
    if fmt != "json":
        raise MalformedInput(f"unsupported document format {fmt!r}")
    if isinstance(serialized, bytes):
        try:
            serialized = serialized.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise MalformedInput(f"record is not valid UTF-8: {exc}") from exc
    try:
        record = json.loads(serialized)
    except json.JSONDecodeError as exc:
        raise MalformedInput(f"record is not valid JSON: {exc}") from exc
    if not isinstance(record, dict):
        raise MalformedInput("record must be a JSON object")
    return document_from_record(record, token_band=token_band)


def document_to_record(doc: DiscourseDocument) -> dict:
    """Serialize a document back to the canonical record shape."""
    return {
        "doc_id": doc.doc_id,
        "text": doc.source_text,
        "author_label": doc.author_label.value,
        "tokens": [[t.start, t.end] for t in doc.tokens],
        "segments": [
            {
                "char_range": list(seg.char_range),
                "edus": [{"span": [e.start, e.end]} for e in seg.edus],
                "tree": _tree_to_json(seg.tree),
            }
            for seg in doc.segments
        ],
    }


def serialize_document(doc: DiscourseDocument) -> str:
    """One-line JSON record for corpus files; parses back structurally equal."""
    return json.dumps(document_to_record(doc), ensure_ascii=False, separators=(",", ":"))


def iter_documents(
    lines: Iterable[str],
    token_band: tuple[int, int] | None = DEFAULT_TOKEN_BAND,
) -> Iterator[DiscourseDocument]:
    """Parse a line-delimited corpus, skipping blank lines."""
    for lineno, line in enumerate(lines, start=1):
        stripped = line.strip()
        if not stripped:
            continue
        try:
            yield parse_document(stripped, token_band=token_band)
        except (MalformedInput, InvariantViolation, EmptyDocument) as exc:
            raise type(exc)(f"line {lineno}: {exc}") from exc


def load_corpus(path, token_band: tuple[int, int] | None = DEFAULT_TOKEN_BAND) -> list[DiscourseDocument]:
    with open(path, "r", encoding="utf-8") as fh:
        return list(iter_documents(fh, token_band=token_band))
