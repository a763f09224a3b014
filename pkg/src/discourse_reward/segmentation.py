"""Tokenization, paragraph/sentence splitting, segment packing, and EDU alignment.

Segment packing targets whole paragraphs first, falls back to sentence
boundaries for oversized paragraphs, and hard-splits on the token budget as a
last resort, so that every emitted range except the final one carries a token
count within ``[floor, budget]``.
"""

from __future__ import annotations

import bisect
import re
from dataclasses import dataclass

from .errors import EmptyDocument, InvariantViolation

# Word runs or single non-space symbols; Unicode-aware via `re` str semantics.
_TOKEN_RE = re.compile(r"\w+|[^\w\s]", re.UNICODE)

# >= 1 blank line (horizontal whitespace allowed on the blank lines).
_PARAGRAPH_BREAK_RE = re.compile(r"(?:\r?\n[ \t]*){2,}")

# Terminal punctuation followed by whitespace.
_SENTENCE_BREAK_RE = re.compile(r"[.!?…]+[\"')\]”’]*\s+")


@dataclass(frozen=True, slots=True)
class Token:
    text: str
    start: int  # char offset, inclusive
    end: int  # char offset, exclusive


@dataclass(frozen=True, slots=True)
class TokenSequence:
    """Ordered, non-overlapping tokens with character offsets into one text."""

    tokens: tuple[Token, ...]

    def __post_init__(self) -> None:
        prev_end = -1
        for tok in self.tokens:
            if tok.end <= tok.start:
                raise InvariantViolation(f"empty token span [{tok.start}, {tok.end})")
            if tok.start < prev_end:
                raise InvariantViolation(
                    f"token spans overlap or are out of order at offset {tok.start}"
                )
            prev_end = tok.end

    def __len__(self) -> int:
        return len(self.tokens)

    def __iter__(self):
        return iter(self.tokens)

    @property
    def starts(self) -> list[int]:
        return [t.start for t in self.tokens]


def tokenize(text: str) -> TokenSequence:
    """Fallback tokenizer: whitespace-delimited word runs plus punctuation marks.

    Used when no external (e.g. subword) token offsets are supplied.
    """
    toks = tuple(
        Token(m.group(0), m.start(), m.end()) for m in _TOKEN_RE.finditer(text)
    )
    return TokenSequence(toks)


def token_sequence_from_offsets(text: str, offsets: list[tuple[int, int]] | list[list[int]]) -> TokenSequence:
    """Build a TokenSequence from externally supplied [start, end) offsets."""
    toks = []
    for pair in offsets:
        if len(pair) != 2:
            raise InvariantViolation(f"token offset must be a [start, end) pair, got {pair!r}")
        start, end = int(pair[0]), int(pair[1])
        if start < 0 or end > len(text):
            raise InvariantViolation(f"token span [{start}, {end}) outside text of length {len(text)}")
        toks.append(Token(text[start:end], start, end))
    return TokenSequence(tuple(toks))


def paragraph_starts(text: str) -> list[int]:
    """Start offsets of paragraphs; paragraph i effectively spans to start i+1."""
    starts = [0]
    for m in _PARAGRAPH_BREAK_RE.finditer(text):
        if m.end() < len(text):
            starts.append(m.end())
    return starts


def sentence_starts(text: str, lo: int, hi: int) -> list[int]:
    """Start offsets of sentences within text[lo:hi]."""
    starts = [lo]
    for m in _SENTENCE_BREAK_RE.finditer(text, lo, hi):
        if m.end() < hi:
            starts.append(m.end())
    return starts


def _unit_token_ranges(token_starts: list[int], unit_starts: list[int], end: int) -> list[tuple[int, int]]:
    """Half-open token index range per unit, assigning each token by its start offset."""
    ranges = []
    bounds = unit_starts[1:] + [end]
    lo = bisect.bisect_left(token_starts, unit_starts[0])
    for bound in bounds:
        hi = bisect.bisect_left(token_starts, bound)
        ranges.append((lo, hi))
        lo = hi
    return ranges


# Internal packing unit: a char range plus its token index range and a
# granularity level (0 = paragraph, 1 = sentence, 2 = raw token run).
_PARA, _SENT, _RAW = 0, 1, 2


def segment_text(
    text: str,
    tokens: TokenSequence,
    budget: int = 512,
    floor: int = 400,
) -> list[tuple[int, int]]:
    """Partition ``text`` into contiguous char ranges of roughly budget tokens.

    Whole paragraphs are packed greedily; a range closes once it holds at
    least ``floor`` tokens and the next unit would push it past ``budget``.
    When the floor cannot be reached with whole paragraphs, the offending
    paragraph is split at sentence boundaries; a single oversized sentence is
    hard-split at the token budget.  The final range may fall below the floor.
    """
    if floor < 1 or budget < floor:
        raise ValueError(f"require budget >= floor >= 1, got budget={budget}, floor={floor}")
    if not text.strip() or len(tokens) == 0:
        raise EmptyDocument("no text or tokens to segment")

    token_starts = tokens.starts
    p_starts = paragraph_starts(text)
    p_tok = _unit_token_ranges(token_starts, p_starts, len(text))
    p_bounds = p_starts[1:] + [len(text)]

    queue: list[tuple[int, int, int, int, int]] = [
        (_PARA, p_starts[i], p_bounds[i], p_tok[i][0], p_tok[i][1])
        for i in range(len(p_starts))
    ]
    queue.reverse()  # use as a stack

    boundaries: list[int] = []  # char start of each range after the first
    count = 0
    range_has_units = False

    def close(next_start: int) -> None:
        nonlocal count, range_has_units
        boundaries.append(next_start)
        count = 0
        range_has_units = False

    while queue:
        level, c_lo, c_hi, t_lo, t_hi = queue.pop()
        n_unit = t_hi - t_lo
        if n_unit == 0:
            continue  # tokenless slice (e.g. trailing whitespace) rides along
        if count + n_unit <= budget:
            count += n_unit
            range_has_units = True
            continue
        if count >= floor:
            # close the current range at this unit's first token
            close(tokens.tokens[t_lo].start)
            queue.append((level, c_lo, c_hi, t_lo, t_hi))
            continue
        # cannot close yet: refine the unit
        if level == _PARA:
            s_starts = sentence_starts(text, c_lo, c_hi)
            if len(s_starts) > 1:
                s_tok = _unit_token_ranges(token_starts, s_starts, c_hi)
                s_bounds = s_starts[1:] + [c_hi]
                for i in reversed(range(len(s_starts))):
                    queue.append((_SENT, s_starts[i], s_bounds[i], s_tok[i][0], s_tok[i][1]))
                continue
            level = _SENT  # single-sentence paragraph: fall through
        # sentence (or raw run) still overflows with count < floor: hard split
        take = budget - count
        cut_tok = t_lo + take
        cut_char = tokens.tokens[cut_tok].start
        queue.append((_RAW, cut_char, c_hi, cut_tok, t_hi))
        count += take
        range_has_units = True
        close(cut_char)

    if not range_has_units and boundaries:
        boundaries.pop()  # no trailing empty range

    ranges = []
    lo = 0
    for b in boundaries:
        ranges.append((lo, b))
        lo = b
    ranges.append((lo, len(text)))
    return ranges


def count_tokens_in_range(tokens: TokenSequence, char_range: tuple[int, int]) -> int:
    starts = tokens.starts
    return bisect.bisect_left(starts, char_range[1]) - bisect.bisect_left(starts, char_range[0])


def align_tokens(tokens: TokenSequence, edus) -> tuple[tuple[int, ...], ...]:
    """Map each EDU to the token indices it owns.

    A token belongs to an EDU iff at least half of its characters fall inside
    the EDU's span; ties between adjacent EDUs go to the earlier one.  Tokens
    overlapping no EDU stay unassigned.
    """
    assigned: list[list[int]] = [[] for _ in edus]
    if not edus:
        return ()
    edu_starts = [e.start for e in edus]
    for t_idx, tok in enumerate(tokens):
        width = tok.end - tok.start
        # candidate EDUs: the one starting at or before tok.start, plus followers
        e_idx = max(bisect.bisect_right(edu_starts, tok.start) - 1, 0)
        while e_idx < len(edus) and edus[e_idx].start < tok.end:
            edu = edus[e_idx]
            overlap = min(tok.end, edu.end) - max(tok.start, edu.start)
            if 2 * overlap >= width and overlap > 0:
                assigned[e_idx].append(t_idx)
                break
            e_idx += 1
    return tuple(tuple(ix) for ix in assigned)
