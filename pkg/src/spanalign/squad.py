"""Direction-specific span-prediction queries and SQuAD v2.0 documents.

Each sentence pair yields one query per source token and per direction:
the question is the source token (optionally wrapped in its context with
pilcrow boundary markers), the context is the raw target sentence, and
the answers are the character spans of the aligned target tokens.
Tokens with no alignment become unanswerable (``is_impossible``) queries,
which is how null alignment is modeled.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence

from .corpus import BitextRecord, CharSpan, CorpusError, map_tokens_to_chars

# Boundary marker around the focus token inside question strings.  The
# pilcrow is Unicode punctuation, survives multilingual vocabularies,
# and essentially never occurs in running text.
BOUNDARY_MARKER = "¶"

SQUAD_VERSION = "v2.0"


class Direction(str, enum.Enum):
    """Query direction; the value is the id component."""

    L1_TO_L2 = "f"
    L2_TO_L1 = "b"

    @property
    def reverse(self) -> "Direction":
        return Direction.L2_TO_L1 if self is Direction.L1_TO_L2 else Direction.L1_TO_L2


BOTH_DIRECTIONS = (Direction.L1_TO_L2, Direction.L2_TO_L1)


@dataclass(frozen=True)
class ContextMode:
    """How much source-sentence context a question carries.

    ``none`` is the bare token, ``window(w)`` adds up to w tokens on each
    side, ``full`` embeds the token in the whole raw source sentence.
    """

    kind: str
    window: int | None = None

    _KINDS = ("none", "window", "full")

    def __post_init__(self) -> None:
        if self.kind not in self._KINDS:
            raise ValueError(f"unknown context mode {self.kind!r}")
        if self.kind == "window" and (self.window is None or self.window < 1):
            raise ValueError("window mode needs a width >= 1")
        if self.kind != "window" and self.window is not None:
            raise ValueError(f"{self.kind} mode takes no window width")

    @classmethod
    def none(cls) -> "ContextMode":
        return cls("none")

    @classmethod
    def window_of(cls, w: int) -> "ContextMode":
        return cls("window", w)

    @classmethod
    def full(cls) -> "ContextMode":
        return cls("full")

    @classmethod
    def parse(cls, text: str) -> "ContextMode":
        """Parse a CLI-style spec: "none", "window:K", or "full"."""
        if text == "none":
            return cls.none()
        if text == "full":
            return cls.full()
        kind, sep, width = text.partition(":")
        if kind == "window" and sep and width.isdigit():
            return cls.window_of(int(width))
        raise ValueError(f"cannot parse context mode {text!r}")

    def __str__(self) -> str:
        return f"window:{self.window}" if self.kind == "window" else self.kind


class Answer(NamedTuple):
    text: str
    answer_start: int


@dataclass
class SpanQuery:
    """One span-prediction question against a target-sentence context."""

    id: str
    direction: Direction
    context: str
    question: str
    answers: list[Answer] = field(default_factory=list)

    def __post_init__(self) -> None:
        for answer in self.answers:
            found = self.context[answer.answer_start : answer.answer_start + len(answer.text)]
            if found != answer.text:
                raise ValueError(
                    f"query {self.id}: answer {answer.text!r} not at offset "
                    f"{answer.answer_start} (context has {found!r})"
                )

    @property
    def is_impossible(self) -> bool:
        return not self.answers


def make_query_id(record_id: str, direction: Direction, token_index: int, serial: int = 0) -> str:
    return f"{record_id}_{direction.value}_{token_index}_{serial}"


def parse_query_id(query_id: str) -> tuple[str, Direction, int, int]:
    """Split an id into (record id, direction, token index, serial)."""
    parts = query_id.rsplit("_", 3)
    if len(parts) != 4 or parts[1] not in ("f", "b") or not parts[2].isdigit() or not parts[3].isdigit():
        raise ValueError(f"malformed query id {query_id!r}")
    return parts[0], Direction(parts[1]), int(parts[2]), int(parts[3])


def _source_side(record: BitextRecord, direction: Direction) -> tuple[list[str], str]:
    if direction is Direction.L1_TO_L2:
        return record.l1_tokens, record.l1_raw
    return record.l2_tokens, record.l2_raw


def _target_side(record: BitextRecord, direction: Direction) -> tuple[list[str], str]:
    return _source_side(record, direction.reverse)


def render_question(
    record: BitextRecord,
    direction: Direction,
    token_index: int,
    mode: ContextMode,
) -> str:
    """Render the question string for one source token.

    The boundary markers are surrounded by single spaces in every mode;
    in full mode any whitespace already present at the focus seams is
    collapsed so that spaced scripts do not end up with double spaces.
    """
    tokens, raw = _source_side(record, direction)
    if not 0 <= token_index < len(tokens):
        raise IndexError(f"token index {token_index} out of range for {direction.value} side")
    focus = tokens[token_index]
    if mode.kind == "none":
        return focus
    if mode.kind == "window":
        w = mode.window or 0
        before = tokens[max(0, token_index - w) : token_index]
        after = tokens[token_index + 1 : token_index + 1 + w]
        parts = [*before, BOUNDARY_MARKER, focus, BOUNDARY_MARKER, *after]
        return " ".join(parts)
    span = map_tokens_to_chars(tokens, raw)[token_index]
    prefix = raw[: span.start].rstrip()
    suffix = raw[span.end :].lstrip()
    pieces = [prefix, BOUNDARY_MARKER, raw[span.start : span.end], BOUNDARY_MARKER, suffix]
    return " ".join(piece for piece in pieces if piece)


def group_answers(
    aligned_target_indexes: Iterable[int],
    target_spans: Sequence[CharSpan],
    target_raw: str,
) -> list[Answer]:
    """Group aligned target tokens into answers, one per consecutive run.

    A run of consecutive token indexes yields a single answer spanning
    from the first token's start to the last token's end (inter-token
    characters included).
    """
    indexes = sorted(set(aligned_target_indexes))
    answers: list[Answer] = []
    run_start = 0
    for i in range(1, len(indexes) + 1):
        if i == len(indexes) or indexes[i] != indexes[i - 1] + 1:
            first, last = indexes[run_start], indexes[i - 1]
            span = CharSpan(target_spans[first].start, target_spans[last].end)
            answers.append(Answer(span.text(target_raw), span.start))
            run_start = i
    return answers


def build_queries(
    record: BitextRecord,
    direction: Direction,
    mode: ContextMode,
) -> list[SpanQuery]:
    """Build exactly one query per source token of ``direction``."""
    source_tokens, _ = _source_side(record, direction)
    target_tokens, target_raw = _target_side(record, direction)
    target_spans = map_tokens_to_chars(target_tokens, target_raw)

    aligned: dict[int, set[int]] = {i: set() for i in range(len(source_tokens))}
    for link in record.links:
        if direction is Direction.L1_TO_L2:
            src, tgt = link.l1, link.l2
        else:
            src, tgt = link.l2, link.l1
        aligned[src].add(tgt)

    queries = []
    for token_index in range(len(source_tokens)):
        queries.append(
            SpanQuery(
                id=make_query_id(record.id, direction, token_index),
                direction=direction,
                context=target_raw,
                question=render_question(record, direction, token_index, mode),
                answers=group_answers(aligned[token_index], target_spans, target_raw),
            )
        )
    return queries


# ---------------------------------------------------------------------------
# SQuAD v2.0 documents
# ---------------------------------------------------------------------------

def emit_squad(queries: Sequence[SpanQuery], version_tag: str = SQUAD_VERSION) -> dict:
    """Assemble queries into a SQuAD v2.0 document.

    Paragraphs group queries by (context, direction) in first-seen order,
    so readers must not assume one paragraph per sentence pair.
    """
    corpora = set()
    paragraphs: dict[tuple[str, Direction], dict] = {}
    for query in queries:
        record_id, _, _, _ = parse_query_id(query.id)
        corpora.add(record_id.rsplit("_", 1)[0])
        key = (query.context, query.direction)
        paragraph = paragraphs.setdefault(key, {"context": query.context, "qas": []})
        paragraph["qas"].append(
            {
                "id": query.id,
                "question": query.question,
                "answers": [
                    {"text": answer.text, "answer_start": answer.answer_start}
                    for answer in query.answers
                ],
                "is_impossible": query.is_impossible,
            }
        )
    if len(corpora) > 1:
        raise ValueError(f"queries span multiple corpora: {sorted(corpora)}")
    return {"version": version_tag, "data": [{"paragraphs": list(paragraphs.values())}]}


def load_squad(document: dict) -> list[SpanQuery]:
    """Read queries back out of a SQuAD v2.0 document."""
    queries = []
    for entry in document.get("data", []):
        for paragraph in entry.get("paragraphs", []):
            context = paragraph["context"]
            for qa in paragraph["qas"]:
                answers = [Answer(a["text"], a["answer_start"]) for a in qa.get("answers", [])]
                if qa.get("is_impossible", False) and answers:
                    raise CorpusError(f"query {qa['id']}: impossible but has answers")
                _, direction, _, _ = parse_query_id(qa["id"])
                queries.append(
                    SpanQuery(
                        id=qa["id"],
                        direction=direction,
                        context=context,
                        question=qa["question"],
                        answers=answers,
                    )
                )
    return queries
