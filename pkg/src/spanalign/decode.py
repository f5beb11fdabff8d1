"""Decode start/end position probabilities into answer spans.

A predictor (neural backend, oracle, or lexical baseline) assigns each
query a start distribution and an end distribution over the context's
character positions plus one null slot.  The decoder selects the span
maximizing the product of its start and end probabilities, subject to a
length cap, and predicts null when the best span does not beat the null
score by the margin ``tau``.

Vector layout: index 0 is the null slot; index ``c + 1`` is character
position ``c``.  A start index marks the span's first character and an
end index its last character, so the decoded half-open span for vector
indexes (k, l) is [k, l + 1) in character offsets.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .corpus import BitextRecord, CharSpan
from .squad import BOUNDARY_MARKER, SpanQuery


class PredictionError(ValueError):
    """Invalid prediction input (wire format, offsets, or distributions)."""


@dataclass
class DecodeConfig:
    tau: float = 0.0
    max_answer_length: int = 30  # characters; the neural cap of 15 is in subtokens
    nbest_size: int = 5

    def __post_init__(self) -> None:
        if self.nbest_size < 1:
            raise ValueError("nbest_size must be >= 1")
        if self.max_answer_length < 1:
            raise ValueError("max_answer_length must be >= 1")


@dataclass
class PositionDistributions:
    """Start/end probabilities over context positions plus a null slot."""

    query_id: str
    p_start: np.ndarray
    p_end: np.ndarray

    def __post_init__(self) -> None:
        self.p_start = np.asarray(self.p_start, dtype=np.float64)
        self.p_end = np.asarray(self.p_end, dtype=np.float64)

    @property
    def context_length(self) -> int:
        return len(self.p_start) - 1

    def validate(self) -> None:
        for name, vec in (("p_start", self.p_start), ("p_end", self.p_end)):
            if vec.ndim != 1 or len(vec) < 1:
                raise PredictionError(f"{self.query_id}: {name} must be a non-empty vector")
            if np.any(vec < 0):
                raise PredictionError(f"{self.query_id}: {name} has negative entries")
            if abs(float(vec.sum()) - 1.0) > 1e-6:
                raise PredictionError(
                    f"{self.query_id}: {name} sums to {float(vec.sum())!r}, not 1"
                )
        if len(self.p_start) != len(self.p_end):
            raise PredictionError(f"{self.query_id}: start/end vectors differ in length")

    @property
    def null_score(self) -> float:
        return float(self.p_start[0] * self.p_end[0])


@dataclass(frozen=True)
class SpanCandidate:
    """A candidate answer span scored by p_start(k) * p_end(l)."""

    span: CharSpan
    score: float


@dataclass
class SpanPrediction:
    """Decoder output for one query: ranked candidates plus null handling."""

    query_id: str
    nbest: list[SpanCandidate] = field(default_factory=list)
    null_score: float = 0.0
    is_null: bool = False

    @property
    def best(self) -> SpanCandidate | None:
        return self.nbest[0] if self.nbest else None


def _candidate_sort_key(candidate: SpanCandidate) -> tuple:
    return (-candidate.score, candidate.span.start, len(candidate.span))


def best_span(d: PositionDistributions, cfg: DecodeConfig | None = None) -> SpanCandidate:
    """Best non-null span via a linear scan over end positions.

    For each end position the maximal start probability inside the
    length window is tracked with a monotonic deque, so the scan is
    O(M) rather than O(M^2).  Ties break toward the smaller start, then
    the shorter span.
    """
    cfg = cfg or DecodeConfig()
    m = d.context_length
    if m < 1:
        raise PredictionError(f"{d.query_id}: empty context")
    p_start, p_end = d.p_start, d.p_end

    best_score = -1.0
    best_k = best_l = 0
    window: list[int] = []  # start positions, p_start non-increasing
    head = 0
    for l in range(m):
        while len(window) > head and p_start[window[-1] + 1] < p_start[l + 1]:
            window.pop()
        window.append(l)
        while window[head] < l - cfg.max_answer_length + 1:
            head += 1
        k = window[head]
        score = float(p_start[k + 1] * p_end[l + 1])
        if score > best_score or (
            score == best_score and (k < best_k or (k == best_k and l < best_l))
        ):
            best_score, best_k, best_l = score, k, l
    return SpanCandidate(CharSpan(best_k, best_l + 1), best_score)


def nbest_spans(d: PositionDistributions, cfg: DecodeConfig | None = None) -> list[SpanCandidate]:
    """Top-n spans by score under the same constraints as best_span."""
    cfg = cfg or DecodeConfig()
    m = d.context_length
    if m < 1:
        raise PredictionError(f"{d.query_id}: empty context")
    candidates = [
        SpanCandidate(CharSpan(k, l + 1), float(d.p_start[k + 1] * d.p_end[l + 1]))
        for k in range(m)
        for l in range(k, min(m, k + cfg.max_answer_length))
    ]
    candidates.sort(key=_candidate_sort_key)
    return candidates[: cfg.nbest_size]


def apply_null_rule(
    best: SpanCandidate,
    null_score: float,
    tau: float,
    query_id: str = "",
    nbest: list[SpanCandidate] | None = None,
) -> SpanPrediction:
    """Predict null unless the best span beats the null score by more than tau.

    The comparison is strict: a best span merely equal to null + tau is
    still a null prediction.
    """
    return SpanPrediction(
        query_id=query_id,
        nbest=nbest if nbest is not None else [best],
        null_score=null_score,
        is_null=not (best.score > null_score + tau),
    )


def decode(d: PositionDistributions, cfg: DecodeConfig | None = None) -> SpanPrediction:
    """Full decode of one query: n-best spans plus the null rule."""
    cfg = cfg or DecodeConfig()
    ranked = nbest_spans(d, cfg)
    return apply_null_rule(ranked[0], d.null_score, cfg.tau, d.query_id, ranked)


# ---------------------------------------------------------------------------
# Built-in predictors
# ---------------------------------------------------------------------------

Predictor = Callable[[SpanQuery], PositionDistributions]


def oracle_predict(query: SpanQuery) -> PositionDistributions:
    """Point masses on the first gold answer (or the null slot).

    Queries with several answers keep only the first; fixtures that need
    every link recovered rely on the reverse direction for the rest.
    """
    m = len(query.context)
    p_start = np.zeros(m + 1)
    p_end = np.zeros(m + 1)
    if query.is_impossible:
        p_start[0] = p_end[0] = 1.0
    else:
        answer = query.answers[0]
        p_start[answer.answer_start + 1] = 1.0
        p_end[answer.answer_start + len(answer.text)] = 1.0
    return PositionDistributions(query.id, p_start, p_end)


@dataclass
class Lexicon:
    """Conditional translation frequencies estimated from gold links."""

    forward: dict[str, dict[str, float]] = field(default_factory=dict)  # L1 token -> L2
    backward: dict[str, dict[str, float]] = field(default_factory=dict)  # L2 token -> L1

    def row(self, source_token: str, direction) -> dict[str, float]:
        table = self.forward if direction.value == "f" else self.backward
        return table.get(source_token, {})


def train_lexicon(records: Iterable[BitextRecord]) -> Lexicon:
    """Relative frequencies count(src, tgt) / count(src) over linked pairs."""
    fwd: dict[str, dict[str, float]] = {}
    bwd: dict[str, dict[str, float]] = {}
    for record in records:
        for link in record.links:
            l1_token = record.l1_tokens[link.l1]
            l2_token = record.l2_tokens[link.l2]
            fwd.setdefault(l1_token, {}).setdefault(l2_token, 0.0)
            fwd[l1_token][l2_token] += 1.0
            bwd.setdefault(l2_token, {}).setdefault(l1_token, 0.0)
            bwd[l2_token][l1_token] += 1.0
    for table in (fwd, bwd):
        for row in table.values():
            total = sum(row.values())
            for key in row:
                row[key] /= total
    return Lexicon(fwd, bwd)


def focus_token(question: str) -> str:
    """Extract the focus token from a rendered question string."""
    if BOUNDARY_MARKER in question:
        parts = question.split(BOUNDARY_MARKER)
        if len(parts) >= 3:
            return parts[1].strip()
    return question.strip()

# Mass assigned to lexicon matches; the rest is split between a uniform
# floor over all positions and the null slot.
_MATCH_MASS = 0.9
_FLOOR_MASS = 0.05


def lexical_predict(query: SpanQuery, lexicon: Lexicon) -> PositionDistributions:
    """Co-occurrence baseline: spread mass over lexicon matches in the context.

    Start mass goes to the start of each occurrence of a known target
    token (proportional to its translation probability) and end mass to
    the matching end positions.  Unmatched or unseen source tokens leave
    only the uniform floor, so the null slot wins.
    """
    m = len(query.context)
    if m < 1:
        raise PredictionError(f"{query.id}: empty context")
    row = lexicon.row(focus_token(query.question), query.direction)

    starts: dict[int, float] = {}
    ends: dict[int, float] = {}
    found_mass = 0.0
    for target, prob in row.items():
        occurrences = _find_occurrences(query.context, target)
        if not occurrences:
            continue
        found_mass += prob
        share = prob / len(occurrences)
        for begin in occurrences:
            starts[begin] = starts.get(begin, 0.0) + share
            ends[begin + len(target) - 1] = ends.get(begin + len(target) - 1, 0.0) + share

    p_start = np.full(m + 1, _FLOOR_MASS / m)
    p_end = np.full(m + 1, _FLOOR_MASS / m)
    p_start[0] = p_end[0] = 0.0
    matched = _MATCH_MASS if found_mass > 0 else 0.0
    for position, mass in starts.items():
        p_start[position + 1] += matched * mass / found_mass
    for position, mass in ends.items():
        p_end[position + 1] += matched * mass / found_mass
    p_start[0] = 1.0 - float(p_start[1:].sum())
    p_end[0] = 1.0 - float(p_end[1:].sum())
    return PositionDistributions(query.id, p_start, p_end)


def _find_occurrences(haystack: str, needle: str) -> list[int]:
    if not needle:
        return []
    positions = []
    at = haystack.find(needle)
    while at != -1:
        positions.append(at)
        at = haystack.find(needle, at + len(needle))
    return positions


# ---------------------------------------------------------------------------
# Prediction wire format (NDJSON)
# ---------------------------------------------------------------------------

def prediction_to_wire(prediction: SpanPrediction, d: PositionDistributions | None = None) -> str:
    """Render one prediction as an NDJSON line (n-best shape)."""
    payload = {
        "id": prediction.query_id,
        "nbest": [
            {
                "start": candidate.span.start,
                "end": candidate.span.end,
                # The wire carries the two factors; score is their product.
                "p_start": candidate.score if d is None else float(d.p_start[candidate.span.start + 1]),
                "p_end": 1.0 if d is None else float(d.p_end[candidate.span.end]),
            }
            for candidate in prediction.nbest
        ],
        "null_score": prediction.null_score,
    }
    return json.dumps(payload, ensure_ascii=False)


def distributions_to_wire(d: PositionDistributions) -> str:
    """Render full distributions as an NDJSON line (vector shape)."""
    payload = {
        "id": d.query_id,
        "p_start": [float(x) for x in d.p_start],
        "p_end": [float(x) for x in d.p_end],
    }
    return json.dumps(payload, ensure_ascii=False)


def read_predictions(
    lines: Iterable[str],
    cfg: DecodeConfig | None = None,
    context_lengths: Mapping[str, int] | None = None,
) -> dict[str, SpanPrediction]:
    """Parse NDJSON predictions into decoded SpanPredictions.

    Accepts both wire shapes: explicit n-best candidates with their
    start/end probabilities, or full position distributions (decoded
    here).  Offsets must be valid Unicode scalar positions into the
    query's context; violating lines are rejected.
    """
    cfg = cfg or DecodeConfig()
    predictions: dict[str, SpanPrediction] = {}
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise PredictionError(f"line {lineno}: invalid JSON: {exc}") from None
        query_id = obj.get("id")
        if not query_id:
            raise PredictionError(f"line {lineno}: missing id")
        if query_id in predictions:
            raise PredictionError(f"line {lineno}: duplicate prediction for {query_id}")
        limit = None if context_lengths is None else context_lengths.get(query_id)
        if "nbest" in obj:
            predictions[query_id] = _prediction_from_nbest(obj, cfg, limit, lineno)
        elif "p_start" in obj and "p_end" in obj:
            d = PositionDistributions(query_id, obj["p_start"], obj["p_end"])
            d.validate()
            if limit is not None and d.context_length != limit:
                raise PredictionError(
                    f"line {lineno}: {query_id}: vector length {d.context_length} "
                    f"does not match context length {limit}"
                )
            predictions[query_id] = decode(d, cfg)
        else:
            raise PredictionError(f"line {lineno}: {query_id}: no nbest or distributions")
    return predictions


def _prediction_from_nbest(
    obj: dict, cfg: DecodeConfig, limit: int | None, lineno: int
) -> SpanPrediction:
    query_id = obj["id"]
    candidates = []
    for entry in obj["nbest"]:
        start, end = entry["start"], entry["end"]
        if not (isinstance(start, int) and isinstance(end, int)) or not 0 <= start <= end:
            raise PredictionError(f"line {lineno}: {query_id}: bad offsets [{start}, {end})")
        if limit is not None and end > limit:
            raise PredictionError(
                f"line {lineno}: {query_id}: span end {end} exceeds context length {limit}"
            )
        score = float(entry["p_start"]) * float(entry["p_end"])
        if not 0.0 <= score <= 1.0 + 1e-9:
            raise PredictionError(f"line {lineno}: {query_id}: score {score} outside [0, 1]")
        candidates.append(SpanCandidate(CharSpan(start, end), score))
    candidates.sort(key=_candidate_sort_key)
    null_score = float(obj.get("null_score", 0.0))
    if not candidates:
        return SpanPrediction(query_id, [], null_score, is_null=True)
    return apply_null_rule(candidates[0], null_score, cfg.tau, query_id, candidates)
