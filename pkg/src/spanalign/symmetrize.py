"""Combine directional span predictions into token alignments.

Each direction yields, per source token, one best span over the target
sentence's characters.  A target token counts as aligned when its
character span is completely contained in the predicted span; it then
inherits the span's score.  The two directional weight tables are
merged by probability averaging with a threshold, or by the classic
set combinations (intersection, union, single direction).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Mapping, Sequence

from .corpus import CharSpan
from .decode import SpanPrediction
from .squad import Direction, parse_query_id


class SymmetrizeError(ValueError):
    """Inconsistent directional inputs."""


class CombineMethod(str, Enum):
    BIDI_AVG = "bidi"
    INTERSECTION = "intersection"
    UNION = "union"
    SRC2TGT = "f"
    TGT2SRC = "b"


@dataclass
class SymmetrizeConfig:
    theta: float = 0.4
    method: CombineMethod = CombineMethod.BIDI_AVG
    # Summing n-best span scores per token instead of taking the single
    # best span is a hook only; it is off by default and not validated
    # against any reference output.
    nbest_sum: bool = False

    def __post_init__(self) -> None:
        self.method = CombineMethod(self.method)
        if not 0.0 <= self.theta <= 1.0:
            raise ValueError("theta must be within [0, 1]")


@dataclass
class DirectionalWeights:
    """Per-direction token pair weights: (source index, target index) -> ω."""

    direction: Direction
    weights: dict[tuple[int, int], float] = field(default_factory=dict)

    def transposed(self) -> dict[tuple[int, int], float]:
        return {(j, i): w for (i, j), w in self.weights.items()}


@dataclass
class AlignmentHypothesis:
    """Symmetrized alignment: (l1 token index, l2 token index) -> weight."""

    links: dict[tuple[int, int], float] = field(default_factory=dict)

    def pairs(self) -> set[tuple[int, int]]:
        return set(self.links)

    def to_pharaoh(self, with_weights: bool = False) -> str:
        parts = []
        for (i, j) in sorted(self.links):
            item = f"{i}-{j}"
            if with_weights:
                item += f":{self.links[i, j]!r}"
            parts.append(item)
        return " ".join(parts)

    @classmethod
    def from_pharaoh(cls, line: str) -> "AlignmentHypothesis":
        links: dict[tuple[int, int], float] = {}
        for item in line.split():
            pair, _, weight = item.partition(":")
            left, sep, right = pair.partition("-")
            if not sep or not left.isdigit() or not right.isdigit():
                raise SymmetrizeError(f"bad pharaoh link {item!r}")
            links[int(left), int(right)] = float(weight) if weight else 1.0
        return cls(links)


def directional_weights(
    predictions: Iterable[SpanPrediction],
    source_spans: Sequence[CharSpan],
    target_spans: Sequence[CharSpan],
    nbest_sum: bool = False,
) -> DirectionalWeights:
    """Project span predictions onto target tokens by strict containment.

    Every target token whose character span lies completely inside a
    prediction's best non-null span receives that span's score.  Null
    predictions contribute nothing.
    """
    direction: Direction | None = None
    weights: dict[tuple[int, int], float] = {}
    seen: set[int] = set()
    for prediction in predictions:
        _, d, token_index, _ = parse_query_id(prediction.query_id)
        if direction is None:
            direction = d
        elif d != direction:
            raise SymmetrizeError(
                f"{prediction.query_id}: direction {d.value!r} in a {direction.value!r} batch"
            )
        if token_index >= len(source_spans):
            raise SymmetrizeError(
                f"{prediction.query_id}: no source token {token_index} "
                f"(sentence has {len(source_spans)})"
            )
        if token_index in seen:
            raise SymmetrizeError(f"{prediction.query_id}: duplicate prediction for token")
        seen.add(token_index)
        if prediction.is_null or prediction.best is None:
            continue
        candidates = prediction.nbest if nbest_sum else [prediction.best]
        for candidate in candidates:
            for j, token_span in enumerate(target_spans):
                if candidate.span.contains(token_span):
                    key = (token_index, j)
                    weights[key] = weights.get(key, 0.0) + candidate.score
    if direction is None:
        raise SymmetrizeError("no predictions given")
    return DirectionalWeights(direction, weights)


def bidi_average_threshold(
    w_f: DirectionalWeights, w_b: DirectionalWeights, theta: float = 0.4
) -> AlignmentHypothesis:
    """Average both directions per token pair; keep pairs with mean >= theta.

    The backward table is transposed into the forward index space.  A
    missing entry counts as weight 0, so a pair confidently predicted in
    one direction alone can still clear the threshold.  The boundary is
    inclusive.
    """
    if w_f.direction == w_b.direction:
        raise SymmetrizeError("both weight tables cover the same direction")
    backward = w_b.transposed()
    links: dict[tuple[int, int], float] = {}
    for pair in set(w_f.weights) | set(backward):
        mean = (w_f.weights.get(pair, 0.0) + backward.get(pair, 0.0)) / 2.0
        if mean >= theta:
            links[pair] = mean
    return AlignmentHypothesis(links)


def combine(
    w_f: DirectionalWeights,
    w_b: DirectionalWeights,
    cfg: SymmetrizeConfig | None = None,
) -> AlignmentHypothesis:
    """Merge the two directional tables per the configured method.

    Set methods treat a pair as present when its weight is positive;
    included pairs carry the directional weight (single directions) or
    the two-direction average (intersection/union).
    """
    cfg = cfg or SymmetrizeConfig()
    if cfg.method is CombineMethod.BIDI_AVG:
        return bidi_average_threshold(w_f, w_b, cfg.theta)
    if w_f.direction == w_b.direction:
        raise SymmetrizeError("both weight tables cover the same direction")
    forward = {pair: w for pair, w in w_f.weights.items() if w > 0}
    backward = {pair: w for pair, w in w_b.transposed().items() if w > 0}
    if cfg.method is CombineMethod.SRC2TGT:
        return AlignmentHypothesis(dict(forward))
    if cfg.method is CombineMethod.TGT2SRC:
        return AlignmentHypothesis(dict(backward))
    if cfg.method is CombineMethod.INTERSECTION:
        kept = set(forward) & set(backward)
    else:
        kept = set(forward) | set(backward)
    links = {
        pair: (forward.get(pair, 0.0) + backward.get(pair, 0.0)) / 2.0 for pair in kept
    }
    return AlignmentHypothesis(links)
