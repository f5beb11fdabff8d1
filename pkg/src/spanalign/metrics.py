"""Alignment scoring against sure/possible gold links.

Two conventions: "och_ney" credits precision against the possible set
and recall against the sure set, with the matching error rate; "plain"
treats the whole gold link set as both sure and possible, under which
the error rate reduces to 1 - F1.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Mapping

from .corpus import BitextRecord
from .symmetrize import AlignmentHypothesis

Pair = tuple[int, int]


class MetricsError(ValueError):
    """Gold standard unusable for scoring."""


class Convention(str, Enum):
    PLAIN = "plain"
    OCH_NEY = "och-ney"


# The error rate can reward precision-heavy hypotheses when sure and
# possible sets differ; the note rides along in every report.
AER_CAVEAT = (
    "note: the error rate favors precision when sure and possible links differ; "
    "compare f1 alongside it"
)


@dataclass
class GoldStandard:
    """Gold links split into sure and possible, with sure ⊆ possible."""

    sure: set[Pair]
    possible: set[Pair] = field(default_factory=set)

    def __post_init__(self) -> None:
        self.sure = set(self.sure)
        # Possible lists in the wild often omit the sure links; complete them.
        self.possible = set(self.possible) | self.sure

    @classmethod
    def from_record(cls, record: BitextRecord) -> "GoldStandard":
        return cls(sure=record.sure_pairs(), possible=record.link_pairs())


@dataclass
class EvalReport:
    convention: Convention
    precision: float
    recall: float
    f1: float
    aer: float
    n_hypothesis: int
    n_sure: int
    n_possible: int
    n_sure_hits: int
    n_possible_hits: int
    empty_hypothesis: bool = False

    def as_dict(self) -> dict:
        return {
            "convention": self.convention.value,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "aer": self.aer,
            "counts": {
                "hypothesis": self.n_hypothesis,
                "sure": self.n_sure,
                "possible": self.n_possible,
                "sure_hits": self.n_sure_hits,
                "possible_hits": self.n_possible_hits,
            },
            "empty_hypothesis": self.empty_hypothesis,
            "note": AER_CAVEAT,
        }

    def as_json(self) -> str:
        return json.dumps(self.as_dict(), ensure_ascii=False)

    def as_table(self) -> str:
        """Percentages at one decimal; internal values stay full precision."""
        lines = [
            f"convention  {self.convention.value}",
            f"precision   {self.precision * 100:.1f}",
            f"recall      {self.recall * 100:.1f}",
            f"f1          {self.f1 * 100:.1f}",
            f"aer         {self.aer * 100:.1f}",
            f"links       hyp={self.n_hypothesis} sure={self.n_sure} possible={self.n_possible}",
        ]
        if self.empty_hypothesis:
            lines.append("warning     empty hypothesis; precision reported as 0")
        lines.append(AER_CAVEAT)
        return "\n".join(lines)


def f1_score(precision: float, recall: float) -> float:
    if precision + recall == 0:
        return 0.0
    return 2 * precision * recall / (precision + recall)


def score_sets(
    hypothesis: set[Pair], gold: GoldStandard, convention: Convention = Convention.PLAIN
) -> EvalReport:
    """Score a bare link set; weights never matter, membership does."""
    convention = Convention(convention)
    if convention is Convention.PLAIN:
        # One undifferentiated gold set: the completed possible links.
        gold = GoldStandard(sure=gold.possible)
    if not gold.sure:
        raise MetricsError("gold standard has no sure links; nothing to score against")

    sure_hits = len(gold.sure & hypothesis)
    possible_hits = len(gold.possible & hypothesis)
    empty = len(hypothesis) == 0
    precision = 0.0 if empty else possible_hits / len(hypothesis)
    recall = sure_hits / len(gold.sure)
    aer = 1.0 - (sure_hits + possible_hits) / (len(gold.sure) + len(hypothesis))
    return EvalReport(
        convention=convention,
        precision=precision,
        recall=recall,
        f1=f1_score(precision, recall),
        aer=aer,
        n_hypothesis=len(hypothesis),
        n_sure=len(gold.sure),
        n_possible=len(gold.possible),
        n_sure_hits=sure_hits,
        n_possible_hits=possible_hits,
        empty_hypothesis=empty,
    )


def score(
    hypothesis: AlignmentHypothesis,
    gold: GoldStandard,
    convention: Convention = Convention.PLAIN,
) -> EvalReport:
    return score_sets(hypothesis.pairs(), gold, convention)


def score_corpus(
    hypotheses: Mapping[str, AlignmentHypothesis],
    golds: Mapping[str, GoldStandard],
    convention: Convention = Convention.PLAIN,
) -> EvalReport:
    """Aggregate counts over sentence pairs, then compute the ratios once.

    Pairs are namespaced by record id so identical token indexes in
    different sentences cannot collide.
    """
    if set(hypotheses) - set(golds):
        missing = sorted(set(hypotheses) - set(golds))[:5]
        raise MetricsError(f"hypotheses without gold records: {missing}")
    merged_hyp: set[tuple[str, int, int]] = set()
    merged_sure: set[tuple[str, int, int]] = set()
    merged_possible: set[tuple[str, int, int]] = set()
    for record_id, gold in golds.items():
        hyp = hypotheses.get(record_id, AlignmentHypothesis())
        merged_hyp |= {(record_id, i, j) for (i, j) in hyp.pairs()}
        merged_sure |= {(record_id, i, j) for (i, j) in gold.sure}
        merged_possible |= {(record_id, i, j) for (i, j) in gold.possible}
    return score_sets(merged_hyp, GoldStandard(merged_sure, merged_possible), convention)  # type: ignore[arg-type]
