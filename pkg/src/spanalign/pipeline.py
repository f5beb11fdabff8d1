"""End-to-end plumbing: corpus -> queries -> predictions -> alignments -> score.

The individual modules stay pure; this one wires them together, tracks
query ids across stages, and owns file layout conventions (atomic
writes, one hypothesis line per record in corpus order).
"""

from __future__ import annotations

import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Mapping, Sequence

from .corpus import BitextRecord, filter_links
from .decode import (
    DecodeConfig,
    PositionDistributions,
    SpanPrediction,
    decode,
    oracle_predict,
)
from .metrics import Convention, EvalReport, GoldStandard, score_corpus
from .squad import (
    BOTH_DIRECTIONS,
    ContextMode,
    Direction,
    SpanQuery,
    build_queries,
    parse_query_id,
)
from .symmetrize import (
    AlignmentHypothesis,
    SymmetrizeConfig,
    SymmetrizeError,
    directional_weights,
    combine,
)

Predictor = Callable[[SpanQuery], PositionDistributions]


@dataclass
class ConversionResult:
    """Queries per direction plus the bookkeeping manifest."""

    queries: dict[Direction, list[SpanQuery]] = field(default_factory=dict)
    manifest: dict = field(default_factory=dict)

    def all_queries(self) -> list[SpanQuery]:
        return [q for direction in sorted(self.queries) for q in self.queries[direction]]

    def context_lengths(self) -> dict[str, int]:
        return {q.id: len(q.context) for q in self.all_queries()}


def convert_records(
    records: Sequence[BitextRecord],
    mode: ContextMode,
    directions: Sequence[Direction] = BOTH_DIRECTIONS,
    sure_only: bool = False,
) -> ConversionResult:
    """Build span queries for every record and direction, with a manifest.

    The manifest records per-direction query counts and the share of
    impossible (unaligned source token) queries; counts are checked
    against the one-query-per-source-token rule.
    """
    if sure_only:
        records = [filter_links(record, sure_only=True) for record in records]
    result = ConversionResult()
    for direction in directions:
        queries: list[SpanQuery] = []
        for record in records:
            queries.extend(build_queries(record, direction, mode))
        expected = sum(
            len(r.l1_tokens if direction is Direction.L1_TO_L2 else r.l2_tokens)
            for r in records
        )
        if len(queries) != expected:
            raise AssertionError(
                f"{direction.value}: built {len(queries)} queries for {expected} tokens"
            )
        result.queries[direction] = queries
    result.manifest = _manifest(records, mode, result.queries, sure_only)
    return result


def _manifest(
    records: Sequence[BitextRecord],
    mode: ContextMode,
    queries: Mapping[Direction, list[SpanQuery]],
    sure_only: bool,
) -> dict:
    per_direction = {}
    for direction, qs in queries.items():
        impossible = sum(1 for q in qs if q.is_impossible)
        per_direction[direction.value] = {
            "queries": len(qs),
            "impossible": impossible,
            "impossibility_rate": impossible / len(qs) if qs else 0.0,
        }
    return {
        "records": len(records),
        "context_mode": str(mode),
        "sure_only": sure_only,
        "directions": per_direction,
        "total_queries": sum(len(qs) for qs in queries.values()),
    }


def predict_queries(
    queries: Iterable[SpanQuery],
    predictor: Predictor,
    cfg: DecodeConfig | None = None,
) -> dict[str, SpanPrediction]:
    """Run a predictor over queries and decode every distribution."""
    cfg = cfg or DecodeConfig()
    predictions: dict[str, SpanPrediction] = {}
    for query in queries:
        predictions[query.id] = decode(predictor(query), cfg)
    return predictions


def align_records(
    records: Sequence[BitextRecord],
    conversion: ConversionResult,
    predictions: Mapping[str, SpanPrediction],
    cfg: SymmetrizeConfig | None = None,
) -> dict[str, AlignmentHypothesis]:
    """Symmetrize per-query predictions into one hypothesis per record.

    Every query id from the conversion must have a prediction; missing
    ids are a hard error (listed, capped at ten).
    """
    cfg = cfg or SymmetrizeConfig()
    missing = [q.id for q in conversion.all_queries() if q.id not in predictions]
    if missing:
        shown = ", ".join(missing[:10])
        more = f" (+{len(missing) - 10} more)" if len(missing) > 10 else ""
        raise SymmetrizeError(f"predictions missing for query ids: {shown}{more}")

    by_record: dict[str, dict[Direction, list[SpanPrediction]]] = {}
    for direction, queries in conversion.queries.items():
        for query in queries:
            record_id, _, _, _ = parse_query_id(query.id)
            by_record.setdefault(record_id, {}).setdefault(direction, []).append(
                predictions[query.id]
            )

    for direction in BOTH_DIRECTIONS:
        if direction not in conversion.queries:
            raise SymmetrizeError(
                f"conversion lacks direction {direction.value!r}; "
                "symmetrization needs both"
            )

    hypotheses: dict[str, AlignmentHypothesis] = {}
    for record in records:
        per_direction = by_record.get(record.id, {})
        l1_spans, l2_spans = record.l1_spans(), record.l2_spans()
        w_f = directional_weights(
            per_direction[Direction.L1_TO_L2], l1_spans, l2_spans, cfg.nbest_sum
        )
        w_b = directional_weights(
            per_direction[Direction.L2_TO_L1], l2_spans, l1_spans, cfg.nbest_sum
        )
        hypotheses[record.id] = combine(w_f, w_b, cfg)
    return hypotheses


def evaluate(
    records: Sequence[BitextRecord],
    hypotheses: Mapping[str, AlignmentHypothesis],
    convention: Convention = Convention.PLAIN,
) -> EvalReport:
    golds = {record.id: GoldStandard.from_record(record) for record in records}
    return score_corpus(hypotheses, golds, convention)


def run_pipeline(
    records: Sequence[BitextRecord],
    predictor: Predictor = oracle_predict,
    mode: ContextMode | None = None,
    decode_cfg: DecodeConfig | None = None,
    sym_cfg: SymmetrizeConfig | None = None,
    convention: Convention = Convention.PLAIN,
    sure_only: bool = False,
) -> tuple[EvalReport, dict[str, AlignmentHypothesis]]:
    """Corpus to score in one call, for tests and small experiments."""
    mode = mode or ContextMode.full()
    conversion = convert_records(records, mode, sure_only=sure_only)
    predictions = predict_queries(conversion.all_queries(), predictor, decode_cfg)
    hypotheses = align_records(records, conversion, predictions, sym_cfg)
    return evaluate(records, hypotheses, convention), hypotheses


# ---------------------------------------------------------------------------
# Hypothesis files (Pharaoh lines, one per record in corpus order)
# ---------------------------------------------------------------------------

def hypotheses_to_lines(
    records: Sequence[BitextRecord],
    hypotheses: Mapping[str, AlignmentHypothesis],
    with_weights: bool = False,
) -> list[str]:
    return [
        hypotheses.get(record.id, AlignmentHypothesis()).to_pharaoh(with_weights)
        for record in records
    ]


def hypotheses_from_lines(
    records: Sequence[BitextRecord], lines: Sequence[str]
) -> dict[str, AlignmentHypothesis]:
    stripped = [line.rstrip("\n") for line in lines]
    # A blank line is a valid empty hypothesis, so only drop trailing
    # blanks that are surplus to the record count (newline artifacts).
    while len(stripped) > len(records) and not stripped[-1].strip():
        stripped.pop()
    if len(stripped) != len(records):
        raise SymmetrizeError(
            f"hypothesis file has {len(stripped)} lines for {len(records)} records"
        )
    return {
        record.id: AlignmentHypothesis.from_pharaoh(line)
        for record, line in zip(records, stripped)
    }


def write_text_atomic(path: str | Path, text: str) -> None:
    """Write via a sibling temp file and rename, so readers never see a torn file."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
