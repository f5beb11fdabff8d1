"""Word alignment by bidirectional cross-language span prediction.

The pipeline: a gold-linked bitext corpus becomes per-token span
queries in both directions (SQuAD v2.0 documents), a predictor scores
start/end positions over the partner sentence's characters, the decoder
extracts best spans with null handling, and symmetrization averages the
two directions into token alignments scored against gold links.
"""

from .corpus import (
    AlignmentLink,
    BitextRecord,
    CharSpan,
    CorpusError,
    LinkStrength,
    map_tokens_to_chars,
    parse_corpus,
    parse_links,
    serialize_corpus,
    split_records,
    subsample,
)
from .decode import (
    DecodeConfig,
    Lexicon,
    PositionDistributions,
    PredictionError,
    SpanCandidate,
    SpanPrediction,
    apply_null_rule,
    best_span,
    decode,
    lexical_predict,
    nbest_spans,
    oracle_predict,
    read_predictions,
    train_lexicon,
)
from .metrics import Convention, EvalReport, GoldStandard, MetricsError, score, score_corpus
from .pipeline import align_records, convert_records, evaluate, predict_queries, run_pipeline
from .squad import (
    BOUNDARY_MARKER,
    BOTH_DIRECTIONS,
    Answer,
    ContextMode,
    Direction,
    SpanQuery,
    build_queries,
    emit_squad,
    load_squad,
    make_query_id,
    parse_query_id,
    render_question,
)
from .symmetrize import (
    AlignmentHypothesis,
    CombineMethod,
    DirectionalWeights,
    SymmetrizeConfig,
    SymmetrizeError,
    bidi_average_threshold,
    combine,
    directional_weights,
)

__version__ = "0.1.0"

__all__ = [
    "AlignmentHypothesis",
    "AlignmentLink",
    "Answer",
    "BOUNDARY_MARKER",
    "BOTH_DIRECTIONS",
    "BitextRecord",
    "CharSpan",
    "CombineMethod",
    "ContextMode",
    "Convention",
    "CorpusError",
    "DecodeConfig",
    "Direction",
    "DirectionalWeights",
    "EvalReport",
    "GoldStandard",
    "Lexicon",
    "LinkStrength",
    "MetricsError",
    "PositionDistributions",
    "PredictionError",
    "SpanCandidate",
    "SpanPrediction",
    "SpanQuery",
    "SymmetrizeConfig",
    "SymmetrizeError",
    "align_records",
    "apply_null_rule",
    "best_span",
    "bidi_average_threshold",
    "build_queries",
    "combine",
    "convert_records",
    "decode",
    "directional_weights",
    "emit_squad",
    "evaluate",
    "lexical_predict",
    "load_squad",
    "make_query_id",
    "map_tokens_to_chars",
    "nbest_spans",
    "oracle_predict",
    "parse_corpus",
    "parse_links",
    "parse_query_id",
    "predict_queries",
    "read_predictions",
    "render_question",
    "run_pipeline",
    "score",
    "score_corpus",
    "serialize_corpus",
    "split_records",
    "subsample",
    "train_lexicon",
]
