"""Command-line front end.

Subcommands mirror the pipeline stages: convert (corpus to SQuAD v2.0
query files), align (predictions to symmetrized alignments), score,
subsample, sweep (threshold grids), and pipeline (all stages with a
built-in predictor).  Failures print one JSON object to stderr and exit
nonzero; all file outputs are written atomically.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .corpus import (
    BLOCKS,
    CorpusError,
    JSONL,
    MOSES_TRIPLE,
    parse_corpus,
    serialize_corpus,
    subsample,
)
from .decode import (
    DecodeConfig,
    PredictionError,
    lexical_predict,
    oracle_predict,
    prediction_to_wire,
    read_predictions,
    train_lexicon,
)
from .metrics import Convention
from .pipeline import (
    ConversionResult,
    align_records,
    convert_records,
    evaluate,
    hypotheses_from_lines,
    hypotheses_to_lines,
    predict_queries,
    write_text_atomic,
)
from .squad import BOTH_DIRECTIONS, ContextMode, emit_squad
from .symmetrize import CombineMethod, SymmetrizeConfig


def _add_corpus_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "corpus",
        nargs="+",
        help="corpus file; moses-triple takes three files (l1, l2, links)",
    )
    parser.add_argument(
        "--format",
        choices=[BLOCKS, JSONL, MOSES_TRIPLE],
        default=BLOCKS,
        help="corpus file format (default: %(default)s)",
    )
    parser.add_argument(
        "--corpus-name",
        default=None,
        help="record id prefix (default: first corpus file's stem)",
    )
    parser.add_argument(
        "--links",
        choices=["all", "sure-only"],
        default="all",
        help="which gold links to use (default: %(default)s)",
    )


def _add_context_arg(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--context",
        default="full",
        help="question context mode: full, none, or window:K (default: %(default)s)",
    )


def _add_decode_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--tau", type=float, default=0.0, help="null margin (default: 0.0)")
    parser.add_argument(
        "--max-answer-length",
        type=int,
        default=30,
        help="span length cap in characters (default: %(default)s)",
    )
    parser.add_argument(
        "--nbest", type=int, default=5, help="n-best list size (default: %(default)s)"
    )


def _add_symmetrize_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--method",
        choices=[m.value for m in CombineMethod],
        default=CombineMethod.BIDI_AVG.value,
        help="combination method (default: %(default)s)",
    )
    parser.add_argument(
        "--theta", type=float, default=0.4, help="selection threshold (default: 0.4)"
    )


def _add_convention_arg(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--convention",
        choices=[c.value for c in Convention],
        default=Convention.PLAIN.value,
        help="scoring convention (default: %(default)s)",
    )


def _load_corpus(args: argparse.Namespace):
    paths = [Path(p) for p in args.corpus]
    name = args.corpus_name or paths[0].stem
    if args.format == MOSES_TRIPLE:
        if len(paths) != 3:
            raise CorpusError("moses-triple needs exactly three files: l1, l2, links")
        source = tuple(p.read_text(encoding="utf-8") for p in paths)
    else:
        if len(paths) != 1:
            raise CorpusError(f"format {args.format!r} takes exactly one corpus file")
        source = paths[0].read_text(encoding="utf-8")
    records = parse_corpus(source, args.format, name)
    if getattr(args, "links", "all") == "sure-only":
        from .corpus import filter_links

        records = [filter_links(r, sure_only=True) for r in records]
    return records


def _decode_config(args: argparse.Namespace) -> DecodeConfig:
    return DecodeConfig(
        tau=args.tau, max_answer_length=args.max_answer_length, nbest_size=args.nbest
    )


def _symmetrize_config(args: argparse.Namespace) -> SymmetrizeConfig:
    return SymmetrizeConfig(theta=args.theta, method=CombineMethod(args.method))


def _read_prediction_files(
    args: argparse.Namespace, conversion: ConversionResult, cfg: DecodeConfig
):
    lengths = conversion.context_lengths()
    predictions = {}
    for path in (args.predictions_f, args.predictions_b):
        with open(path, encoding="utf-8") as handle:
            batch = read_predictions(handle, cfg, lengths)
        overlap = set(batch) & set(predictions)
        if overlap:
            raise PredictionError(
                f"query ids appear in both prediction files: {sorted(overlap)[:5]}"
            )
        predictions.update(batch)
    return predictions


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_convert(args: argparse.Namespace) -> int:
    records = _load_corpus(args)
    mode = ContextMode.parse(args.context)
    # _load_corpus already dropped possible links under --links sure-only;
    # passing the flag again is idempotent and keeps the manifest truthful.
    conversion = convert_records(records, mode, sure_only=args.links == "sure-only")
    out_dir = Path(args.out_dir)
    for direction in BOTH_DIRECTIONS:
        document = emit_squad(conversion.queries[direction])
        write_text_atomic(
            out_dir / f"squad_{direction.value}.json",
            json.dumps(document, ensure_ascii=False, indent=1) + "\n",
        )
    write_text_atomic(
        out_dir / "manifest.json",
        json.dumps(conversion.manifest, ensure_ascii=False, indent=1, sort_keys=True) + "\n",
    )
    print(json.dumps(conversion.manifest, ensure_ascii=False, sort_keys=True))
    return 0


def cmd_align(args: argparse.Namespace) -> int:
    records = _load_corpus(args)
    mode = ContextMode.parse(args.context)
    conversion = convert_records(records, mode)
    decode_cfg = _decode_config(args)
    predictions = _read_prediction_files(args, conversion, decode_cfg)
    hypotheses = align_records(records, conversion, predictions, _symmetrize_config(args))
    lines = hypotheses_to_lines(records, hypotheses, with_weights=args.weights)
    text = "\n".join(lines) + "\n"
    if args.out:
        write_text_atomic(args.out, text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_score(args: argparse.Namespace) -> int:
    records = _load_corpus(args)
    with open(args.hypothesis, encoding="utf-8") as handle:
        hypotheses = hypotheses_from_lines(records, handle.readlines())
    report = evaluate(records, hypotheses, Convention(args.convention))
    output = report.as_json() if args.json else report.as_table()
    print(output)
    if args.out:
        write_text_atomic(args.out, report.as_json() + "\n")
    return 0


def cmd_subsample(args: argparse.Namespace) -> int:
    records = _load_corpus(args)
    sample = subsample(records, args.n, args.seed)
    out_format = args.out_format or (args.format if args.format != MOSES_TRIPLE else BLOCKS)
    write_text_atomic(args.out, serialize_corpus(sample, out_format))
    print(json.dumps({"sampled": len(sample), "of": len(records), "seed": args.seed}))
    return 0


def cmd_sweep(args: argparse.Namespace) -> int:
    grid = [float(v) for v in args.grid.split(",") if v.strip()]
    if not grid:
        raise ValueError("empty sweep grid")
    records = _load_corpus(args)
    mode = ContextMode.parse(args.context)
    conversion = convert_records(records, mode)
    convention = Convention(args.convention)

    rows = []
    for value in grid:
        tau = value if args.parameter == "tau" else args.tau
        theta = value if args.parameter == "theta" else args.theta
        decode_cfg = DecodeConfig(
            tau=tau, max_answer_length=args.max_answer_length, nbest_size=args.nbest
        )
        predictions = _read_prediction_files(args, conversion, decode_cfg)
        sym_cfg = SymmetrizeConfig(theta=theta, method=CombineMethod(args.method))
        hypotheses = align_records(records, conversion, predictions, sym_cfg)
        report = evaluate(records, hypotheses, convention)
        rows.append((value, report))

    print(f"{args.parameter}\tprecision\trecall\tf1\taer\tlinks")
    for value, report in rows:
        print(
            f"{value:g}\t{report.precision * 100:.1f}\t{report.recall * 100:.1f}"
            f"\t{report.f1 * 100:.1f}\t{report.aer * 100:.1f}\t{report.n_hypothesis}"
        )
    if args.out:
        payload = [
            {"value": value, **report.as_dict()} for value, report in rows
        ]
        write_text_atomic(args.out, json.dumps(payload, ensure_ascii=False, indent=1) + "\n")
    return 0


def cmd_pipeline(args: argparse.Namespace) -> int:
    records = _load_corpus(args)
    mode = ContextMode.parse(args.context)
    decode_cfg = _decode_config(args)
    conversion = convert_records(records, mode, sure_only=args.links == "sure-only")

    if args.predictor == "oracle":
        predictor = oracle_predict
    else:
        if args.train_corpus:
            train_args = argparse.Namespace(
                corpus=[args.train_corpus],
                format=args.format,
                corpus_name=None,
                links=args.links,
            )
            train_records = _load_corpus(train_args)
        else:
            train_records = records
        lexicon = train_lexicon(train_records)

        def predictor(query):
            return lexical_predict(query, lexicon)

    predictions = predict_queries(conversion.all_queries(), predictor, decode_cfg)
    hypotheses = align_records(records, conversion, predictions, _symmetrize_config(args))
    report = evaluate(records, hypotheses, Convention(args.convention))

    if args.out_dir:
        out_dir = Path(args.out_dir)
        for direction in BOTH_DIRECTIONS:
            document = emit_squad(conversion.queries[direction])
            write_text_atomic(
                out_dir / f"squad_{direction.value}.json",
                json.dumps(document, ensure_ascii=False, indent=1) + "\n",
            )
            ndjson = "\n".join(
                prediction_to_wire(predictions[q.id])
                for q in conversion.queries[direction]
            )
            write_text_atomic(out_dir / f"predictions_{direction.value}.ndjson", ndjson + "\n")
        write_text_atomic(
            out_dir / "hypothesis.pharaoh",
            "\n".join(hypotheses_to_lines(records, hypotheses)) + "\n",
        )
        write_text_atomic(out_dir / "report.json", report.as_json() + "\n")
    print(report.as_json() if args.json else report.as_table())
    return 0


# ---------------------------------------------------------------------------
# Parser assembly
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spanalign",
        description="Word alignment via bidirectional span prediction.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("convert", help="corpus to SQuAD v2.0 query files per direction")
    _add_corpus_args(p)
    _add_context_arg(p)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_convert)

    p = sub.add_parser("align", help="combine directional predictions into alignments")
    _add_corpus_args(p)
    _add_context_arg(p)
    _add_decode_args(p)
    _add_symmetrize_args(p)
    p.add_argument("--predictions-f", required=True, help="NDJSON predictions, l1-to-l2")
    p.add_argument("--predictions-b", required=True, help="NDJSON predictions, l2-to-l1")
    p.add_argument("--out", default=None, help="hypothesis file (default: stdout)")
    p.add_argument("--weights", action="store_true", help="append :weight to links")
    p.set_defaults(func=cmd_align)

    p = sub.add_parser("score", help="score a hypothesis file against gold links")
    p.add_argument("hypothesis", help="pharaoh lines, one per record in corpus order")
    _add_corpus_args(p)
    _add_convention_arg(p)
    p.add_argument("--json", action="store_true", help="print the JSON report")
    p.add_argument("--out", default=None, help="also write the JSON report here")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("subsample", help="deterministic uniform subsample of a corpus")
    _add_corpus_args(p)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--out-format", choices=[BLOCKS, JSONL], default=None)
    p.set_defaults(func=cmd_subsample)

    p = sub.add_parser("sweep", help="score across a theta or tau grid")
    _add_corpus_args(p)
    _add_context_arg(p)
    _add_decode_args(p)
    _add_symmetrize_args(p)
    _add_convention_arg(p)
    p.add_argument("--parameter", choices=["theta", "tau"], required=True)
    p.add_argument("--grid", required=True, help="comma-separated values")
    p.add_argument("--predictions-f", required=True)
    p.add_argument("--predictions-b", required=True)
    p.add_argument("--out", default=None, help="write per-value JSON reports here")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("pipeline", help="convert, predict, align, and score in one run")
    _add_corpus_args(p)
    _add_context_arg(p)
    _add_decode_args(p)
    _add_symmetrize_args(p)
    _add_convention_arg(p)
    p.add_argument("--predictor", choices=["oracle", "lexical"], default="oracle")
    p.add_argument("--train-corpus", default=None, help="lexicon training corpus (lexical)")
    p.add_argument("--out-dir", default=None, help="write all intermediate artifacts")
    p.add_argument("--json", action="store_true", help="print the JSON report")
    p.set_defaults(func=cmd_pipeline)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        # Covers CorpusError, PredictionError, SymmetrizeError, MetricsError,
        # bad JSON, and missing files alike.
        _fail(exc)
        return 1


def _fail(exc: BaseException) -> None:
    sys.stderr.write(
        json.dumps({"error": type(exc).__name__, "message": str(exc)}) + "\n"
    )


if __name__ == "__main__":
    sys.exit(main())
