"""Command-line front end.

Three subcommands cover the model lifecycle: make-encoder builds a
pretrained encoder from raw text, finetune trains the span pointers on
SQuAD v2.0 query files, and predict writes NDJSON predictions with
character offsets.  Failures print one JSON object to stderr and exit
nonzero; all file outputs are written atomically.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .config import BackendError, FinetuneConfig
from .encoder import make_encoder
from .predict import predict_file
from .tokenization import read_piece_file, tokenizer_from_pieces, train_tokenizer
from .train import finetune


def _read_lines(paths: list[str]) -> list[str]:
    lines: list[str] = []
    for path in paths:
        text = Path(path).read_text(encoding="utf-8")
        lines.extend(line for line in text.splitlines() if line.strip())
    if not lines:
        raise BackendError("no nonempty text lines given")
    return lines


def cmd_make_encoder(args: argparse.Namespace) -> int:
    lines = _read_lines(args.texts)
    if args.vocab_file:
        tokenizer = tokenizer_from_pieces(read_piece_file(args.vocab_file))
    else:
        tokenizer = train_tokenizer(lines, vocab_size=args.vocab_size)
    make_encoder(
        lines,
        args.out,
        tokenizer,
        hidden_size=args.hidden,
        num_layers=args.layers,
        num_heads=args.heads,
        intermediate_size=args.intermediate,
        mlm_steps=args.mlm_steps,
        pointer_steps=args.pointer_steps,
        batch_size=args.batch_size,
        learning_rate=args.lr,
        seed=args.seed,
    )
    print(f"encoder written to {args.out}")
    return 0


def cmd_finetune(args: argparse.Namespace) -> int:
    cfg = FinetuneConfig.from_file(args.config) if args.config else FinetuneConfig()
    report = finetune(args.encoder, args.squad, args.out, cfg)
    losses = ", ".join(f"{loss:.4f}" for loss in report.epoch_losses)
    print(f"trained on {report.n_examples} examples; epoch losses: {losses or 'none'}")
    print(f"model written to {report.out_dir}")
    return 0


def cmd_predict(args: argparse.Namespace) -> int:
    cfg = FinetuneConfig.from_file(args.config) if args.config else None
    report = predict_file(
        args.model,
        args.squad,
        args.out,
        nbest=args.nbest,
        cfg=cfg,
        batch_size=args.batch_size,
    )
    if report.truncated_context:
        sys.stderr.write(
            f"warning: context truncated for {len(report.truncated_context)} queries\n"
        )
    print(f"{report.n_queries} predictions written to {report.out_path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="alignbert",
        description="BERT span-pointer backend for word alignment",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser(
        "make-encoder",
        help="pretrain a small encoder on raw text, no downloads",
    )
    p.add_argument("texts", nargs="+", help="plain text files, one sentence per line")
    p.add_argument("--out", required=True, help="output directory for the encoder")
    group = p.add_mutually_exclusive_group()
    group.add_argument("--vocab-file", help="wordpiece vocabulary, one piece per line")
    group.add_argument(
        "--vocab-size", type=int, default=2000,
        help="train a vocabulary of this size from the texts (default: %(default)s)",
    )
    p.add_argument("--hidden", type=int, default=128)
    p.add_argument("--layers", type=int, default=2)
    p.add_argument("--heads", type=int, default=4)
    p.add_argument("--intermediate", type=int, default=256)
    p.add_argument("--mlm-steps", type=int, default=3000)
    p.add_argument("--pointer-steps", type=int, default=2000)
    p.add_argument("--batch-size", type=int, default=16)
    p.add_argument("--lr", type=float, default=5e-4)
    p.add_argument("--seed", type=int, default=11)
    p.set_defaults(func=cmd_make_encoder)

    p = sub.add_parser("finetune", help="train span pointers on SQuAD query files")
    p.add_argument("squad", nargs="+", help="SQuAD v2.0 JSON query files")
    p.add_argument("--encoder", required=True, help="pretrained encoder directory")
    p.add_argument("--out", required=True, help="output directory for the model")
    p.add_argument("--config", help="JSON training config file")
    p.set_defaults(func=cmd_finetune)

    p = sub.add_parser("predict", help="write NDJSON span predictions")
    p.add_argument("squad", help="SQuAD v2.0 JSON query file")
    p.add_argument("--model", required=True, help="finetuned model directory")
    p.add_argument("--out", required=True, help="output NDJSON path")
    p.add_argument("--nbest", type=int, default=5,
                   help="candidate spans per query (default: %(default)s)")
    p.add_argument("--config", help="JSON config file overriding the saved one")
    p.add_argument("--batch-size", type=int, default=None,
                   help="inference batch size (default: the training batch size)")
    p.set_defaults(func=cmd_predict)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        # Covers BackendError, bad JSON, and missing files alike.
        _fail(exc)
        return 1


def _fail(exc: BaseException) -> None:
    sys.stderr.write(
        json.dumps({"error": type(exc).__name__, "message": str(exc)}) + "\n"
    )


if __name__ == "__main__":
    sys.exit(main())
