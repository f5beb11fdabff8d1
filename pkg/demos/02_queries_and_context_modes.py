"""Turn a sentence pair into cross-language span queries.

Every token of one side becomes a question against the *raw* sentence
of the other side; the gold links become extractive answers. Pilcrow
markers show the model which token the question is about, with three
selectable amounts of surrounding context.

    python3 demos/02_queries_and_context_modes.py
"""

import json
from pathlib import Path

from spanalign import (
    ContextMode,
    Direction,
    build_queries,
    emit_squad,
    parse_corpus,
)

DATA = Path(__file__).resolve().parents[1] / "tests" / "data"


def main() -> None:
    text = (DATA / "kftt_devtest.blocks").read_text(encoding="utf-8")
    record = parse_corpus(text, "blocks", "kftt_devtest")[0]

    # One English token, three context modes.
    for mode in (ContextMode.none(), ContextMode.window_of(2), ContextMode.full()):
        query = build_queries(record, Direction.L2_TO_L1, mode)[2]
        print(f"{str(mode):9s} question: {query.question}")
    query = build_queries(record, Direction.L2_TO_L1, ContextMode.full())[2]
    print(f"          answer:   {query.answers[0].text!r} "
          f"at {query.answers[0].answer_start}")

    # The reverse direction asks about Japanese tokens.
    reverse = build_queries(record, Direction.L1_TO_L2, ContextMode.full())[1]
    print(f"\nreverse   question: {reverse.question[:40]}...")
    print(f"          answer:   {reverse.answers[0]}")

    # Unlinked tokens become unanswerable (null) questions.
    nulls = [q.id for q in build_queries(record, Direction.L2_TO_L1, ContextMode.none())
             if q.is_impossible]
    print(f"\nimpossible queries on the English side: {nulls}")

    # Everything packs into a single SQuAD v2.0 document per direction.
    doc = emit_squad(build_queries(record, Direction.L2_TO_L1, ContextMode.full()))
    print(f"\nSQuAD {doc['version']} document, "
          f"{sum(len(p['qas']) for p in doc['data'][0]['paragraphs'])} questions")
    print(json.dumps(doc["data"][0]["paragraphs"][0]["qas"][0], ensure_ascii=False)[:120], "...")


if __name__ == "__main__":
    main()
