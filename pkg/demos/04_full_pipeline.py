"""The whole pipeline on a small corpus, with two built-in predictors.

The oracle predictor reads the gold answers back (an upper bound and a
plumbing test); the lexical predictor knows only co-occurrence
frequencies estimated from gold links, so it makes real mistakes.

    python3 demos/04_full_pipeline.py
"""

from pathlib import Path

from spanalign import (
    Convention,
    lexical_predict,
    parse_corpus,
    run_pipeline,
    train_lexicon,
)

DATA = Path(__file__).resolve().parents[1] / "tests" / "data"


def main() -> None:
    text = (DATA / "handcrafted.blocks").read_text(encoding="utf-8")
    records = parse_corpus(text, "blocks", "handcrafted")
    print(f"{len(records)} sentence pairs\n")

    report, hypotheses = run_pipeline(records, convention=Convention.PLAIN)
    print("oracle predictor (upper bound):")
    print(report.as_table(), "\n")

    sample = records[1]
    print(f"{sample.id}: gold    {sorted(sample.link_pairs())}")
    print(f"{sample.id}: oracle  {hypotheses[sample.id].to_pharaoh()}\n")

    # The lexical baseline with a memorized lexicon. At this corpus size
    # a held-out split shares almost no vocabulary (try it: the lexicon
    # simply never fires), so train = test here shows the ceiling of a
    # context-free co-occurrence table instead.
    lexicon = train_lexicon(records)

    def predictor(query):
        return lexical_predict(query, lexicon)

    report, hypotheses = run_pipeline(records, predictor, convention=Convention.PLAIN)
    print("lexical predictor, lexicon memorized from the same pairs:")
    print(report.as_table(), "\n")

    # The same scoring under the sure/possible convention.
    report, _ = run_pipeline(records, predictor, convention=Convention.OCH_NEY)
    print(f"och-ney convention: precision {report.precision * 100:.1f} "
          f"recall {report.recall * 100:.1f} aer {report.aer * 100:.1f}")


if __name__ == "__main__":
    main()
