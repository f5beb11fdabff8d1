"""Walk through the three corpus formats and character offset mapping.

Run from the repository root:

    python3 demos/01_corpus_formats.py
"""

from pathlib import Path

from spanalign import map_tokens_to_chars, parse_corpus, serialize_corpus
from spanalign.corpus import parse_moses_triple

DATA = Path(__file__).resolve().parents[1] / "tests" / "data"


def main() -> None:
    # The blocks format: five lines per record (L1 tokens, L2 tokens,
    # links, raw L1, raw L2), blank-line separated.
    text = (DATA / "kftt_devtest.blocks").read_text(encoding="utf-8")
    records = parse_corpus(text, "blocks", "kftt_devtest")
    record = records[0]
    print(f"record {record.id}: {len(record.l1_tokens)} ja tokens, "
          f"{len(record.l2_tokens)} en tokens, {len(record.links)} links")

    # Tokens map onto the *raw* sentence, which for Japanese has no
    # spaces at all. Offsets are Unicode scalar positions.
    spans = map_tokens_to_chars(record.l1_tokens, record.l1_raw)
    for token, span in list(zip(record.l1_tokens, spans))[:4]:
        print(f"  {token!r} -> raw[{span.start}:{span.end}] = "
              f"{record.l1_raw[span.start:span.end]!r}")

    # Serialization round-trips byte for byte.
    assert serialize_corpus(records, "blocks") == text
    print("blocks round-trip: byte-identical")

    # The same records as JSON lines.
    jsonl = serialize_corpus(records, "jsonl")
    print("jsonl:", jsonl.splitlines()[0][:90], "...")

    # Moses-style three parallel files; links may carry a strength
    # column (":S" sure, ":P" possible).
    triple = parse_moses_triple(
        "le chat dort\n", "the cat sleeps\n", "0-0:S 1-1:S 2-2:P\n", "demo"
    )
    print("moses-triple sure pairs:", sorted(triple[0].sure_pairs()))
    print("moses-triple all pairs: ", sorted(triple[0].link_pairs()))


if __name__ == "__main__":
    main()
