"""Bitext alignment corpora: parsing, validation, serialization, offsets.

A corpus is a list of sentence pairs, each carrying two tokenizations,
two raw (untokenized) sentences, and a list of gold token-to-token
links.  Three interchange formats are supported:

* ``blocks``: five lines per record (L1 tokens / L2 tokens / links /
  raw L1 / raw L2), records separated by a blank line, UTF-8.
* ``jsonl``: one JSON object per line with keys ``id``, ``l1_tokens``,
  ``l2_tokens``, ``links``, ``l1_raw``, ``l2_raw``.
* ``moses-triple``: three parallel files (L1 tokens, L2 tokens, links);
  raw sentences default to the space-joined tokens.

All character offsets throughout the package are Unicode scalar values
(Python string indices), never bytes, so they are stable for CJK text.
"""

from __future__ import annotations

import enum
import json
import random
from dataclasses import dataclass, field, replace
from typing import Iterable, Iterator, Sequence

BLOCKS = "blocks"
JSONL = "jsonl"
MOSES_TRIPLE = "moses-triple"

CORPUS_FORMATS = (BLOCKS, JSONL, MOSES_TRIPLE)


class CorpusError(ValueError):
    """Malformed corpus input; the message names the record and field."""


class LinkStrength(str, enum.Enum):
    SURE = "sure"
    POSSIBLE = "possible"


# Surface forms of the two link strengths ("i-j" sure, "i?j" possible).
_STRENGTH_SEP = {LinkStrength.SURE: "-", LinkStrength.POSSIBLE: "?"}
_SEP_STRENGTH = {"-": LinkStrength.SURE, "?": LinkStrength.POSSIBLE}


@dataclass(frozen=True, order=True)
class AlignmentLink:
    """One gold link between token ``l1`` of L1 and token ``l2`` of L2."""

    l1: int
    l2: int
    strength: LinkStrength = LinkStrength.SURE

    def __post_init__(self) -> None:
        if self.l1 < 0 or self.l2 < 0:
            raise CorpusError(f"link indexes must be non-negative, got {self.l1}-{self.l2}")

    def __str__(self) -> str:
        return f"{self.l1}{_STRENGTH_SEP[self.strength]}{self.l2}"


@dataclass(frozen=True, order=True)
class CharSpan:
    """Half-open character range [start, end) into a host string."""

    start: int
    end: int

    def __post_init__(self) -> None:
        if not 0 <= self.start <= self.end:
            raise ValueError(f"invalid span [{self.start}, {self.end})")

    def __len__(self) -> int:
        return self.end - self.start

    def contains(self, other: "CharSpan") -> bool:
        """True when ``other`` lies completely inside this span."""
        return self.start <= other.start and other.end <= self.end

    def text(self, host: str) -> str:
        return host[self.start : self.end]


@dataclass
class BitextRecord:
    """One sentence pair with tokenizations, raw sentences, and gold links."""

    id: str
    l1_tokens: list[str]
    l2_tokens: list[str]
    links: list[AlignmentLink]
    l1_raw: str
    l2_raw: str

    def validate(self) -> None:
        """Check index bounds, duplicate links, and token/raw consistency."""
        for link in self.links:
            if link.l1 >= len(self.l1_tokens):
                raise CorpusError(f"record {self.id}: l1 index {link.l1} out of range")
            if link.l2 >= len(self.l2_tokens):
                raise CorpusError(f"record {self.id}: l2 index {link.l2} out of range")
        if len(set(self.links)) != len(self.links):
            raise CorpusError(f"record {self.id}: duplicate links")
        for side, tokens, raw in (("l1", self.l1_tokens, self.l1_raw),
                                  ("l2", self.l2_tokens, self.l2_raw)):
            if tokens and raw:
                try:
                    map_tokens_to_chars(tokens, raw)
                except ValueError as exc:
                    raise CorpusError(f"record {self.id}: {side} tokens do not match raw: {exc}") from None

    def l1_spans(self) -> list[CharSpan]:
        return map_tokens_to_chars(self.l1_tokens, self.l1_raw)

    def l2_spans(self) -> list[CharSpan]:
        return map_tokens_to_chars(self.l2_tokens, self.l2_raw)

    def link_pairs(self) -> set[tuple[int, int]]:
        return {(link.l1, link.l2) for link in self.links}

    def sure_pairs(self) -> set[tuple[int, int]]:
        return {(link.l1, link.l2) for link in self.links if link.strength is LinkStrength.SURE}


def parse_links(s: str) -> list[AlignmentLink]:
    """Parse a whitespace-separated links line ("i-j" sure, "i?j" possible).

    Order is preserved; duplicate (i, j, strength) triples are rejected.
    """
    links: list[AlignmentLink] = []
    seen: set[AlignmentLink] = set()
    for item in s.split():
        link = _parse_link_item(item)
        if link in seen:
            raise CorpusError(f"duplicate link {item!r}")
        seen.add(link)
        links.append(link)
    return links


def _parse_link_item(item: str) -> AlignmentLink:
    for sep, strength in _SEP_STRENGTH.items():
        left, found, right = item.partition(sep)
        if found:
            if not (left.isdigit() and right.isdigit()):
                raise CorpusError(f"non-numeric link field in {item!r}")
            return AlignmentLink(int(left), int(right), strength)
    raise CorpusError(f"unknown link separator in {item!r} (expected i-j or i?j)")


def format_links(links: Iterable[AlignmentLink]) -> str:
    return " ".join(str(link) for link in links)


def map_tokens_to_chars(tokens: Sequence[str], raw: str) -> list[CharSpan]:
    """Locate each token in the raw sentence, left to right.

    Whitespace in ``raw`` is skipped before each token; the token's
    characters (with any token-internal whitespace removed) must then
    match ``raw`` exactly.  Anchored greedy matching makes the result
    unique, and it works for both spaced (English) and unspaced
    (Japanese/Chinese) raw sentences.
    """
    if not tokens:
        raise ValueError("tokens must be non-empty")
    if not raw:
        raise ValueError("raw sentence must be non-empty")
    spans: list[CharSpan] = []
    pos = 0
    for index, token in enumerate(tokens):
        needle = "".join(token.split())
        if not needle:
            raise ValueError(f"token {index} is empty or all-whitespace")
        while pos < len(raw) and raw[pos].isspace():
            pos += 1
        if raw[pos : pos + len(needle)] != needle:
            excerpt = raw[max(0, pos - 10) : pos + len(needle) + 10]
            raise ValueError(
                f"token {index} {token!r} not found at position {pos} (raw: ...{excerpt!r}...)"
            )
        spans.append(CharSpan(pos, pos + len(needle)))
        pos += len(needle)
    return spans


def filter_links(record: BitextRecord, sure_only: bool) -> BitextRecord:
    """Return a copy keeping only sure links when ``sure_only`` is set."""
    if not sure_only:
        return record
    kept = [link for link in record.links if link.strength is LinkStrength.SURE]
    return replace(record, links=kept)


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------

def parse_corpus(
    source: str | Iterable[str] | tuple,
    format: str = BLOCKS,
    corpus_name: str = "corpus",
) -> list[BitextRecord]:
    """Parse a corpus from text.

    ``source`` is a string or an iterable of lines; for ``moses-triple``
    it is a 3-tuple of (L1 tokens, L2 tokens, links) sources.  Records
    get ids ``{corpus_name}_{ordinal}`` when the format carries none.
    """
    if format == BLOCKS:
        records = list(_parse_blocks(_as_lines(source), corpus_name))
    elif format == JSONL:
        records = list(_parse_jsonl(_as_lines(source), corpus_name))
    elif format == MOSES_TRIPLE:
        if not (isinstance(source, tuple) and len(source) == 3):
            raise CorpusError("moses-triple input must be a (l1, l2, links) tuple")
        records = parse_moses_triple(*source, corpus_name=corpus_name)
    else:
        raise CorpusError(f"unknown corpus format {format!r}")
    for record in records:
        record.validate()
    return records


def _as_lines(source: str | Iterable[str]) -> list[str]:
    if isinstance(source, str):
        return source.splitlines()
    return [line.rstrip("\n") for line in source]


def _parse_blocks(lines: list[str], corpus_name: str) -> Iterator[BitextRecord]:
    # Records are positional 5-line groups: the links line (line 3) may be
    # blank for a fully null-aligned sentence, so blank lines only act as
    # separators *between* records.
    i = 0
    ordinal = 0
    n = len(lines)
    while i < n:
        if not lines[i].strip():
            i += 1
            continue
        if i + 5 > n:
            raise CorpusError(
                f"record {ordinal}: truncated block (expected 5 lines, got {n - i})"
            )
        l1_line, l2_line, links_line, l1_raw, l2_raw = lines[i : i + 5]
        for name, value in (("l1 tokens", l1_line), ("l2 tokens", l2_line),
                            ("l1 raw", l1_raw), ("l2 raw", l2_raw)):
            if not value.strip():
                raise CorpusError(f"record {ordinal}: empty {name} line")
        try:
            links = parse_links(links_line)
        except CorpusError as exc:
            raise CorpusError(f"record {ordinal}: links: {exc}") from None
        yield BitextRecord(
            id=f"{corpus_name}_{ordinal}",
            l1_tokens=l1_line.split(),
            l2_tokens=l2_line.split(),
            links=links,
            l1_raw=l1_raw,
            l2_raw=l2_raw,
        )
        ordinal += 1
        i += 5
        if i < n and lines[i].strip():
            raise CorpusError(f"record {ordinal - 1}: expected blank line after block")


_JSONL_KEYS = ("l1_tokens", "l2_tokens", "links", "l1_raw", "l2_raw")


def _parse_jsonl(lines: list[str], corpus_name: str) -> Iterator[BitextRecord]:
    ordinal = 0
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise CorpusError(f"record {ordinal}: invalid JSON on line {lineno}: {exc}") from None
        missing = [key for key in _JSONL_KEYS if key not in obj]
        if missing:
            raise CorpusError(f"record {ordinal}: missing fields {missing}")
        try:
            links = [_parse_link_item(item) for item in obj["links"]]
        except CorpusError as exc:
            raise CorpusError(f"record {ordinal}: links: {exc}") from None
        yield BitextRecord(
            id=obj.get("id") or f"{corpus_name}_{ordinal}",
            l1_tokens=list(obj["l1_tokens"]),
            l2_tokens=list(obj["l2_tokens"]),
            links=links,
            l1_raw=obj["l1_raw"],
            l2_raw=obj["l2_raw"],
        )
        ordinal += 1


def parse_moses_triple(
    l1_source: str | Iterable[str],
    l2_source: str | Iterable[str],
    links_source: str | Iterable[str],
    corpus_name: str = "corpus",
) -> list[BitextRecord]:
    """Parse three line-parallel files of L1 tokens, L2 tokens, and links.

    Raw sentences default to the space-joined tokens.  Link items may
    carry an ``:S``/``:P`` suffix column marking the strength, for
    HLT-NAACL 2003-style data ("0-1:P" is a possible link).
    """
    l1_lines = _as_lines(l1_source)
    l2_lines = _as_lines(l2_source)
    links_lines = _as_lines(links_source)
    if not (len(l1_lines) == len(l2_lines) == len(links_lines)):
        raise CorpusError(
            f"moses-triple files disagree on length: "
            f"{len(l1_lines)} / {len(l2_lines)} / {len(links_lines)} lines"
        )
    records = []
    for ordinal, (l1_line, l2_line, links_line) in enumerate(
        zip(l1_lines, l2_lines, links_lines)
    ):
        try:
            links = [_parse_suffixed_link(item) for item in links_line.split()]
        except CorpusError as exc:
            raise CorpusError(f"record {ordinal}: links: {exc}") from None
        l1_tokens = l1_line.split()
        l2_tokens = l2_line.split()
        records.append(
            BitextRecord(
                id=f"{corpus_name}_{ordinal}",
                l1_tokens=l1_tokens,
                l2_tokens=l2_tokens,
                links=links,
                l1_raw=" ".join(l1_tokens),
                l2_raw=" ".join(l2_tokens),
            )
        )
    return records


def _parse_suffixed_link(item: str) -> AlignmentLink:
    base, sep, suffix = item.partition(":")
    link = _parse_link_item(base)
    if not sep:
        return link
    if suffix == "S":
        return replace(link, strength=LinkStrength.SURE)
    if suffix == "P":
        return replace(link, strength=LinkStrength.POSSIBLE)
    raise CorpusError(f"unknown strength suffix in {item!r} (expected :S or :P)")


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------

def serialize_corpus(records: Sequence[BitextRecord], format: str = BLOCKS) -> str:
    """Render records back to text; parse(serialize(x)) == x up to ids."""
    if format == BLOCKS:
        blocks = []
        for record in records:
            blocks.append(
                "\n".join(
                    (
                        " ".join(record.l1_tokens),
                        " ".join(record.l2_tokens),
                        format_links(record.links),
                        record.l1_raw,
                        record.l2_raw,
                    )
                )
            )
        return "\n\n".join(blocks) + "\n" if blocks else ""
    if format == JSONL:
        lines = []
        for record in records:
            lines.append(
                json.dumps(
                    {
                        "id": record.id,
                        "l1_tokens": record.l1_tokens,
                        "l2_tokens": record.l2_tokens,
                        "links": [str(link) for link in record.links],
                        "l1_raw": record.l1_raw,
                        "l2_raw": record.l2_raw,
                    },
                    ensure_ascii=False,
                )
            )
        return "\n".join(lines) + "\n" if lines else ""
    raise CorpusError(f"unsupported serialization format {format!r}")


# ---------------------------------------------------------------------------
# Sampling and splitting
# ---------------------------------------------------------------------------

def subsample(records: Sequence[BitextRecord], n: int, seed: int) -> list[BitextRecord]:
    """Uniform sample of ``n`` records without replacement, corpus order kept."""
    if n > len(records):
        raise CorpusError(f"subsample size {n} exceeds corpus size {len(records)}")
    picked = sorted(random.Random(seed).sample(range(len(records)), n))
    return [records[i] for i in picked]


def split_records(
    records: Sequence[BitextRecord],
    ratios: Sequence[float],
    seed: int,
) -> list[list[BitextRecord]]:
    """Deterministic ratio split (e.g. train/test/reserve) with a seed."""
    if not ratios or abs(sum(ratios) - 1.0) > 1e-9:
        raise CorpusError(f"split ratios must sum to 1, got {ratios}")
    order = list(range(len(records)))
    random.Random(seed).shuffle(order)
    splits: list[list[BitextRecord]] = []
    start = 0
    for i, ratio in enumerate(ratios):
        stop = len(records) if i == len(ratios) - 1 else start + round(ratio * len(records))
        splits.append([records[j] for j in sorted(order[start:stop])])
        start = stop
    return splits
