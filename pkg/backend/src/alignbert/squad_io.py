"""Reading query files and writing prediction files.

These two file formats are the backend's whole interface to the alignment
toolkit: queries arrive as SQuAD v2.0 JSON and predictions leave as NDJSON
lines carrying character offsets into the context.
"""

from __future__ import annotations

import json
import os
import tempfile
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

from .config import BackendError


@dataclass(frozen=True)
class SquadExample:
    """One query, flattened out of the nested document structure."""

    qid: str
    question: str
    context: str
    answer_text: str | None
    answer_start: int | None
    is_impossible: bool


def load_squad_file(path: str | Path) -> list[SquadExample]:
    """Parse one SQuAD v2.0 file into flat examples, in document order.

    Training uses the first answer of each query.  Duplicate query ids are
    a hard error because predictions are keyed by id.
    """
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise BackendError(f"{path}: invalid JSON: {exc}") from None
    if not isinstance(doc, dict) or not isinstance(doc.get("data"), list):
        raise BackendError(f"{path}: not a SQuAD document")

    examples: list[SquadExample] = []
    seen: set[str] = set()
    for article in doc["data"]:
        for paragraph in article.get("paragraphs", []):
            context = paragraph["context"]
            for qa in paragraph["qas"]:
                qid = qa["id"]
                if qid in seen:
                    raise BackendError(f"{path}: duplicate query id {qid}")
                seen.add(qid)
                impossible = bool(qa.get("is_impossible", False))
                answers = qa.get("answers", [])
                if impossible and answers:
                    raise BackendError(f"{path}: {qid}: impossible query with answers")
                if not impossible and not answers:
                    raise BackendError(f"{path}: {qid}: answerable query without answers")
                text: str | None = None
                start: int | None = None
                if answers:
                    text = answers[0]["text"]
                    start = int(answers[0]["answer_start"])
                    if context[start:start + len(text)] != text:
                        raise BackendError(
                            f"{path}: {qid}: answer does not match the context slice"
                        )
                examples.append(
                    SquadExample(qid, qa["question"], context, text, start, impossible)
                )
    return examples


def merge_examples(files: Iterable[str | Path]) -> list[SquadExample]:
    """Concatenate several query files, rejecting id collisions across them."""
    merged: list[SquadExample] = []
    seen: set[str] = set()
    for path in files:
        for example in load_squad_file(path):
            if example.qid in seen:
                raise BackendError(f"duplicate query id across files: {example.qid}")
            seen.add(example.qid)
            merged.append(example)
    return merged


def write_ndjson_atomic(path: str | Path, lines: Iterable[str]) -> None:
    """Write via a sibling temp file and rename, one writer at a time."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as handle:
            for line in lines:
                handle.write(line)
                handle.write("\n")
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
