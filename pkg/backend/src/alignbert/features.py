"""Turning queries into model inputs.

The subtoken-to-character bookkeeping lives here and in the predictor: the
alignment toolkit on the other side of the file formats only ever sees
character offsets.  All mapping goes through the tokenizer's offset map;
nothing is recovered by string search.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import torch
from transformers import BertTokenizerFast

from .config import BackendError, FinetuneConfig
from .squad_io import SquadExample


@dataclass
class Feature:
    """One encoded query.

    start/end positions index the subtoken sequence; position 0 is [CLS],
    the no-answer slot.  offsets are character ranges into the question or
    the context depending on the segment a position belongs to.
    """

    qid: str
    input_ids: list[int]
    attention_mask: list[int]
    token_type_ids: list[int]
    offsets: list[tuple[int, int]]
    context_positions: list[int]
    start_position: int
    end_position: int
    context_len: int
    context_truncated: bool


@dataclass
class OverflowLog:
    """Per-id records of everything that did not fit; never fatal."""

    truncated_query: list[str] = field(default_factory=list)
    truncated_context: list[str] = field(default_factory=list)
    unmapped_answer: list[str] = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "truncated_query": self.truncated_query,
            "truncated_context": self.truncated_context,
            "unmapped_answer": self.unmapped_answer,
        }


def _clip_question(tokenizer: BertTokenizerFast, question: str, budget: int) -> tuple[str, bool]:
    """Trim a question to its first `budget` subtokens, at a character boundary."""
    enc = tokenizer(question, add_special_tokens=False, return_offsets_mapping=True)
    if len(enc["input_ids"]) <= budget:
        return question, False
    cut = enc["offset_mapping"][budget - 1][1]
    return question[:cut].rstrip(), True


def featurize(
    tokenizer: BertTokenizerFast,
    examples: list[SquadExample],
    cfg: FinetuneConfig,
    for_training: bool,
) -> tuple[list[Feature], OverflowLog]:
    """Encode examples, mapping answer characters to subtoken positions.

    Answers that fall outside the encoded window (context overflow) train
    as no-answer and are logged, mirroring how oversized inputs are handled
    end to end: recorded, never fatal.
    """
    features: list[Feature] = []
    log = OverflowLog()
    for example in examples:
        question, clipped = _clip_question(tokenizer, example.question, cfg.max_query_length)
        if clipped:
            log.truncated_query.append(example.qid)

        enc = tokenizer(
            question,
            example.context,
            truncation="only_second",
            max_length=cfg.max_seq_length,
            return_offsets_mapping=True,
        )
        sequence_ids = enc.sequence_ids()
        context_positions = [i for i, sid in enumerate(sequence_ids) if sid == 1]

        n_context_tokens = len(tokenizer(example.context, add_special_tokens=False)["input_ids"])
        truncated = len(context_positions) < n_context_tokens
        if truncated:
            log.truncated_context.append(example.qid)

        start_position = end_position = 0
        if for_training and not example.is_impossible:
            span = _answer_token_span(enc, context_positions, example)
            if span is None:
                log.unmapped_answer.append(example.qid)
            else:
                start_position, end_position = span

        features.append(Feature(
            qid=example.qid,
            input_ids=list(enc["input_ids"]),
            attention_mask=list(enc["attention_mask"]),
            token_type_ids=list(enc["token_type_ids"]),
            offsets=[tuple(pair) for pair in enc["offset_mapping"]],
            context_positions=context_positions,
            start_position=start_position,
            end_position=end_position,
            context_len=len(example.context),
            context_truncated=truncated,
        ))
    return features, log


def _answer_token_span(enc, context_positions: list[int], example: SquadExample):
    """Locate the subtoken span covering the answer characters, if intact."""
    a0 = example.answer_start
    a1 = a0 + len(example.answer_text)
    tok_start = tok_end = None
    for pos in context_positions:
        lo, hi = enc["offset_mapping"][pos]
        if lo <= a0 < hi:
            tok_start = pos
        if lo < a1 <= hi:
            tok_end = pos
    if tok_start is None or tok_end is None or tok_end < tok_start:
        return None
    return tok_start, tok_end


def collate(features: list[Feature], pad_id: int) -> dict[str, torch.Tensor]:
    """Stack features into padded tensors; attention masks cover the padding."""
    width = max(len(f.input_ids) for f in features)

    def pad(rows: list[list[int]], value: int) -> torch.Tensor:
        return torch.tensor([row + [value] * (width - len(row)) for row in rows])

    return {
        "input_ids": pad([f.input_ids for f in features], pad_id),
        "attention_mask": pad([f.attention_mask for f in features], 0),
        "token_type_ids": pad([f.token_type_ids for f in features], 0),
        "start_positions": torch.tensor([f.start_position for f in features]),
        "end_positions": torch.tensor([f.end_position for f in features]),
    }
