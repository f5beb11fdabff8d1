"""Local encoder creation: a small BERT pretrained on corpus text.

There is no model hub to download from, so the backend builds its own
pretrained multilingual encoder from the raw sentences of the corpus.
Pretraining is self-supervised on monolingual lines only; it never sees
sentence pairs or alignment links:

- masked language modeling over raw lines, synthetic lines with repeated
  words, and (word, line containing it) two-segment inputs whose twin
  occurrence is masked, which teaches recovery by finding a matching word;
- copy localization, where the model points at the occurrence of a given
  word inside a line, or at [CLS] when the word is absent, which pretrains
  the span-pointer readout and its no-answer behavior.

Fine-tuning then only adapts same-word matching into translation matching,
which fits a two-epoch budget even for very small models.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import torch
from transformers import (
    BertConfig,
    BertForMaskedLM,
    BertForQuestionAnswering,
    BertTokenizerFast,
)

from .config import BackendError
from .tokenization import BOUNDARY_MARKER

PRETRAIN_LOG = "pretrain_log.json"


@dataclass
class PretrainLog:
    mlm_losses: list[tuple[int, float]] = field(default_factory=list)
    pointer_losses: list[tuple[int, float]] = field(default_factory=list)
    skipped_steps: int = 0

    def as_dict(self) -> dict:
        return {
            "mlm_losses": [[step, loss] for step, loss in self.mlm_losses],
            "pointer_losses": [[step, loss] for step, loss in self.pointer_losses],
            "skipped_steps": self.skipped_steps,
        }


class _TextSampler:
    """Draws pretraining inputs from monolingual lines.

    Synthetic lines sample from the pooled vocabulary, repeat some words,
    and occasionally wrap one occurrence in focus markers so the marker
    embedding is trained before fine-tuning ever sees it.
    """

    def __init__(self, lines: Sequence[str], rng: random.Random):
        self.lines = [line for line in lines if line.strip()]
        if not self.lines:
            raise BackendError("no pretraining text lines")
        self.rng = rng
        self.line_words = [line.split() for line in self.lines]
        pool: list[str] = []
        seen: set[str] = set()
        for words in self.line_words:
            for word in words:
                if word not in seen:
                    seen.add(word)
                    pool.append(word)
        self.pool = pool

    def raw_line(self) -> str:
        return self.lines[self.rng.randrange(len(self.lines))]

    def repetition_tokens(self) -> list[str]:
        take = self.rng.randint(4, min(7, max(4, len(self.pool))))
        words = [self.pool[i] for i in self.rng.sample(range(len(self.pool)),
                                                       min(take, len(self.pool)))]
        repeats = [w for w in words if self.rng.random() < 0.5]
        tokens = words + repeats
        self.rng.shuffle(tokens)
        if tokens and self.rng.random() < 0.6:
            k = self.rng.randrange(len(tokens))
            tokens = tokens[:k] + [BOUNDARY_MARKER, tokens[k], BOUNDARY_MARKER] + tokens[k + 1:]
        return tokens

    def word_in_line(self) -> tuple[str, str, bool]:
        """(word, line, present): the word occurs in the line iff present."""
        for _ in range(20):
            words = self.line_words[self.rng.randrange(len(self.line_words))]
            if words:
                break
        else:
            raise BackendError("pretraining lines contain no words")
        if self.rng.random() < 0.3:
            absent = [w for w in self.pool if w not in words]
            if absent:
                return absent[self.rng.randrange(len(absent))], " ".join(words), False
        return words[self.rng.randrange(len(words))], " ".join(words), True


def _mask_twin(batch, row: int, line: str, word: str, mask_id: int,
               inp: torch.Tensor, labels: torch.Tensor) -> None:
    """Mask the subtokens of `word`'s first occurrence inside segment B."""
    at = line.index(word)
    sequence_ids = batch.sequence_ids(row)
    for pos, sid in enumerate(sequence_ids):
        if sid != 1:
            continue
        lo, hi = batch["offset_mapping"][row][pos].tolist()
        if at <= lo and hi <= at + len(word) and hi > lo:
            labels[row, pos] = inp[row, pos]
            inp[row, pos] = mask_id


def _twin_token_span(batch, row: int, line: str, word: str) -> tuple[int, int] | None:
    at = line.index(word)
    lo_pos = hi_pos = None
    sequence_ids = batch.sequence_ids(row)
    for pos, sid in enumerate(sequence_ids):
        if sid != 1:
            continue
        lo, hi = batch["offset_mapping"][row][pos].tolist()
        if at <= lo and hi <= at + len(word) and hi > lo:
            lo_pos = pos if lo_pos is None else lo_pos
            hi_pos = pos
    if lo_pos is None:
        return None
    return lo_pos, hi_pos


def make_encoder(
    lines: Iterable[str],
    out_dir: str | Path,
    tokenizer: BertTokenizerFast,
    hidden_size: int = 128,
    num_layers: int = 2,
    num_heads: int = 4,
    intermediate_size: int = 256,
    max_position_embeddings: int = 384,
    mlm_steps: int = 3000,
    pointer_steps: int = 2000,
    batch_size: int = 16,
    learning_rate: float = 5e-4,
    head_lr_factor: float = 10.0,
    seed: int = 11,
) -> PretrainLog:
    """Pretrain a small encoder plus pointer head and save the artifact.

    The output directory loads directly into fine-tuning: tokenizer,
    model weights (including the pretrained pointer layers), and a
    pretraining log.
    """
    out_dir = Path(out_dir)
    rng = random.Random(seed)
    torch.manual_seed(seed)
    gen = torch.Generator().manual_seed(seed + 1)
    sampler = _TextSampler(list(lines), rng)
    log = PretrainLog()

    config = BertConfig(
        vocab_size=tokenizer.vocab_size,
        hidden_size=hidden_size,
        num_hidden_layers=num_layers,
        num_attention_heads=num_heads,
        intermediate_size=intermediate_size,
        max_position_embeddings=max_position_embeddings,
        pad_token_id=tokenizer.pad_token_id,
    )
    mlm = BertForMaskedLM(config)
    mlm.train()
    optimizer = torch.optim.AdamW(mlm.parameters(), lr=learning_rate)
    mask_id = tokenizer.mask_token_id
    special_ids = torch.tensor(tokenizer.all_special_ids)

    for step in range(mlm_steps):
        if step % 2 == 0:
            # word-in-context: recover the masked twin from segment A
            picks = [sampler.word_in_line() for _ in range(batch_size)]
            batch = tokenizer([w for w, _, _ in picks], [l for _, l, _ in picks],
                              return_tensors="pt", padding=True,
                              return_offsets_mapping=True)
            inp = batch["input_ids"].clone()
            labels = torch.full_like(inp, -100)
            for row, (word, line, present) in enumerate(picks):
                if present and rng.random() < 0.7:
                    _mask_twin(batch, row, line, word, mask_id, inp, labels)
        else:
            if step % 4 == 1:
                batch = tokenizer([sampler.raw_line() for _ in range(batch_size)],
                                  return_tensors="pt", padding=True)
            else:
                # repetition lines split into two segments
                firsts, seconds = [], []
                for _ in range(batch_size):
                    tokens = sampler.repetition_tokens()
                    while len(tokens) < 4:
                        tokens = sampler.repetition_tokens()
                    cut = rng.randint(2, len(tokens) - 2)
                    firsts.append(" ".join(tokens[:cut]))
                    seconds.append(" ".join(tokens[cut:]))
                batch = tokenizer(firsts, seconds, return_tensors="pt", padding=True)
            inp = batch["input_ids"].clone()
            labels = inp.clone()
            maskable = ~torch.isin(inp, special_ids)
            chosen = (torch.rand(inp.shape, generator=gen) < 0.2) & maskable
            inp[chosen] = mask_id
            labels[~chosen] = -100

        if (labels != -100).sum() == 0:
            continue
        out = mlm(input_ids=inp, attention_mask=batch["attention_mask"],
                  token_type_ids=batch["token_type_ids"], labels=labels)
        if not torch.isfinite(out.loss):
            optimizer.zero_grad()
            log.skipped_steps += 1
            continue
        out.loss.backward()
        torch.nn.utils.clip_grad_norm_(mlm.parameters(), 1.0)
        optimizer.step()
        optimizer.zero_grad()
        if step % 100 == 0 or step == mlm_steps - 1:
            log.mlm_losses.append((step, float(out.loss.item())))

    out_dir.mkdir(parents=True, exist_ok=True)
    mlm.save_pretrained(out_dir)
    tokenizer.save_pretrained(out_dir)
    del mlm

    # copy localization: point at the twin, or at [CLS] when absent
    pointer = BertForQuestionAnswering.from_pretrained(out_dir)
    pointer.train()
    optimizer = torch.optim.AdamW([
        {"params": pointer.bert.parameters(), "lr": learning_rate},
        {"params": pointer.qa_outputs.parameters(), "lr": learning_rate * head_lr_factor},
    ])
    for step in range(pointer_steps):
        picks = [sampler.word_in_line() for _ in range(batch_size)]
        batch = tokenizer([w for w, _, _ in picks], [l for _, l, _ in picks],
                          return_tensors="pt", padding=True,
                          return_offsets_mapping=True)
        starts = torch.zeros(len(picks), dtype=torch.long)
        ends = torch.zeros(len(picks), dtype=torch.long)
        for row, (word, line, present) in enumerate(picks):
            if not present:
                continue
            span = _twin_token_span(batch, row, line, word)
            if span is not None:
                starts[row], ends[row] = span
        out = pointer(input_ids=batch["input_ids"],
                      attention_mask=batch["attention_mask"],
                      token_type_ids=batch["token_type_ids"],
                      start_positions=starts, end_positions=ends)
        if not torch.isfinite(out.loss):
            optimizer.zero_grad()
            log.skipped_steps += 1
            continue
        out.loss.backward()
        torch.nn.utils.clip_grad_norm_(pointer.parameters(), 1.0)
        optimizer.step()
        optimizer.zero_grad()
        if step % 100 == 0 or step == pointer_steps - 1:
            log.pointer_losses.append((step, float(out.loss.item())))

    pointer.save_pretrained(out_dir)
    (out_dir / PRETRAIN_LOG).write_text(
        json.dumps(log.as_dict(), indent=1) + "\n", encoding="utf-8"
    )
    return log
