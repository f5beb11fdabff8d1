"""Span-pointer fine-tuning on emitted query files."""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import torch
from transformers import BertForQuestionAnswering, BertTokenizerFast

from .config import BackendError, FinetuneConfig
from .features import OverflowLog, collate, featurize
from .squad_io import merge_examples

TRAINING_LOG = "training_log.json"
CONFIG_FILE = "finetune_config.json"


@dataclass
class TrainReport:
    out_dir: Path
    epoch_losses: list[float]
    n_examples: int
    overflow: OverflowLog
    skipped_steps: int


def finetune(
    encoder_dir: str | Path,
    squad_files: Sequence[str | Path],
    out_dir: str | Path,
    cfg: FinetuneConfig | None = None,
) -> TrainReport:
    """Fine-tune the pretrained encoder on one or more query files.

    Both directions train in one model, so pass both directional files
    together.  Oversized inputs are logged and trained as no-answer,
    never dropped.  Zero epochs saves the pretrained weights untouched.
    """
    cfg = cfg or FinetuneConfig()
    if not Path(encoder_dir).is_dir():
        raise BackendError(f"encoder directory not found: {encoder_dir}")
    out_dir = Path(out_dir)
    random.seed(cfg.seed)
    torch.manual_seed(cfg.seed)

    tokenizer = BertTokenizerFast.from_pretrained(encoder_dir)
    model = BertForQuestionAnswering.from_pretrained(encoder_dir)
    examples = merge_examples(squad_files)
    features, overflow = featurize(tokenizer, examples, cfg, for_training=True)

    optimizer = torch.optim.AdamW([
        {"params": model.bert.parameters(), "lr": cfg.learning_rate},
        {"params": model.qa_outputs.parameters(),
         "lr": cfg.learning_rate * cfg.head_lr_factor},
    ])

    model.train()
    epoch_losses: list[float] = []
    skipped = 0
    order = list(range(len(features)))
    for epoch in range(cfg.num_epochs):
        random.Random(f"{cfg.seed}:{epoch}").shuffle(order)
        total = 0.0
        batches = 0
        for offset in range(0, len(order), cfg.batch_size):
            chunk = [features[i] for i in order[offset:offset + cfg.batch_size]]
            batch = collate(chunk, tokenizer.pad_token_id)
            out = model(**batch)
            if not torch.isfinite(out.loss):
                optimizer.zero_grad()
                skipped += 1
                continue
            out.loss.backward()
            torch.nn.utils.clip_grad_norm_(model.parameters(), 1.0)
            optimizer.step()
            optimizer.zero_grad()
            total += float(out.loss.item())
            batches += 1
        epoch_losses.append(total / batches if batches else float("nan"))

    out_dir.mkdir(parents=True, exist_ok=True)
    model.save_pretrained(out_dir)
    tokenizer.save_pretrained(out_dir)
    cfg.to_file(out_dir / CONFIG_FILE)
    (out_dir / TRAINING_LOG).write_text(
        json.dumps({
            "epoch_losses": epoch_losses,
            "n_examples": len(examples),
            "skipped_steps": skipped,
            "overflow": overflow.as_dict(),
            "config": cfg.as_dict(),
        }, indent=1) + "\n",
        encoding="utf-8",
    )
    return TrainReport(out_dir, epoch_losses, len(examples), overflow, skipped)
