"""Batched inference emitting character-offset predictions.

Each query yields one NDJSON line: the n best candidate spans as character
offsets into the context (end exclusive, Unicode scalar positions) with
their start and end probabilities, plus the no-answer score taken from the
[CLS] slot.  Probabilities come from softmax over the real (non-padding)
positions, so results do not depend on batch composition.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import torch
from transformers import BertForQuestionAnswering, BertTokenizerFast

from .config import BackendError, FinetuneConfig
from .features import Feature, collate, featurize
from .squad_io import load_squad_file, write_ndjson_atomic
from .train import CONFIG_FILE


@dataclass
class PredictReport:
    out_path: Path
    n_queries: int
    truncated_context: list[str]


def load_model_config(model_dir: str | Path) -> FinetuneConfig:
    """Config saved next to the weights, or defaults when absent."""
    path = Path(model_dir) / CONFIG_FILE
    if path.exists():
        return FinetuneConfig.from_file(path)
    return FinetuneConfig()


def _candidate_spans(
    p_start: torch.Tensor,
    p_end: torch.Tensor,
    feature: Feature,
    nbest: int,
    max_answer_subtokens: int,
) -> list[dict]:
    """Top candidate spans among context positions, best first.

    Candidates pair a start subtoken with an end subtoken at or after it,
    within the subtoken length cap; scores multiply the two probabilities.
    """
    positions = feature.context_positions
    if not positions:
        return []
    ctx = torch.tensor(positions)
    scores = torch.outer(p_start[ctx], p_end[ctx])
    n = len(positions)
    arange = torch.arange(n)
    width = arange.unsqueeze(0) - arange.unsqueeze(1)
    valid = (width >= 0) & (width < max_answer_subtokens)
    scores = torch.where(valid, scores, torch.zeros(()))

    flat = scores.flatten()
    k = min(nbest, int(valid.sum()))
    top = torch.topk(flat, k)
    entries: list[dict] = []
    for rank in range(k):
        index = int(top.indices[rank])
        s_local, e_local = divmod(index, n)
        s_pos, e_pos = positions[s_local], positions[e_local]
        start_char = feature.offsets[s_pos][0]
        end_char = feature.offsets[e_pos][1]
        if end_char <= start_char:
            continue
        entries.append({
            "start": int(start_char),
            "end": int(end_char),
            "p_start": float(p_start[s_pos]),
            "p_end": float(p_end[e_pos]),
        })
    return entries


def predict_file(
    model_dir: str | Path,
    squad_file: str | Path,
    out_path: str | Path,
    nbest: int = 5,
    cfg: FinetuneConfig | None = None,
    batch_size: int | None = None,
) -> PredictReport:
    """Run the model over one query file and write NDJSON predictions.

    Output order follows the query file.  Context truncations are recorded
    per id in the report; they are the only case where an answer can be
    unreachable, and they never abort the run.
    """
    if nbest <= 0:
        raise BackendError("nbest must be positive")
    if not Path(model_dir).is_dir():
        raise BackendError(f"model directory not found: {model_dir}")
    cfg = cfg or load_model_config(model_dir)
    batch_size = batch_size or cfg.batch_size
    if batch_size <= 0:
        raise BackendError("batch_size must be positive")
    out_path = Path(out_path)

    tokenizer = BertTokenizerFast.from_pretrained(model_dir)
    model = BertForQuestionAnswering.from_pretrained(model_dir)
    model.eval()
    torch.manual_seed(cfg.seed)

    examples = load_squad_file(squad_file)
    features, overflow = featurize(tokenizer, examples, cfg, for_training=False)

    lines: list[str] = []
    with torch.no_grad():
        for offset in range(0, len(features), batch_size):
            chunk = features[offset:offset + batch_size]
            batch = collate(chunk, tokenizer.pad_token_id)
            out = model(input_ids=batch["input_ids"],
                        attention_mask=batch["attention_mask"],
                        token_type_ids=batch["token_type_ids"])
            # exclude padding from normalization: a query's probabilities
            # must not depend on what it was batched with
            mask = batch["attention_mask"] == 0
            start_logits = out.start_logits.masked_fill(mask, float("-inf"))
            end_logits = out.end_logits.masked_fill(mask, float("-inf"))
            p_start = torch.softmax(start_logits, dim=-1)
            p_end = torch.softmax(end_logits, dim=-1)
            for row, feature in enumerate(chunk):
                entries = _candidate_spans(
                    p_start[row], p_end[row], feature, nbest, cfg.max_answer_length
                )
                null_score = float(p_start[row][0] * p_end[row][0])
                lines.append(json.dumps(
                    {"id": feature.qid, "nbest": entries, "null_score": null_score},
                    ensure_ascii=False,
                ))

    write_ndjson_atomic(out_path, lines)
    return PredictReport(out_path, len(features), overflow.truncated_context)
