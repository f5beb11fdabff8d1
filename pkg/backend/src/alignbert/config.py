"""Fine-tuning hyperparameters."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, fields
from pathlib import Path


class BackendError(ValueError):
    """Raised for invalid configs, inputs, or model artifacts."""


@dataclass(frozen=True)
class FinetuneConfig:
    """Knobs for span-pointer fine-tuning and prediction.

    The defaults suit a full-size multilingual encoder.  Tiny locally
    pretrained encoders usually want a larger learning rate and a smaller
    batch; pass a config file to override.
    """

    batch_size: int = 12
    learning_rate: float = 3e-5
    num_epochs: int = 2
    max_seq_length: int = 384
    max_query_length: int = 160
    # measured in subtokens, applied when ranking candidate spans
    max_answer_length: int = 15
    # fresh pointer layers train faster than the encoder body
    head_lr_factor: float = 10.0
    seed: int = 42

    def __post_init__(self) -> None:
        positive = (
            "batch_size", "learning_rate", "max_seq_length",
            "max_query_length", "max_answer_length", "head_lr_factor",
        )
        for name in positive:
            if getattr(self, name) <= 0:
                raise BackendError(f"{name} must be positive")
        # zero epochs is allowed: it leaves the pretrained weights untouched
        if self.num_epochs < 0:
            raise BackendError("num_epochs must be >= 0")
        if self.seed < 0:
            raise BackendError("seed must be >= 0")
        # one [CLS] and two [SEP] frame the question and the context
        if self.max_seq_length < self.max_query_length + 3:
            raise BackendError(
                "max_seq_length must cover max_query_length plus three special tokens"
            )

    def as_dict(self) -> dict:
        return asdict(self)

    def to_file(self, path: str | Path) -> None:
        Path(path).write_text(
            json.dumps(self.as_dict(), indent=1) + "\n", encoding="utf-8"
        )

    @classmethod
    def from_file(cls, path: str | Path) -> "FinetuneConfig":
        try:
            payload = json.loads(Path(path).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise BackendError(f"{path}: invalid JSON: {exc}") from None
        if not isinstance(payload, dict):
            raise BackendError(f"{path}: config must be a JSON object")
        known = {field.name for field in fields(cls)}
        unknown = sorted(set(payload) - known)
        if unknown:
            raise BackendError(f"{path}: unknown config keys: {', '.join(unknown)}")
        return cls(**payload)
