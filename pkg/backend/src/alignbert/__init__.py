"""BERT span-pointer backend for word alignment.

Consumes SQuAD v2.0 query files, produces NDJSON predictions with
character offsets.  Everything else (corpus parsing, span decoding,
symmetrization, scoring) lives on the other side of those two files.
"""

from .config import BackendError, FinetuneConfig
from .encoder import make_encoder
from .predict import PredictReport, load_model_config, predict_file
from .squad_io import SquadExample, load_squad_file, merge_examples
from .tokenization import (
    read_piece_file,
    tokenizer_from_pieces,
    train_tokenizer,
)
from .train import TrainReport, finetune

__all__ = [
    "BackendError",
    "FinetuneConfig",
    "PredictReport",
    "SquadExample",
    "TrainReport",
    "finetune",
    "load_model_config",
    "load_squad_file",
    "make_encoder",
    "merge_examples",
    "predict_file",
    "read_piece_file",
    "tokenizer_from_pieces",
    "train_tokenizer",
]
