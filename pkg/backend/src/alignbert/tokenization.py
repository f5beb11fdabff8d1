"""WordPiece tokenizer construction without hub access.

Both paths produce a BERT-style fast tokenizer whose offset mapping points
into the original strings, which is what the character-offset conversion
downstream relies on.  CJK characters split into single-character tokens.
"""

from __future__ import annotations

from pathlib import Path
from typing import Iterable

from tokenizers import Tokenizer, decoders, normalizers, pre_tokenizers, processors, trainers
from tokenizers.models import WordPiece
from transformers import BertTokenizerFast

from .config import BackendError

SPECIAL_TOKENS = ["[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]"]
# focus marker used inside questions; must always be a vocabulary token
BOUNDARY_MARKER = "¶"


def _skeleton(vocab: dict[str, int] | None) -> Tokenizer:
    tok = Tokenizer(WordPiece(vocab or {}, unk_token="[UNK]",
                              continuing_subword_prefix="##"))
    tok.normalizer = normalizers.BertNormalizer(lowercase=False, strip_accents=False)
    tok.pre_tokenizer = pre_tokenizers.BertPreTokenizer()
    tok.decoder = decoders.WordPiece(prefix="##")
    return tok


def _attach_pair_template(tok: Tokenizer) -> None:
    cls_id = tok.token_to_id("[CLS]")
    sep_id = tok.token_to_id("[SEP]")
    if cls_id is None or sep_id is None:
        raise BackendError("vocabulary lacks [CLS] or [SEP]")
    tok.post_processor = processors.TemplateProcessing(
        single="[CLS]:0 $A:0 [SEP]:0",
        pair="[CLS]:0 $A:0 [SEP]:0 $B:1 [SEP]:1",
        special_tokens=[("[CLS]", cls_id), ("[SEP]", sep_id)],
    )


def _wrap(tok: Tokenizer) -> BertTokenizerFast:
    _attach_pair_template(tok)
    return BertTokenizerFast(tokenizer_object=tok, do_lower_case=False)


def tokenizer_from_pieces(pieces: Iterable[str]) -> BertTokenizerFast:
    """Build a tokenizer over an explicit piece list.

    Special tokens and the focus marker are prepended; continuation pieces
    use the ## prefix.  Duplicates collapse silently.
    """
    vocab: dict[str, int] = {}
    for piece in [*SPECIAL_TOKENS, BOUNDARY_MARKER, *pieces]:
        if piece not in vocab:
            vocab[piece] = len(vocab)
    return _wrap(_skeleton(vocab))


def read_piece_file(path: str | Path) -> list[str]:
    """One piece per line, blanks skipped."""
    rows = Path(path).read_text(encoding="utf-8").splitlines()
    pieces = [row.strip() for row in rows if row.strip()]
    if not pieces:
        raise BackendError(f"{path}: empty vocabulary file")
    return pieces


def train_tokenizer(lines: Iterable[str], vocab_size: int) -> BertTokenizerFast:
    """Learn a WordPiece vocabulary from raw text lines."""
    if vocab_size <= len(SPECIAL_TOKENS) + 1:
        raise BackendError("vocab_size too small for the special tokens")
    tok = _skeleton(None)
    trainer = trainers.WordPieceTrainer(
        vocab_size=vocab_size,
        min_frequency=1,
        special_tokens=SPECIAL_TOKENS,
        initial_alphabet=[BOUNDARY_MARKER],
        continuing_subword_prefix="##",
        show_progress=False,
    )
    tok.train_from_iterator(lines, trainer)
    return _wrap(tok)
