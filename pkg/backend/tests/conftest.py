import json
import os
import random
import subprocess
import sys
import time
from contextlib import contextmanager
from pathlib import Path

os.environ.setdefault("TRANSFORMERS_VERBOSITY", "error")
os.environ.setdefault("HF_HUB_DISABLE_PROGRESS_BARS", "1")

import pytest

from alignbert import FinetuneConfig, make_encoder, tokenizer_from_pieces

# (criterion name, "PASS"/"FAIL") tuples filled by the acceptance tests and
# echoed after the run, one line each, regardless of output capturing.
ACCEPTANCE_RESULTS: list = []


@pytest.fixture
def criterion():
    @contextmanager
    def _criterion(name: str, budget_s: float | None = None):
        started = time.perf_counter()
        try:
            yield
            elapsed = time.perf_counter() - started
            if budget_s is not None and elapsed > budget_s:
                raise AssertionError(
                    f"{name}: took {elapsed:.2f}s, budget {budget_s:g}s"
                )
        except BaseException:
            ACCEPTANCE_RESULTS.append((name, "FAIL"))
            raise
        ACCEPTANCE_RESULTS.append((name, f"PASS ({time.perf_counter() - started:.2f}s)"))

    return _criterion


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, status in ACCEPTANCE_RESULTS:
        terminalreporter.write_line(f"{status:14s} {name}")


# Two synthetic languages built on shared stems: L1 suffixes every stem
# with "ta", L2 with "ko", so the wordpiece vocabulary makes translation
# pairs share a stem subtoken.  Target order is shuffled per sentence,
# which keeps the task content-based rather than positional.
STEMS = [c + v for c in "bdfgklmn" for v in "aei"]
VOCAB_PIECES = (
    ["[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]", "¶"]
    + STEMS
    + ["##ta", "##ko"]
)


def synth_corpus(n_pairs: int = 20, n_tokens: int = 12, seed: int = 7):
    """Sentence pairs as (l1_tokens, l2_tokens, links) triples."""
    rng = random.Random(seed)
    pairs = []
    for _ in range(n_pairs):
        chosen = rng.sample(STEMS, n_tokens)
        l1 = [s + "ta" for s in chosen]
        order = list(range(n_tokens))
        rng.shuffle(order)
        l2 = [chosen[i] + "ko" for i in order]
        links = sorted((i, order.index(i)) for i in range(n_tokens))
        pairs.append((l1, l2, links))
    return pairs


def corpus_blocks(pairs) -> str:
    blocks = []
    for l1, l2, links in pairs:
        blocks.append("\n".join([
            " ".join(l1),
            " ".join(l2),
            " ".join(f"{a}-{b}" for a, b in links),
            " ".join(l1),
            " ".join(l2),
        ]))
    return "\n\n".join(blocks) + "\n"


def corpus_text_lines(pairs) -> list[str]:
    lines = []
    for l1, l2, _ in pairs:
        lines.append(" ".join(l1))
        lines.append(" ".join(l2))
    return lines


def write_squad(path: Path, entries) -> Path:
    """Write a well-formed query file from (qid, question, context, answer,
    start) tuples; answer None means impossible."""
    paragraphs = []
    for qid, question, context, answer, start in entries:
        qa = {"id": qid, "question": question,
              "is_impossible": answer is None, "answers": []}
        if answer is not None:
            qa["answers"] = [{"text": answer, "answer_start": start}]
        paragraphs.append({"context": context, "qas": [qa]})
    doc = {"version": "v2.0", "data": [{"title": "t", "paragraphs": paragraphs}]}
    path.write_text(json.dumps(doc, ensure_ascii=False), encoding="utf-8")
    return path


def run_cli(*argv: str) -> subprocess.CompletedProcess:
    """Run a console script in a subprocess and fail loudly on stderr."""
    proc = subprocess.run(
        list(argv), capture_output=True, text=True, encoding="utf-8"
    )
    if proc.returncode != 0:
        raise AssertionError(
            f"{argv[0]} failed ({proc.returncode}):\n{proc.stderr}"
        )
    return proc


@pytest.fixture(scope="session")
def synth_pairs():
    return synth_corpus()


@pytest.fixture(scope="session")
def tiny_encoder(tmp_path_factory):
    """A barely-trained encoder: enough for wiring tests, not accuracy."""
    out = tmp_path_factory.mktemp("enc") / "encoder"
    tok = tokenizer_from_pieces(VOCAB_PIECES)
    lines = corpus_text_lines(synth_corpus(n_pairs=6))
    make_encoder(
        lines, out, tok,
        hidden_size=64, num_layers=2, num_heads=2, intermediate_size=128,
        mlm_steps=30, pointer_steps=20, batch_size=4,
    )
    return out


@pytest.fixture(scope="session")
def overfit_run(tmp_path_factory, synth_pairs):
    """The full lifecycle, driven through both command-line tools.

    Corpus to query files to encoder to fine-tuned model to predictions
    to symmetrized alignments to scores, everything passed between the
    two packages as files.
    """
    work = tmp_path_factory.mktemp("overfit")
    started = time.perf_counter()

    corpus = work / "corpus.blocks"
    corpus.write_text(corpus_blocks(synth_pairs), encoding="utf-8")
    texts = work / "texts.txt"
    texts.write_text("\n".join(corpus_text_lines(synth_pairs)) + "\n",
                     encoding="utf-8")
    vocab = work / "vocab.txt"
    vocab.write_text("\n".join(VOCAB_PIECES) + "\n", encoding="utf-8")
    ft_config = work / "finetune.json"
    ft_config.write_text(json.dumps(
        {"batch_size": 4, "learning_rate": 5e-4, "num_epochs": 2}
    ), encoding="utf-8")

    squad_dir = work / "squad"
    run_cli("spanalign", "convert", str(corpus), "--context", "none",
            "--out-dir", str(squad_dir))
    squad_f = squad_dir / "squad_f.json"
    squad_b = squad_dir / "squad_b.json"

    run_cli("alignbert", "make-encoder", str(texts),
            "--out", str(work / "encoder"), "--vocab-file", str(vocab),
            "--mlm-steps", "3000", "--pointer-steps", "2000")
    run_cli("alignbert", "finetune", str(squad_f), str(squad_b),
            "--encoder", str(work / "encoder"), "--out", str(work / "model"),
            "--config", str(ft_config))
    run_cli("alignbert", "predict", str(squad_f),
            "--model", str(work / "model"), "--out", str(work / "pred_f.ndjson"))
    run_cli("alignbert", "predict", str(squad_b),
            "--model", str(work / "model"), "--out", str(work / "pred_b.ndjson"))

    run_cli("spanalign", "align", str(corpus),
            "--predictions-f", str(work / "pred_f.ndjson"),
            "--predictions-b", str(work / "pred_b.ndjson"),
            "--out", str(work / "hyp.pharaoh"))
    score = run_cli("spanalign", "score", str(work / "hyp.pharaoh"),
                    str(corpus), "--json")

    return {
        "work": work,
        "squad_f": squad_f,
        "squad_b": squad_b,
        "pred_f": work / "pred_f.ndjson",
        "pred_b": work / "pred_b.ndjson",
        "score": json.loads(score.stdout),
        "elapsed_s": time.perf_counter() - started,
    }
