import time
from contextlib import contextmanager
from pathlib import Path

import pytest

from spanalign import parse_corpus

DATA_DIR = Path(__file__).parent / "data"

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


@pytest.fixture(scope="session")
def kftt_text() -> str:
    return (DATA_DIR / "kftt_devtest.blocks").read_text(encoding="utf-8")


@pytest.fixture(scope="session")
def kftt_records(kftt_text):
    return parse_corpus(kftt_text, "blocks", "kftt_devtest")


@pytest.fixture(scope="session")
def kftt(kftt_records):
    return kftt_records[0]


@pytest.fixture(scope="session")
def handcrafted_text() -> str:
    return (DATA_DIR / "handcrafted.blocks").read_text(encoding="utf-8")


@pytest.fixture(scope="session")
def handcrafted_records(handcrafted_text):
    return parse_corpus(handcrafted_text, "blocks", "handcrafted")
