from pathlib import Path

import pytest

from mlrepair.harness import load_corpus, run_strategy
from mlrepair.harness.bench import RunOptions

CORPUS = Path(__file__).resolve().parents[1] / "corpus"


@pytest.fixture(scope="session")
def corpus_dir() -> Path:
    return CORPUS


@pytest.fixture(scope="session")
def bugs():
    return {b.id: b for b in load_corpus(CORPUS)}


@pytest.fixture(scope="session")
def bug(bugs):
    def get(name):
        return bugs[name]

    return get


@pytest.fixture(scope="session")
def s1_runs(bugs):
    """Strategy 1 with its default purify+augment phases on every corpus bug."""
    return {name: run_strategy(b, "s1", RunOptions()) for name, b in sorted(bugs.items())}



def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS, line_for
    except ImportError:
        return
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(RESULTS):
        terminalreporter.write_line(line_for(n))
