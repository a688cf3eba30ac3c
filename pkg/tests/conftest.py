import sys
from pathlib import Path

import pytest

TESTS = Path(__file__).resolve().parent
CORPUS = TESTS.parent / "corpus"
sys.path.insert(0, str(TESTS))

from memfuzz.textio import parse  # noqa: E402


def load(name: str):
    return parse((CORPUS / name).read_text(encoding="utf-8"))


@pytest.fixture
def corpus():
    return load


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    lines = getattr(module, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
