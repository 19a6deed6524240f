from __future__ import annotations

from importlib import resources

import pytest

from mcsim import load_system, parse_atom

ACCEPTANCE_LINES: list = []


def corpus_text(name: str) -> str:
    return resources.files("mcsim").joinpath("corpus", name).read_text(encoding="utf-8")


def A(text: str):
    return parse_atom(text)


@pytest.fixture
def corpus():
    return corpus_text


@pytest.fixture
def system_of():
    def make(name: str):
        return load_system(corpus_text(name))
    return make


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
