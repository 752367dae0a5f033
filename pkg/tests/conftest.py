"""Shared fixtures and the acceptance-criteria summary hook."""

import pathlib

import pytest

from graphfa.automaton import Dfa, Transition
from graphfa.langs import LANGUAGES, compiled_dfa, nfa
from graphfa.model import graph, make_atom

ROOT = pathlib.Path(__file__).resolve().parent.parent
SAMPLES = ROOT / "samples"
DOCS = ROOT / "docs"

# criterion number -> printed line, filled by test_acceptance
ACCEPTANCE_LINES = {}


def record_criterion(n: int, passed: bool, detail: str = "") -> None:
    tail = f"  ({detail})" if detail else ""
    ACCEPTANCE_LINES[n] = f"criterion {n}: {'PASS' if passed else 'FAIL'}{tail}"


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[n])


@pytest.fixture(scope="session")
def dfas():
    return {name: compiled_dfa(name) for name in LANGUAGES}


@pytest.fixture(scope="session")
def nfas():
    return {name: nfa(name) for name in LANGUAGES}


def graph_S():
    return graph([1, 2, 3, 4, 5],
                 [("a", (1, 2)), ("b", (3, 4)), ("c", (4, 5))],
                 front=(1, 4), rear=(2, 3, 5))


def graph_M():
    return graph([1, 2, 3, 4, 5, 6],
                 [("a", (1, 2)), ("b", (3, 4)), ("c", (5, 6))],
                 front=(1, 4, 5), rear=(2, 3, 6))


def graph_T():
    return graph([1, 2, 3, 4, 5],
                 [("a", (1, 2)), ("b", (2, 3)), ("c", (4, 5))],
                 front=(1, 3, 4), rear=())


@pytest.fixture
def smt():
    return graph_S(), graph_M(), graph_T()


@pytest.fixture
def star_dfa():
    """Rank-3 star: loop keeps the hub, exit drops everything.

    The loop is self-deferrable but its rear stays inside its front, so the
    free-edge-choice check still passes.
    """
    return Dfa({"s": 3}, [1, 0], 0, frozenset([1]),
               [Transition(0, make_atom("s", 3, (1,), (1,)), 0),
                Transition(0, make_atom("s", 3, (2,), ()), 1)])


@pytest.fixture
def star_bad_dfa():
    """Variant whose loop carries the fresh spoke node in its rear: the edge
    chosen for the loop decides the next front, so certification must fail."""
    return Dfa({"s": 3}, [2], 0, frozenset([0]),
               [Transition(0, make_atom("s", 3, (1, 4), (1, 2)), 0)])


@pytest.fixture
def tangle_dfa():
    """Two slot-preserving self-loops on different labels: mutually strayable,
    so the trial-order constraints form a two-cycle."""
    return Dfa({"a": 2, "b": 2}, [2], 0, frozenset([0]),
               [Transition(0, make_atom("a", 2, (1, 2), (1, 2)), 0),
                Transition(0, make_atom("b", 2, (1, 2), (1, 2)), 0)])
