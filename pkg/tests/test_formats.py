"""Readers and writers: automaton specs, graph files, compiled files, DOT."""

import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import SAMPLES, graph_S
from graphfa import formats
from graphfa.errors import (ChecksumMismatch, GraphfaError, InvariantViolation,
                            ParseError, SemanticError, UncertifiedDfa,
                            VersionMismatch)
from graphfa.langs import compiled_dfa, gen_wheel
from graphfa.model import graph, iso_check
from graphfa.recognizer import recognize_linear
from helpers import random_word


class TestAutomatonSpec:
    def test_seven_state_sample(self):
        auto = formats.parse_automaton_spec((SAMPLES / "abc.auto").read_text())
        assert auto.n_states == 7
        by_name = {auto.names[q]: auto.ranks[q] for q in range(7)}
        assert by_name == {"q0": 2, "q1": 2, "q2": 3, "q3": 1,
                           "q4": 3, "q5": 0, "q6": 3}
        assert {auto.names[q] for q in auto.final} == {"q5"}
        assert auto.names[auto.start] == "q0"
        assert len(auto.transitions) == 8

    def test_rear_arity_must_match_target_rank(self):
        text = ("symbol a(2)\n"
                "state q0(2), q1(3)\n"
                "start q0\n"
                "q0 -> q1 : a^13_23\n")
        with pytest.raises((SemanticError, InvariantViolation)):
            formats.parse_automaton_spec(text)

    def test_undeclared_state(self):
        text = ("symbol a(2)\n"
                "state q0(2)\n"
                "start q0\n"
                "q0 -> q9 : a^13_23\n")
        with pytest.raises(SemanticError):
            formats.parse_automaton_spec(text)

    def test_symbol_with_empty_rear(self):
        sym = formats.parse_symbol("c^1_<>", {"c": 2})
        assert sym.label == "c" and sym.front == (1,) and sym.rear == ()

    def test_blank_symbol(self):
        sym = formats.parse_symbol("<>^2_12", {})
        assert sym.nodes == 2 and sym.rear == (1, 2)

    def test_bracket_form_for_wide_indices(self):
        assert formats.parse_seq("{1,13}") == (1, 13)

    def test_roundtrip_sample(self):
        auto = formats.parse_automaton_spec((SAMPLES / "abc.auto").read_text())
        again = formats.parse_automaton_spec(formats.write_automaton_spec(auto))
        assert again.n_states == auto.n_states
        assert [str(t.sym) for t in again.transitions] == \
               [str(t.sym) for t in auto.transitions]


class TestGraphFile:
    def test_graph_s(self):
        g = formats.parse_graph((SAMPLES / "s.graph").read_text())
        assert iso_check(g, graph_S())

    def test_empty_graph(self):
        g = formats.parse_graph('{"nodes": [], "edges": [], "front": [], "rear": []}')
        assert g.nodes == () and g.edges == ()

    def test_repeated_attachment(self):
        doc = ('{"nodes": [1], "edges": [{"label": "a", "att": [1, 1]}], '
               '"front": [], "rear": []}')
        with pytest.raises(InvariantViolation):
            formats.parse_graph(doc)

    def test_graph_roundtrip_keeps_interfaces(self):
        g = graph_S()
        back = formats.parse_graph(formats.write_graph(g))
        assert back.front == g.front and back.rear == g.rear
        assert [e.label for e in back.edges] == [e.label for e in g.edges]
        assert iso_check(g, back)


class TestDfaFile:
    def test_roundtrip(self, dfas):
        d = dfas["abc"]
        text = formats.write_dfa(d)
        back = formats.read_dfa(text)
        assert back.n_states == d.n_states
        assert back.start == d.start and set(back.final) == set(d.final)
        assert [str(t.sym) for t in back.transitions] == \
               [str(t.sym) for t in d.transitions]
        assert back.certified
        assert formats.write_dfa(back) == text

    def test_uncertified_file_loads_but_linear_refuses(self, dfas, smt):
        d = dfas["abc"]
        stripped = d.with_certificates(False, False)
        back = formats.read_dfa(formats.write_dfa(stripped))
        assert not back.certified
        S, M, T = smt
        from graphfa.model import concat
        with pytest.raises(UncertifiedDfa):
            recognize_linear(back, concat(S, T))

    def test_corrupted_body(self, dfas):
        text = formats.write_dfa(dfas["abc"])
        bad = text.replace("a^13_23", "a^13_32", 1)
        with pytest.raises(ChecksumMismatch):
            formats.read_dfa(bad)

    def test_version_guard(self, dfas):
        text = formats.write_dfa(dfas["abc"])
        bad = text.replace("dfa-format 1", "dfa-format 99", 1)
        with pytest.raises(VersionMismatch):
            formats.read_dfa(bad)


class TestDot:
    def test_abc_dfa(self, dfas):
        dot = formats.export_dot(dfas["abc"])
        assert dot.count("->") >= 8
        # one node statement per state
        for q in range(dfas["abc"].n_states):
            assert dfas["abc"].names[q] in dot

    def test_empty_graph(self):
        g = graph([], [], [], [])
        dot = formats.export_dot(g)
        assert "digraph" in dot

    def test_wheel_six(self):
        g = gen_wheel(6)
        dot = formats.export_dot(g)
        assert dot.count("->") == 12

    def test_hyperedge_rendering(self):
        # rank-3 edges become their own square connector nodes
        g = graph([1, 2, 3], [("s", (1, 2, 3))], front=(1,), rear=())
        dot = formats.export_dot(g)
        assert dot.count("->") == 3


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10**9))
def test_written_graphs_reparse(seed):
    rng = np.random.default_rng(seed)
    from graphfa.model import interpret_string
    g = interpret_string(random_word(rng, {"a": 2, "b": 3}, max_len=4))
    back = formats.parse_graph(formats.write_graph(g))
    assert back.front == g.front and back.rear == g.rear
    assert iso_check(g, back)


@settings(max_examples=120, deadline=None)
@given(text=st.text(max_size=60))
def test_parser_never_panics_on_noise(text):
    for fn in (formats.parse_graph, formats.parse_automaton_spec):
        try:
            fn(text)
        except GraphfaError:
            pass
    try:
        formats.parse_symbol(text, {"a": 2})
    except GraphfaError:
        pass


def test_parse_errors_carry_positions():
    with pytest.raises(ParseError) as exc:
        formats.parse_automaton_spec("symbol a(2)\nstate q0(2)\nstart q0\n???")
    assert "line 4" in str(exc.value)
    with pytest.raises(ParseError) as exc:
        formats.parse_graph("{not json")
    assert "line 1" in str(exc.value)
