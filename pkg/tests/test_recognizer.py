"""Both recognizers: the greedy linear pass and the exhaustive search."""

import numpy as np
import pytest

from conftest import SAMPLES, graph_M, graph_S, graph_T
from graphfa import formats
from graphfa.automaton import Transition, TypedAutomaton
from graphfa.engine import GraphArrays
from graphfa.errors import BudgetExhausted, UncertifiedDfa
from graphfa.langs import LANGUAGES, gen_wheel, mutate, sample_members
from graphfa.model import (concat, graph, interpret_string, iso_check,
                           make_atom, make_blank)
from graphfa.recognizer import (apply_symbol, recognize_backtracking,
                                recognize_linear)


def smt_graph(k=1):
    g = graph_S()
    for _ in range(k):
        g = concat(g, graph_M())
    return concat(g, graph_T())


class TestApplySymbol:
    def test_keeps_unbound_front_slot(self):
        sym = make_atom("a", 2, (1, 3), (2, 3))
        assert apply_symbol((1, 4), sym, (1, 2)) == (2, 4)

    def test_extends_front(self):
        sym = make_atom("b", 2, (3, 2), (3, 1, 2))
        assert apply_symbol((2, 4), sym, (3, 4)) == (2, 3, 4)

    def test_blank_projects(self):
        assert apply_symbol((2, 3, 4), make_blank(3, (1, 3))) == (2, 4)


class TestBacktracking:
    def test_accepts_with_witness(self):
        auto = formats.parse_automaton_spec((SAMPLES / "abc.auto").read_text())
        g = smt_graph(1)
        out = recognize_backtracking(auto, g)
        assert out.accepted
        assert len(out.witness.word) == 9
        assert iso_check(interpret_string(out.witness.word), g)

    def test_rejects_non_member(self):
        auto = formats.parse_automaton_spec((SAMPLES / "abc.auto").read_text())
        g = graph([1, 2, 3], [("a", (1, 2)), ("b", (2, 3))],
                  front=(1, 2), rear=(3,))
        out = recognize_backtracking(auto, g)
        assert not out.accepted
        assert out.reason

    def test_discrete_node_precheck(self):
        auto = formats.parse_automaton_spec((SAMPLES / "abc.auto").read_text())
        g = graph([1, 2, 3, 4], [("a", (1, 2))], front=(1, 4), rear=(2,))
        out = recognize_backtracking(auto, g)
        assert not out.accepted
        assert "discrete" in out.reason

    def test_budget_raises_instead_of_answering(self):
        auto = formats.parse_automaton_spec((SAMPLES / "abc.auto").read_text())
        with pytest.raises(BudgetExhausted):
            recognize_backtracking(auto, smt_graph(1), budget=2)

    def test_blank_cycle_terminates(self):
        auto = TypedAutomaton(
            {}, [1, 1], 0, frozenset([1]),
            [Transition(0, make_blank(1, (1,)), 1),
             Transition(1, make_blank(1, (1,)), 0)])
        ok = recognize_backtracking(auto, graph([1], [], front=(1,), rear=(1,)))
        assert ok.accepted
        [blank_step] = ok.witness.word
        assert blank_step.nodes == 1
        bad = recognize_backtracking(
            auto, graph([1, 2], [], front=(1,), rear=(2,)))
        assert not bad.accepted

    def test_unknown_label_is_reject(self):
        auto = formats.parse_automaton_spec((SAMPLES / "abc.auto").read_text())
        g = graph([1, 2], [("z", (1, 2))], front=(1, 2), rear=())
        assert not recognize_backtracking(auto, g).accepted

    def test_wrong_arity_is_reject(self):
        auto = formats.parse_automaton_spec((SAMPLES / "abc.auto").read_text())
        g = graph([1, 2, 3], [("a", (1, 2, 3))], front=(1, 2), rear=(3,))
        assert not recognize_backtracking(auto, g).accepted


class TestLinear:
    def test_accepts_members(self, dfas):
        out = recognize_linear(dfas["abc"], smt_graph(3))
        assert out.accepted
        assert out.n_read == 15
        wheel = recognize_linear(dfas["wheels"], gen_wheel(6))
        assert wheel.accepted
        assert wheel.n_read == 12

    def test_rejects_sample_non_member(self, dfas, nfas):
        g = formats.parse_graph((SAMPLES / "ab.graph").read_text())
        out = recognize_linear(dfas["palindromes"], g)
        assert not out.accepted
        assert not recognize_backtracking(nfas["palindromes"], g).accepted

    def test_uncertified_refused(self, dfas):
        bare = dfas["abc"].with_certificates(False, False)
        with pytest.raises(UncertifiedDfa):
            recognize_linear(bare, smt_graph(1))

    def test_unknown_label_is_reject(self, dfas):
        g = graph([1, 2], [("z", (1, 2))], front=(1, 2), rear=())
        out = recognize_linear(dfas["abc"], g)
        assert not out.accepted
        assert "vocabulary" in out.reason

    def test_wrong_arity_is_reject(self, dfas):
        g = graph([1, 2, 3], [("a", (1, 2, 3))], front=(1, 2), rear=(3,))
        out = recognize_linear(dfas["abc"], g)
        assert not out.accepted
        assert "arity" in out.reason

    def test_front_arity_mismatch_is_reject(self, dfas):
        g = graph([1, 2], [("a", (1, 2))], front=(1,), rear=(2,))
        out = recognize_linear(dfas["abc"], g)
        assert not out.accepted

    def test_witnesses_sound(self, dfas):
        for name in LANGUAGES:
            for g in sample_members(name, max_edges=16, seed=5)[:4]:
                out = recognize_linear(dfas[name], g)
                assert out.accepted, name
                assert iso_check(interpret_string(out.witness.word), g), name

    def test_accepts_imply_backtracking_accepts(self, dfas, nfas):
        for name in LANGUAGES:
            for g in sample_members(name, max_edges=14, seed=8)[:3]:
                lin = recognize_linear(dfas[name], g)
                assert lin.accepted
                assert lin.n_read == len(g.edges)
                assert recognize_backtracking(nfas[name], g).accepted

    def test_shuffle_invariance(self, dfas):
        d = dfas["spikes"]
        member = sample_members("spikes", max_edges=20, seed=12)[-1]
        arrays = GraphArrays.from_graph(member)
        rng = np.random.default_rng(2)
        bad = None
        while bad is None:
            bad = mutate(member, rng, LANGUAGES["spikes"].vocab)
            if bad is not None and recognize_linear(d, bad).accepted:
                bad = None
        bad_arrays = GraphArrays.from_graph(bad)
        for seed in range(20):
            ok = recognize_linear(d, arrays.shuffled(seed))
            assert ok.accepted and ok.n_read == arrays.n_edges
            assert not recognize_linear(d, bad_arrays.shuffled(seed)).accepted

    def test_trace_replays_cleanly(self, dfas):
        g = smt_graph(1)
        out = recognize_linear(dfas["abc"], g, want_trace=True)
        assert out.accepted
        assert len(out.trace) == 9
        assert sorted(s.edge for s in out.trace) == list(range(9))
        front = tuple(g.front)
        for i, step in enumerate(out.trace):
            assert step.step == i
            att = g.edges[step.edge].att if step.edge is not None else None
            front = apply_symbol(front, step.sym, att)
            assert step.front == front
        assert out.trace[-1].state in dfas["abc"].final
        assert out.trace[-1].front == tuple(g.rear)
