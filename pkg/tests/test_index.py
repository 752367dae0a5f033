"""Candidate-edge lookup structures behind the linear recognizer."""

import numpy as np
import pytest

from conftest import graph_S, graph_T
from graphfa.engine import GraphArrays, align, plan_for, run
from graphfa.errors import InternalError
from graphfa.index import EdgeIndex, SimpleIndex
from graphfa.langs import LANGUAGES, sample_members
from graphfa.model import concat, graph


def aligned(plan, g):
    arrays = align(plan, GraphArrays.from_graph(g))
    assert arrays is not None
    return arrays


def start_slot(plan):
    return int(plan.t_off[plan.start])


def predicate_holds(plan, arrays, idx, k, e):
    """The lookup contract for edge e at transition slot k, checked directly."""
    if idx.read[e]:
        return False
    for i in range(int(plan.b_off[k]), int(plan.b_off[k + 1])):
        if arrays.e_att[e, plan.b_pos[i]] != idx.front[plan.b_slot[i]]:
            return False
    for i in range(int(plan.f_off[k]), int(plan.f_off[k + 1])):
        if idx.enc[arrays.e_att[e, plan.f_pos[i]]]:
            return False
    return True


@pytest.mark.parametrize("cls", [SimpleIndex, EdgeIndex])
class TestLookupContract:
    def test_start_edge_found(self, dfas, cls):
        plan = plan_for(dfas["abc"])
        arrays = aligned(plan, concat(graph_S(), graph_T()))
        idx = cls(plan, arrays)
        idx.front = arrays.front.astype(np.int64)
        k = start_slot(plan)
        e = idx.lookup(k)
        assert e == 0
        assert predicate_holds(plan, arrays, idx, k, e)

    def test_exhausted_candidate(self, dfas, cls):
        plan = plan_for(dfas["abc"])
        arrays = aligned(plan, concat(graph_S(), graph_T()))
        idx = cls(plan, arrays)
        idx.front = arrays.front.astype(np.int64)
        k = start_slot(plan)
        idx.on_read(idx.lookup(k))
        assert idx.lookup(k) == -1
        idx.audit()

    def test_absent_key(self, dfas, cls):
        plan = plan_for(dfas["abc"])
        arrays = aligned(plan, concat(graph_S(), graph_T()))
        idx = cls(plan, arrays)
        idx.front = arrays.front.astype(np.int64)[::-1].copy()
        assert idx.lookup(start_slot(plan)) == -1

    def test_empty_graph(self, dfas, cls):
        plan = plan_for(dfas["wheels"])
        arrays = aligned(plan, graph([], [], front=(), rear=()))
        idx = cls(plan, arrays)
        idx.front = np.array([], dtype=np.int64)
        assert idx.lookup(start_slot(plan)) == -1
        idx.audit()

    def test_double_read_raises(self, dfas, cls):
        plan = plan_for(dfas["abc"])
        idx = cls(plan, aligned(plan, concat(graph_S(), graph_T())))
        idx.on_read(2)
        with pytest.raises(InternalError):
            idx.on_read(2)

    def test_double_encounter_raises(self, dfas, cls):
        plan = plan_for(dfas["abc"])
        idx = cls(plan, aligned(plan, concat(graph_S(), graph_T())))
        idx.on_encounter(1)
        with pytest.raises(InternalError):
            idx.on_encounter(1)

    def test_audit_after_events(self, dfas, cls):
        plan = plan_for(dfas["spikes"])
        member = sample_members("spikes", max_edges=12, seed=2)[0]
        arrays = aligned(plan, member)
        idx = cls(plan, arrays)
        idx.front = arrays.front.astype(np.int64)
        idx.audit()
        e = -1
        for k in range(int(plan.t_off[plan.start]), int(plan.t_off[plan.start + 1])):
            e = idx.lookup(k)
            if e >= 0:
                break
        assert e >= 0
        idx.on_read(e)
        fresh = [int(v) for v in arrays.e_att[e]
                 if v >= 0 and not idx.enc[int(v)]]
        for v in fresh:
            idx.on_encounter(v)
        idx.audit()


class TestEdgeIndexInternals:
    def test_capacity_bound(self, dfas):
        plan = plan_for(dfas["spikes"])
        for member in sample_members("spikes", max_edges=16, seed=4)[:4]:
            arrays = aligned(plan, member)
            idx = EdgeIndex(plan, arrays)
            n = arrays.n_edges
            assert int(idx.tb_off[-1]) <= (4 * n + 2) * plan.n_sigs

    def test_emptied_bucket_stays_probeable(self, dfas):
        # a claimed cell keeps its key after its list empties, so a later
        # probe for the same key stops there instead of walking past it
        plan = plan_for(dfas["abc"])
        arrays = aligned(plan, concat(graph_S(), graph_T()))
        idx = EdgeIndex(plan, arrays)
        idx.front = arrays.front.astype(np.int64)
        k = start_slot(plan)
        e = idx.lookup(k)
        idx.on_read(e)
        assert idx.lookup(k) == -1
        assert any(key is not None for key in idx.cell_keys)
        idx.audit()

    def test_encounter_prunes_free_position_buckets(self, dfas):
        plan = plan_for(dfas["abc"])
        arrays = aligned(plan, concat(graph_S(), graph_T()))
        idx = EdgeIndex(plan, arrays)
        idx.front = arrays.front.astype(np.int64)
        k = start_slot(plan)
        target = idx.lookup(k)
        # encountering the candidate's free node evicts it without a read
        free = [int(arrays.e_att[target, int(p)])
                for p in plan.f_pos[int(plan.f_off[k]):int(plan.f_off[k + 1])]]
        for v in free:
            idx.on_encounter(v)
        assert idx.lookup(k) != target
        idx.audit()


class TestEngineAuditRuns:
    def test_modes_agree_on_members(self, dfas):
        for name in LANGUAGES:
            plan = plan_for(dfas[name])
            for member in sample_members(name, max_edges=18, seed=3)[:3]:
                arrays = aligned(plan, member)
                eff = run(plan, arrays, mode="efficient", engine="python", audit=True)
                sim = run(plan, arrays, mode="simple", engine="python", audit=True)
                assert eff.state == sim.state
                assert eff.n_read == sim.n_read == arrays.n_edges
                assert np.array_equal(eff.front, sim.front)

    def test_linear_unlink_budget(self, dfas):
        plan = plan_for(dfas["spikes"])
        member = sample_members("spikes", max_edges=24, seed=6)[-1]
        arrays = aligned(plan, member)
        idx = EdgeIndex(plan, arrays)
        idx.front = arrays.front.astype(np.int64)
        state = plan.start
        # greedy run by hand, counting unlinks against the linear budget
        while True:
            took, edge = -1, -1
            for k in range(int(plan.t_off[state]), int(plan.t_off[state + 1])):
                edge = idx.lookup(k)
                if edge >= 0:
                    took = k
                    break
            if took < 0:
                break
            idx.on_read(edge)
            for i in range(int(plan.f_off[took]), int(plan.f_off[took + 1])):
                idx.on_encounter(int(arrays.e_att[edge, plan.f_pos[i]]))
            r0, r1 = int(plan.r_off[took]), int(plan.r_off[took + 1])
            new_front = np.empty(r1 - r0, dtype=np.int64)
            for j in range(r1 - r0):
                src = int(plan.r_src[r0 + j])
                new_front[j] = idx.front[src] if src >= 0 else arrays.e_att[edge, -src - 1]
            idx.front = new_front
            state = int(plan.t_target[took])
        assert idx.unlinks <= arrays.n_edges * max(1, plan.n_sigs)
