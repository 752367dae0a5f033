"""Pure-Python run kernels: the reference implementation of the greedy loop.

Same algorithm as the numba kernels, written over the index classes.  With
audit on, the run additionally asserts the step invariants (front sequence
repetition-free, within encountered nodes, never re-admitting a departed
node) and rescans the index invariant every thousand events.
"""

from __future__ import annotations

import time

import numpy as np

from .engine import GraphArrays, Plan, RawRun
from .errors import InternalError
from .index import EdgeIndex, SimpleIndex

AUDIT_EVERY = 1000


def run_efficient(plan: Plan, arrays: GraphArrays, audit: bool = False) -> RawRun:
    t0 = time.perf_counter()
    idx = EdgeIndex(plan, arrays)
    t1 = time.perf_counter()
    out = _loop(plan, arrays, idx, audit)
    t2 = time.perf_counter()
    return _finish(out, t1 - t0, t2 - t1)


def run_simple(plan: Plan, arrays: GraphArrays, audit: bool = False) -> RawRun:
    t0 = time.perf_counter()
    idx = SimpleIndex(plan, arrays)
    t1 = time.perf_counter()
    out = _loop(plan, arrays, idx, audit)
    t2 = time.perf_counter()
    return _finish(out, t1 - t0, t2 - t1)


def _finish(out, build_s: float, exec_s: float) -> RawRun:
    state, front, n, taken, edges = out
    return RawRun(state=state, front=front, n_read=n, taken=taken[:n],
                  edges=edges[:n], build_s=build_s, exec_s=exec_s)


def _loop(plan: Plan, arrays: GraphArrays, idx, audit: bool):
    n_edges = arrays.n_edges
    taken = np.full(n_edges, -1, dtype=np.int32)
    edges = np.full(n_edges, -1, dtype=np.int32)
    state = plan.start
    front = arrays.front.astype(np.int64)
    idx.front = front
    departed = set()
    events = 0
    last_audit = 0
    n = 0
    while True:
        took = -1
        edge = -1
        for k in range(int(plan.t_off[state]), int(plan.t_off[state + 1])):
            edge = idx.lookup(k)
            if edge >= 0:
                took = k
                break
        if took < 0:
            break
        taken[n] = took
        edges[n] = edge
        idx.on_read(edge)
        events += 1
        for i in range(int(plan.f_off[took]), int(plan.f_off[took + 1])):
            idx.on_encounter(int(arrays.e_att[edge, plan.f_pos[i]]))
            events += 1
        r0, r1 = int(plan.r_off[took]), int(plan.r_off[took + 1])
        new_front = np.empty(r1 - r0, dtype=np.int64)
        for j in range(r1 - r0):
            src = int(plan.r_src[r0 + j])
            new_front[j] = front[src] if src >= 0 else arrays.e_att[edge, -src - 1]
        state = int(plan.t_target[took])
        if audit:
            _check_step(plan, idx, state, front, new_front, departed)
            if events - last_audit >= AUDIT_EVERY:
                idx.audit()
                last_audit = events
        front = new_front
        idx.front = front
        n += 1
    if audit:
        idx.audit()
    if idx.unlinks > n_edges * max(1, plan.n_sigs):
        raise InternalError("index maintenance exceeded its linear budget")
    return state, front, n, taken, edges


def _check_step(plan: Plan, idx, state: int, front, new_front, departed: set) -> None:
    vals = [int(v) for v in new_front]
    if len(set(vals)) != len(vals):
        raise InternalError("front sequence acquired a repeated node")
    if len(vals) != int(plan.ranks[state]):
        raise InternalError("front arity disagrees with the state rank")
    for v in vals:
        if not idx.enc[v]:
            raise InternalError("front holds an unencountered node")
        if v in departed:
            raise InternalError("a node that left the front came back")
    departed.update(int(v) for v in front)
    departed.difference_update(vals)
