"""Graph recognizers.

Two entry points with the same accept/reject semantics:

- recognize_linear: single greedy pass driven by a certified deterministic
  automaton, using the array engines.  Refuses uncertified automata.
- recognize_backtracking: exhaustive search over any typed automaton.  Slower,
  but makes no use of certificates; serves as the semantic oracle.

Both return an Outcome carrying a witness word on acceptance: a symbol
sequence whose interpretation is isomorphic to the input graph.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional, Tuple, Union

import numpy as np

from .automaton import Dfa, Transition, TypedAutomaton
from .engine import GraphArrays, align, plan_for, run as engine_run
from .errors import BudgetExhausted, InvariantViolation, UncertifiedDfa
from .model import AtomSymbol, BlankSymbol, Graph, Symbol

DEFAULT_BUDGET = 10_000_000


@dataclass(frozen=True)
class WitnessStep:
    """One symbol of the witness word; `edge` is the consumed edge's index."""

    sym: Symbol
    edge: Optional[int]


@dataclass(frozen=True)
class Witness:
    steps: Tuple[WitnessStep, ...]

    @property
    def word(self) -> Tuple[Symbol, ...]:
        return tuple(s.sym for s in self.steps)

    @property
    def text(self) -> str:
        return " ".join(s.sym.text for s in self.steps)

    def __len__(self) -> int:
        return len(self.steps)


@dataclass(frozen=True)
class TraceStep:
    """State and front after consuming `sym` (edge index or None for blanks)."""

    step: int
    state: int
    sym: Symbol
    edge: Optional[int]
    front: tuple


@dataclass
class Outcome:
    accepted: bool
    reason: str = ""
    witness: Optional[Witness] = None
    trace: Optional[Tuple[TraceStep, ...]] = None
    n_read: int = 0
    build_s: float = 0.0
    exec_s: float = 0.0

    def __bool__(self) -> bool:
        return self.accepted


def apply_symbol(front: tuple, sym: Symbol, att: Optional[tuple] = None) -> tuple:
    """Next front after reading `sym`; `att` is the consumed edge's attachment."""
    if isinstance(sym, BlankSymbol):
        return tuple(front[r - 1] for r in sym.rear)
    if len(front) != len(sym.front):
        raise InvariantViolation(
            f"front arity {len(front)} does not match symbol {sym}")
    out = []
    for r in sym.rear:
        if r in sym.front:
            out.append(front[sym.front_slot(r)])
        else:
            out.append(att[r - 1])
    return tuple(out)


def _edge_matches(front: tuple, sym: AtomSymbol, att: tuple, encountered: set) -> bool:
    for p in sym.bound_positions():
        if att[p - 1] != front[sym.front_slot(p)]:
            return False
    for p in sym.fresh_positions():
        if att[p - 1] in encountered:
            return False
    return True


def _precheck(auto: TypedAutomaton, g: Graph) -> Optional[str]:
    """Cheap necessary conditions; a string reason means certain rejection."""
    for e in g.edges:
        rank = auto.vocab.get(e.label)
        if rank is None:
            return f"label {e.label!r} is not in the vocabulary"
        if rank != len(e.att):
            return f"edge {e.label}{e.att} has arity {len(e.att)}, expected {rank}"
    if len(g.front) != auto.ranks[auto.start]:
        return (f"graph front arity {len(g.front)} does not match the "
                f"start state rank {auto.ranks[auto.start]}")
    loose = g.discrete_nodes() - set(g.front)
    if loose:
        return f"discrete node {sorted(loose, key=repr)[0]!r} is outside the front"
    return None


# -- linear recognizer -------------------------------------------------------


def recognize_linear(dfa: Dfa, g: Union[Graph, GraphArrays], mode: str = "efficient",
                     engine: Optional[str] = None, audit: bool = False,
                     want_trace: bool = False, want_witness: bool = True) -> Outcome:
    """One greedy pass over the edges; linear in the graph size.

    Sound and complete only for automata carrying both certificates, so
    anything uncertified is refused with UncertifiedDfa.
    """
    if not isinstance(dfa, Dfa):
        raise InvariantViolation("the linear recognizer needs a deterministic automaton")
    if not dfa.certified:
        raise UncertifiedDfa(
            "linear recognition needs a certified automaton; run the ordering "
            "and free-edge checks first or use the backtracking recognizer")
    if isinstance(g, GraphArrays):
        arrays = g
        graph_obj = None
    else:
        graph_obj = g
        arrays = GraphArrays.from_graph(g)

    reason = _arrays_precheck(dfa, arrays)
    if reason is not None:
        return Outcome(False, reason=reason)

    plan = plan_for(dfa)
    aligned = align(plan, arrays)
    if aligned is None:
        return Outcome(False, reason="graph uses labels outside the automaton vocabulary")

    raw = engine_run(plan, aligned, mode=mode, engine=engine, audit=audit)

    n_edges = aligned.n_edges
    steps: List[WitnessStep] = []
    if want_witness or want_trace:
        for i in range(raw.n_read):
            t = dfa.transitions[plan.t_dfa[raw.taken[i]]]
            steps.append(WitnessStep(sym=t.sym, edge=int(raw.edges[i])))
    state = raw.state
    front = raw.front

    accepted = False
    if raw.n_read == n_edges:
        if state in dfa.final and _front_eq(front, aligned.rear):
            accepted = True
        else:
            for _, t in dfa.blank_out(state):
                if t.dst not in dfa.final:
                    continue
                remapped = np.array([front[r - 1] for r in t.sym.rear], dtype=np.int64)
                if _front_eq(remapped, aligned.rear):
                    steps.append(WitnessStep(sym=t.sym, edge=None))
                    state = t.dst
                    front = remapped
                    accepted = True
                    break

    if not accepted:
        if raw.n_read < n_edges:
            reason = (f"stuck after {raw.n_read} of {n_edges} edges: no transition "
                      f"of state {dfa.names[state]} matches an unread edge")
        else:
            reason = "all edges read but the final state or rear interface check failed"
        return Outcome(False, reason=reason, n_read=raw.n_read,
                       build_s=raw.build_s, exec_s=raw.exec_s)

    witness = Witness(steps=tuple(steps)) if (want_witness or want_trace) else None
    trace = _replay_trace(dfa, aligned, witness) if want_trace else None
    if not want_witness:
        witness = None
    return Outcome(True, witness=witness, trace=trace, n_read=raw.n_read,
                   build_s=raw.build_s, exec_s=raw.exec_s)


def _front_eq(front: np.ndarray, rear: np.ndarray) -> bool:
    return len(front) == len(rear) and bool(np.array_equal(
        np.asarray(front, dtype=np.int64), np.asarray(rear, dtype=np.int64)))


def _arrays_precheck(auto: TypedAutomaton, arrays: GraphArrays) -> Optional[str]:
    for i, label in enumerate(arrays.labels):
        rank = auto.vocab.get(label)
        if rank is not None and rank != int(arrays.lab_rank[i]):
            if np.any(arrays.e_label == i):
                return (f"label {label!r} used with arity {int(arrays.lab_rank[i])}, "
                        f"expected {rank}")
    if len(arrays.front) != auto.ranks[auto.start]:
        return (f"graph front arity {len(arrays.front)} does not match the "
                f"start state rank {auto.ranks[auto.start]}")
    touched = np.zeros(arrays.n_nodes, dtype=bool)
    if arrays.n_edges:
        ranks = arrays.lab_rank[arrays.e_label]
        for p in range(arrays.e_att.shape[1]):
            touched[arrays.e_att[ranks > p, p]] = True
    touched[arrays.front] = True
    if not touched.all():
        v = int(np.flatnonzero(~touched)[0])
        name = arrays.node_ids[v] if arrays.node_ids is not None else v + 1
        return f"discrete node {name!r} is outside the front"
    return None


def _replay_trace(dfa: Dfa, arrays: GraphArrays, witness: Witness) -> Tuple[TraceStep, ...]:
    """Re-derive the front sequence symbol by symbol, in original node ids."""
    def orig(v: int):
        return arrays.node_ids[v] if arrays.node_ids is not None else v + 1

    by_key = {}
    for i, t in enumerate(dfa.transitions):
        by_key[(t.src, t.sym)] = t
    state = dfa.start
    front = tuple(orig(int(v)) for v in arrays.front)
    out: List[TraceStep] = []
    for i, step in enumerate(witness.steps):
        t = by_key[(state, step.sym)]
        att = None
        if step.edge is not None:
            e = step.edge
            r = int(arrays.lab_rank[arrays.e_label[e]])
            att = tuple(orig(int(arrays.e_att[e, p])) for p in range(r))
        front = apply_symbol(front, step.sym, att)
        state = t.dst
        out.append(TraceStep(step=i, state=state, sym=step.sym,
                             edge=step.edge, front=front))
    return tuple(out)


# -- backtracking recognizer -------------------------------------------------


@dataclass
class _Frame:
    state: int
    front: tuple
    blanks: frozenset
    alts: list
    pos: int = 0
    entry: Optional[tuple] = None  # (transition, edge_id, newly encountered nodes)


def recognize_backtracking(auto: TypedAutomaton, g: Graph,
                           budget: int = DEFAULT_BUDGET,
                           want_trace: bool = False) -> Outcome:
    """Exhaustive search for a witness word; works on any typed automaton.

    Transitions are tried in list order and candidate edges in ascending
    index order.  Between two edge consumptions each blank transition is
    followed at most once, which keeps blank cycles finite.  A search that
    exceeds `budget` expansions raises BudgetExhausted instead of answering.
    """
    reason = _precheck(auto, g)
    if reason is not None:
        return Outcome(False, reason=reason)

    n_edges = len(g.edges)
    rear = tuple(g.rear)
    read = [False] * n_edges
    encountered = set(g.front)
    n_read = 0
    spent = 0

    def accepting(state: int, front: tuple) -> bool:
        return n_read == n_edges and state in auto.final and front == rear

    def expand(state: int, front: tuple, blanks: frozenset) -> list:
        alts = []
        for idx, t in auto.out(state):
            sym = t.sym
            if isinstance(sym, AtomSymbol):
                for e_id in range(n_edges):
                    if read[e_id]:
                        continue
                    e = g.edges[e_id]
                    if e.label == sym.label and _edge_matches(
                            front, sym, e.att, encountered):
                        alts.append((t, e_id))
            elif idx not in blanks:
                alts.append((t, idx))
        return alts

    start_front = tuple(g.front)
    if accepting(auto.start, start_front):
        return Outcome(True, witness=Witness(steps=()), n_read=0)
    frames: List[_Frame] = [
        _Frame(auto.start, start_front, frozenset(), expand(auto.start, start_front, frozenset()))
    ]

    while frames:
        fr = frames[-1]
        if fr.pos >= len(fr.alts):
            frames.pop()
            if fr.entry is not None:
                t, e_id, added = fr.entry
                if e_id is not None:
                    read[e_id] = False
                    n_read -= 1
                encountered.difference_update(added)
            continue
        t, choice = fr.alts[fr.pos]
        fr.pos += 1
        spent += 1
        if spent > budget:
            raise BudgetExhausted(
                f"backtracking search exceeded its budget of {budget} expansions")

        if isinstance(t.sym, AtomSymbol):
            e_id = choice
            att = g.edges[e_id].att
            new_front = apply_symbol(fr.front, t.sym, att)
            added = [att[p - 1] for p in t.sym.fresh_positions()
                     if att[p - 1] not in encountered]
            read[e_id] = True
            n_read += 1
            encountered.update(added)
            blanks = frozenset()
            entry = (t, e_id, added)
        else:
            new_front = apply_symbol(fr.front, t.sym)
            blanks = fr.blanks | {choice}
            entry = (t, None, ())

        if accepting(t.dst, new_front):
            steps = []
            trace = []
            for f in frames[1:]:
                et, ee, _ = f.entry
                steps.append(WitnessStep(sym=et.sym, edge=ee))
                trace.append(TraceStep(step=len(trace), state=f.state,
                                       sym=et.sym, edge=ee, front=f.front))
            steps.append(WitnessStep(sym=t.sym, edge=entry[1]))
            trace.append(TraceStep(step=len(trace), state=t.dst, sym=t.sym,
                                   edge=entry[1], front=new_front))
            return Outcome(True, witness=Witness(steps=tuple(steps)),
                           trace=tuple(trace) if want_trace else None,
                           n_read=n_read)

        frames.append(_Frame(t.dst, new_front, blanks,
                             expand(t.dst, new_front, blanks), entry=entry))

    return Outcome(False, reason="search space exhausted without finding a witness",
                   n_read=0)


def recognize(auto: TypedAutomaton, g: Union[Graph, GraphArrays],
              mode: str = "efficient", **kw) -> Outcome:
    """Dispatch on mode: efficient, simple, or backtracking."""
    if mode == "backtracking":
        if isinstance(g, GraphArrays):
            g = g.to_graph()
        return recognize_backtracking(auto, g, **kw)
    return recognize_linear(auto, g, mode=mode, **kw)
