"""Static checks that license backtracking-free recognition.

Two properties are decided on a minimized deterministic automaton:

* ts: every state's atom transitions admit a total trial order such that
  whenever the recognizer greedily takes the first transition with a matching
  edge, no accepting run is lost.  The obstacle is a "stray" match: an edge
  that fits transition t1 while the accepting run actually takes t2, in
  which case t1 must be tried after t2.

* fec: for transitions that can defer their own matches (an unread matching
  edge may survive while the run goes around and comes back), the choice
  among candidate edges must not influence the next front interface, which
  holds exactly when the symbol's rear mentions only front nodes.

Strayability is decided by an abstraction that tracks where the stray edge's
bound attachments sit in the front sequence.  Each bound position gets a
mark on its slot; steps move marks (a node that leaves the front kills its
mark and prunes the branch, since fronts never re-acquire a node); the stray
is consumable if some reachable transition with the same label binds every
marked position to its mark's current slot.  The stray's fresh positions are
left unconstrained: its fresh nodes may be encountered along the way and
arrive bound at the consumer, so demanding anything of them would miss real
strays.  A candidate with no bound positions carries no marks at all; the
tracker then cannot tell the stray apart from the edge the run consumes, and
such interchangeable choices are not treated as strays.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, FrozenSet, List, Optional, Sequence, Set, Tuple

from .automaton import Dfa, Transition
from .errors import InternalError, InvariantViolation, ReportMismatch
from .model import AtomSymbol, BlankSymbol


def _step_marks(marks: Dict[int, int], sym: AtomSymbol) -> Optional[Dict[int, int]]:
    """Move marks through one atom step; None if any mark dies.

    A mark on slot s tracks the concrete node there, which the symbol calls
    front[s].  After the step, slot j holds the node the symbol calls
    rear[j]; the mark survives iff its node appears in the rear.
    """
    slot_to_mark = {slot: mark for mark, slot in marks.items()}
    new_marks: Dict[int, int] = {}
    survived: Set[int] = set()
    for j, node in enumerate(sym.rear):
        if node in sym.front:
            old_slot = sym.front.index(node)
            if old_slot in slot_to_mark:
                mark = slot_to_mark[old_slot]
                new_marks[mark] = j
                survived.add(mark)
    if len(survived) != len(marks):
        return None
    return new_marks


def _consumes(sym1: AtomSymbol, marks: Dict[int, int], cand: AtomSymbol) -> bool:
    """Can `cand` read the stray edge matched earlier by `sym1`?

    Only sym1's bound positions constrain the consumer: each must be bound by
    `cand` to the slot its mark now occupies.  Positions fresh at sym1 are
    unconstrained, since their nodes may have entered the front meanwhile.
    """
    if cand.label != sym1.label:
        return False
    cand_front = set(cand.front)
    for pos in marks:
        if pos not in cand_front or cand.front_slot(pos) != marks[pos]:
            return False
    return True


def strayable(dfa: Dfa, i1: int, i2: int) -> bool:
    """Can an edge matching transition i1 stay unread while the run takes
    transition i2, and be consumed in a later step?

    Both transitions must be atoms leaving the same state; i1 == i2 asks
    whether i1 can defer its own match.
    """
    t1, t2 = dfa.transitions[i1], dfa.transitions[i2]
    if t1.src != t2.src:
        raise InvariantViolation("strayable needs transitions with one source")
    if not isinstance(t1.sym, AtomSymbol) or not isinstance(t2.sym, AtomSymbol):
        raise InvariantViolation("strayable is defined on atom transitions")
    sym1 = t1.sym
    marks0 = {pos: sym1.front_slot(pos) for pos in sym1.bound_positions()}
    if not marks0:
        # Nothing distinguishes the candidates: every edge matching sym1 is
        # attached to wholly fresh nodes, so swapping the chosen edge for the
        # "stray" renames unencountered nodes and nothing else.
        return False
    after = _step_marks(marks0, t2.sym)
    if after is None:
        return False

    atoms_from: Dict[int, List[AtomSymbol]] = {}
    succ: Dict[int, List[Tuple[AtomSymbol, int]]] = {}
    for t in dfa.transitions:
        if isinstance(t.sym, AtomSymbol):
            atoms_from.setdefault(t.src, []).append(t.sym)
            succ.setdefault(t.src, []).append((t.sym, t.dst))

    max_rank = max(dfa.ranks, default=0)
    bound = dfa.n_states * max(1, max_rank) ** len(marks0)

    start = (t2.dst, tuple(sorted(after.items())))
    frontier = [start]
    visited = {start}
    while frontier:
        state, mark_items = frontier.pop()
        marks = dict(mark_items)
        for cand in atoms_from.get(state, ()):
            if _consumes(sym1, marks, cand):
                return True
        for sym, dst in succ.get(state, ()):
            moved = _step_marks(marks, sym)
            if moved is None:
                continue
            nxt = (dst, tuple(sorted(moved.items())))
            if nxt not in visited:
                visited.add(nxt)
                if len(visited) > bound:
                    raise InternalError("mark search exceeded its state bound")
                frontier.append(nxt)
    return False


@dataclass
class TsReport:
    """Per-state trial orders, or the precedence cycles blocking them."""

    passed: bool
    order: Dict[int, Tuple[int, ...]]
    constraints: Dict[int, Tuple[Tuple[int, int], ...]]
    cycles: Tuple[Tuple[int, Tuple[int, ...]], ...]
    digest: str

    def render(self, dfa: Dfa) -> str:
        lines = []
        if self.passed:
            lines.append("ts: pass")
            for q in sorted(self.order):
                if len(self.order[q]) > 1:
                    syms = ", ".join(str(dfa.transitions[i].sym) for i in self.order[q])
                    lines.append(f"  {dfa.names[q]}: {syms}")
        else:
            lines.append("ts: fail")
            for q, cycle in self.cycles:
                chain = " -> ".join(str(dfa.transitions[i].sym) for i in cycle)
                lines.append(f"  {dfa.names[q]}: precedence cycle {chain}")
        return "\n".join(lines)


@dataclass
class FecReport:
    """Deferrable transitions and the ones whose rear leaks fresh nodes."""

    passed: bool
    deferrable: Tuple[int, ...]
    failing: Tuple[int, ...]
    digest: str

    def render(self, dfa: Dfa) -> str:
        lines = [f"fec: {'pass' if self.passed else 'fail'}"]
        for i in self.deferrable:
            t = dfa.transitions[i]
            note = ""
            if i in self.failing:
                sym = t.sym
                note = f"  REAR {sym.rear} NOT WITHIN FRONT {sym.front}"
            lines.append(f"  deferrable {dfa.names[t.src]} : {t.sym}{note}")
        return "\n".join(lines)


def ts_check(dfa: Dfa) -> TsReport:
    """Build a safe per-state trial order, or report precedence cycles.

    The constraint t2-before-t1 is emitted whenever an edge matching t1 can
    stray while the run takes t2; greedy trial must then reach t2 first.
    """
    atoms: Dict[int, List[int]] = {}
    for i, t in enumerate(dfa.transitions):
        if isinstance(t.sym, AtomSymbol):
            atoms.setdefault(t.src, []).append(i)

    order: Dict[int, Tuple[int, ...]] = {}
    constraints: Dict[int, Tuple[Tuple[int, int], ...]] = {}
    cycles: List[Tuple[int, Tuple[int, ...]]] = []
    for q, idxs in sorted(atoms.items()):
        pairs = []
        for i1 in idxs:
            for i2 in idxs:
                if i1 != i2 and strayable(dfa, i1, i2):
                    pairs.append((i2, i1))  # i2 must be tried before i1
        constraints[q] = tuple(pairs)
        topo = _stable_topo(idxs, pairs)
        if topo is None:
            cycles.append((q, _find_cycle(idxs, pairs)))
        else:
            order[q] = tuple(topo)
    passed = not cycles
    return TsReport(passed=passed, order=order, constraints=constraints,
                    cycles=tuple(cycles), digest=dfa.digest())


def _stable_topo(items: Sequence[int], pairs: Sequence[Tuple[int, int]]) -> Optional[List[int]]:
    """Topological order preferring the original item order; None on a cycle."""
    after: Dict[int, Set[int]] = {i: set() for i in items}
    indeg: Dict[int, int] = {i: 0 for i in items}
    for before, later in set(pairs):
        if later not in after[before]:
            after[before].add(later)
            indeg[later] += 1
    out: List[int] = []
    ready = [i for i in items if indeg[i] == 0]
    while ready:
        i = ready.pop(0)
        out.append(i)
        for j in sorted(after[i], key=items.index):
            indeg[j] -= 1
            if indeg[j] == 0:
                ready.append(j)
        ready.sort(key=items.index)
    return out if len(out) == len(items) else None


def _find_cycle(items: Sequence[int], pairs: Sequence[Tuple[int, int]]) -> Tuple[int, ...]:
    succ: Dict[int, List[int]] = {i: [] for i in items}
    for before, later in pairs:
        succ[before].append(later)
    color = {i: 0 for i in items}
    stack: List[int] = []

    def dfs(i: int) -> Optional[List[int]]:
        color[i] = 1
        stack.append(i)
        for j in succ[i]:
            if color[j] == 1:
                return stack[stack.index(j):]
            if color[j] == 0:
                found = dfs(j)
                if found is not None:
                    return found
        stack.pop()
        color[i] = 2
        return None

    for i in items:
        if color[i] == 0:
            found = dfs(i)
            if found is not None:
                return tuple(found)
    raise InternalError("no cycle found where the topological sort failed")


def fec_check(dfa: Dfa) -> FecReport:
    """Deferrable transitions must keep the next front independent of the
    chosen edge: their rear may only mention front nodes."""
    deferrable = []
    failing = []
    for i, t in enumerate(dfa.transitions):
        if not isinstance(t.sym, AtomSymbol):
            continue
        if strayable(dfa, i, i):
            deferrable.append(i)
            if not set(t.sym.rear) <= set(t.sym.front):
                failing.append(i)
    return FecReport(passed=not failing, deferrable=tuple(deferrable),
                     failing=tuple(failing), digest=dfa.digest())


def reorder_transitions(dfa: Dfa, ts: TsReport, fec: Optional[FecReport] = None) -> Dfa:
    """Commit the trial order into the transition list and set certificates.

    The reports carry the digest of the automaton they were computed on; a
    report applied to any other automaton (including the reordered result
    itself) is rejected.
    """
    digest = dfa.digest()
    if ts.digest != digest:
        raise ReportMismatch("ts report was computed for a different automaton")
    if fec is not None and fec.digest != digest:
        raise ReportMismatch("fec report was computed for a different automaton")
    if not ts.passed:
        raise InvariantViolation("cannot reorder transitions with a failing ts report")

    new_positions: List[int] = []
    for q in range(dfa.n_states):
        new_positions.extend(ts.order.get(q, ()))
        for i, t in enumerate(dfa.transitions):
            if t.src == q and isinstance(t.sym, BlankSymbol):
                new_positions.append(i)
    if sorted(new_positions) != list(range(len(dfa.transitions))):
        raise ReportMismatch("ts report does not cover this automaton's transitions")
    remap = {old: new for new, old in enumerate(new_positions)}
    deferrable = ()
    cert_fec = False
    if fec is not None:
        deferrable = tuple(sorted(remap[i] for i in fec.deferrable))
        cert_fec = fec.passed
    return Dfa(dfa.vocab, dfa.ranks, dfa.start, dfa.final,
               [dfa.transitions[i] for i in new_positions],
               names=dfa.names, cert_ts=True, cert_fec=cert_fec,
               deferrable=deferrable)
