"""From a typed NFA to a minimized deterministic automaton.

The chain is: disambiguation (rewrite rear-interface conflicts into canonical
atoms followed by blank transitions, then eliminate every blank that is not a
terminal step into a final sink), a powerset construction that must end up
with at most one atom transition per (state, label, front), and Hopcroft
minimization with the initial partition refined by state rank.

Disambiguation is conflict-driven: only atoms that actually collide on
(source, label, front) with different rears are split.  Splitting everything
up front would both blow up cyclic automata (each round of blank elimination
through a loop mints fresh front-only nodes) and produce non-minimal results,
so the powerset step reports any conflict it still finds and the driver feeds
those (label, front) pairs back into another disambiguation round.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Set, Tuple

from .automaton import Dfa, Transition, TypedAutomaton
from .errors import (InternalError, InvariantViolation, MixedRankSubset,
                     SubsetConflict)
from .model import (AtomSymbol, BlankSymbol, Symbol, interpret,
                    interpret_string, iso_check, make_atom, make_blank)

_COMPOSE_CAP = 100_000


def compose_blank_blank(b1: BlankSymbol, b2: BlankSymbol) -> BlankSymbol:
    """The single blank denoting the concatenation of two blanks."""
    if len(b1.rear) != b2.size:
        raise InvariantViolation(
            f"cannot compose {b1} with {b2}: arity {len(b1.rear)} vs {b2.size}")
    return make_blank(b1.size, tuple(b1.rear[i - 1] for i in b2.rear))


def compose_blank_atom(b: BlankSymbol, a: AtomSymbol) -> AtomSymbol:
    """The single atom denoting a blank followed by an atom.

    The atom's edge keeps attachment numbers 1..rank.  Blank nodes that the
    atom's front does not identify with an edge node become front-only nodes,
    numbered above the rank in order of first appearance in the new front.
    """
    if len(b.rear) != len(a.front):
        raise InvariantViolation(
            f"cannot compose {b} with {a}: arity {len(b.rear)} vs {len(a.front)}")
    # blank node -> atom edge node, where the interfaces identify them
    to_edge: Dict[int, int] = {}
    for k, i in enumerate(b.rear):
        if a.front[k] <= a.rank:
            to_edge[i] = a.front[k]
    new_front: List[int] = []
    fresh: Dict[int, int] = {}
    next_fresh = a.rank + 1
    for i in range(1, b.size + 1):
        if i in to_edge:
            new_front.append(to_edge[i])
        else:
            fresh[i] = next_fresh
            new_front.append(next_fresh)
            next_fresh += 1
    # atom front-only node -> the blank node bound to it -> its new number
    front_only = {a.front[k]: b.rear[k] for k in range(len(a.front))
                  if a.front[k] > a.rank}
    new_rear: List[int] = []
    for j in a.rear:
        if j <= a.rank:
            new_rear.append(j)
        else:
            blank_node = front_only[j]
            new_rear.append(to_edge.get(blank_node) or fresh[blank_node])
    return make_atom(a.label, a.rank, new_front, new_rear)


def compose(b: BlankSymbol, x: Symbol) -> Symbol:
    if isinstance(x, BlankSymbol):
        return compose_blank_blank(b, x)
    return compose_blank_atom(b, x)


def split_atom(sym: AtomSymbol) -> Tuple[AtomSymbol, BlankSymbol]:
    """Rewrite an atom into a canonical-rear atom plus a blank.

    The node count is determined by (label, front) alone, so every atom in a
    conflict group splits to the same canonical atom shape.
    """
    n = sym.nodes
    canon = make_atom(sym.label, sym.rank, sym.front, tuple(range(1, n + 1)))
    blank = make_blank(n, sym.rear)
    if not iso_check(interpret_string([canon, blank]), interpret(sym)):
        raise InternalError(f"split of {sym} does not preserve its graph")
    return canon, blank


class _Rewriter:
    """Mutable automaton view used during disambiguation."""

    def __init__(self, auto: TypedAutomaton):
        self.vocab = dict(auto.vocab)
        self.ranks = list(auto.ranks)
        self.final = set(auto.final)
        self.start = auto.start
        self.alive: Dict[Tuple[int, Symbol, int], bool] = {}
        self.out: List[Set[Tuple[int, Symbol, int]]] = [set() for _ in auto.ranks]
        self.blanks_into: List[Set[Tuple[int, Symbol, int]]] = [set() for _ in auto.ranks]
        self.order: List[Tuple[int, Symbol, int]] = []
        self._sink_by_rank: Dict[int, int] = {}
        for t in auto.transitions:
            self.add(t.src, t.sym, t.dst)

    def add(self, src: int, sym: Symbol, dst: int) -> bool:
        """Make the transition live; True if it was not live before."""
        key = (src, sym, dst)
        if self.alive.get(key):
            return False
        if key not in self.alive:
            self.order.append(key)
        self.alive[key] = True
        self.out[src].add(key)
        if isinstance(sym, BlankSymbol):
            self.blanks_into[dst].add(key)
        return True

    def remove(self, key: Tuple[int, Symbol, int]) -> None:
        if self.alive.get(key):
            self.alive[key] = False
            self.out[key[0]].discard(key)
            if isinstance(key[1], BlankSymbol):
                self.blanks_into[key[2]].discard(key)

    def new_state(self, rank: int, final: bool = False) -> int:
        self.ranks.append(rank)
        self.out.append(set())
        self.blanks_into.append(set())
        if final:
            self.final.add(len(self.ranks) - 1)
        return len(self.ranks) - 1

    def sink(self, rank: int) -> int:
        if rank not in self._sink_by_rank:
            self._sink_by_rank[rank] = self.new_state(rank, final=True)
        return self._sink_by_rank[rank]

    def is_terminal_blank_target(self, q: int) -> bool:
        return q in self.final and not self.out[q]

    def eliminate_blanks(self) -> None:
        """Saturate blank compositions, then drop every internal blank.

        Saturation: for every live blank q -> r and every outgoing transition
        of r with symbol x, the composed transition q -> target(x) is live;
        if r is final and has outgoing transitions, a copy of the blank into
        a fresh final sink is live too.  Removal happens only afterwards, so
        no blank ever misses a transition added later in the same pass.

        A blank is internal when its target has outgoing transitions or is a
        non-final dead end.  Blanks into a final state without outgoing
        transitions stay; they are the terminal steps the recognizer checks
        at the end of a run.
        """
        work = [k for k in self.order
                if self.alive.get(k) and isinstance(k[1], BlankSymbol)]
        budget = _COMPOSE_CAP
        while work:
            key = work.pop()
            if not self.alive.get(key):
                continue
            q, blank, r = key
            if not self.out[r]:
                continue
            for other in list(self.out[r]):
                _, x, s = other
                budget -= 1
                if budget < 0:
                    raise InternalError("blank elimination did not converge")
                composed = compose(blank, x)
                if self.add(q, composed, s):
                    if isinstance(composed, BlankSymbol):
                        work.append((q, composed, s))
                    # q gained an outgoing transition: blanks into q must
                    # compose with it on a later visit
                    work.extend(self.blanks_into[q])
            if r in self.final:
                sink = self.sink(self.ranks[r])
                if self.add(q, blank, sink):
                    work.extend(self.blanks_into[q])
        for key in list(self.order):
            if not self.alive.get(key) or not isinstance(key[1], BlankSymbol):
                continue
            q, blank, r = key
            if self.out[r] or r not in self.final:
                self.remove(key)

    def split_conflicts(self, force: Set[Tuple[str, tuple]]) -> bool:
        """Split every atom in a (source, label, front) conflict group with
        more than one rear, and every atom whose (label, front) is forced."""
        groups: Dict[Tuple[int, str, tuple], List[Tuple[int, Symbol, int]]] = {}
        for key in self.order:
            if self.alive.get(key) and isinstance(key[1], AtomSymbol):
                sym = key[1]
                groups.setdefault((key[0], sym.label, sym.front), []).append(key)
        to_split = []
        for (_, label, front), members in groups.items():
            rears = {k[1].rear for k in members}
            if len(rears) > 1 or (label, front) in force:
                to_split.extend(members)
        did = 0
        for key in to_split:
            q, sym, r = key
            n = sym.nodes
            if sym.rear == tuple(range(1, n + 1)):
                continue  # already canonical; nothing to move into a blank
            canon, blank = split_atom(sym)
            mid = self.new_state(n)
            self.remove(key)
            self.add(q, canon, mid)
            self.add(mid, blank, r)
            did += 1
        return did > 0

    def to_automaton(self) -> TypedAutomaton:
        """Reachable part, renumbered in first-seen order."""
        rank_of_key = {key: i for i, key in enumerate(self.order)}
        keep: List[int] = []
        seen = {self.start}
        queue = [self.start]
        while queue:
            q = queue.pop(0)
            keep.append(q)
            for key in sorted(self.out[q], key=rank_of_key.get):
                dst = key[2]
                if dst not in seen:
                    seen.add(dst)
                    queue.append(dst)
        index = {q: i for i, q in enumerate(keep)}
        transitions = [Transition(index[src], sym, index[dst])
                       for (src, sym, dst) in self.order
                       if self.alive.get((src, sym, dst)) and src in index and dst in index]
        return TypedAutomaton(self.vocab, [self.ranks[q] for q in keep],
                              index[self.start],
                              {index[q] for q in self.final if q in index},
                              transitions,
                              names=[f"q{i}" for i in range(len(keep))])


def disambiguate(auto: TypedAutomaton,
                 force_split: Iterable[Tuple[str, tuple]] = ()) -> TypedAutomaton:
    """Resolve rear-interface conflicts and internal blanks.

    Output invariants: no state has two atom transitions sharing (label,
    front) with different rears; blank transitions only enter final states
    without outgoing transitions.
    """
    rw = _Rewriter(auto)
    force = set(force_split)
    rw.eliminate_blanks()
    for _ in range(100):
        if not rw.split_conflicts(force):
            return rw.to_automaton()
        force = set()  # forced pairs are canonical after one split round
        rw.eliminate_blanks()
    raise InternalError("disambiguation did not reach a fixpoint")


def powerset(auto: TypedAutomaton) -> Dfa:
    """Subset construction over full symbols.

    Raises SubsetConflict when a reachable subset keeps two atom transitions
    with the same (label, front) but different rears; the compile driver
    turns that into another disambiguation round.  Raises MixedRankSubset
    when a reachable subset mixes states of different ranks, which cannot
    happen for automata built from type-checked expressions.
    """
    per_state: Dict[int, List[Transition]] = {}
    for t in auto.transitions:
        per_state.setdefault(t.src, []).append(t)

    start = frozenset({auto.start})
    subsets: Dict[FrozenSet[int], int] = {start: 0}
    ranks = [auto.ranks[auto.start]]
    order: List[FrozenSet[int]] = [start]
    transitions: List[Tuple[int, Symbol, int]] = []
    queue = [start]
    while queue:
        subset = queue.pop(0)
        sid = subsets[subset]
        member_ranks = {auto.ranks[q] for q in subset}
        if len(member_ranks) > 1:
            raise MixedRankSubset(
                f"subset {sorted(subset)} mixes ranks {sorted(member_ranks)}")
        by_symbol: Dict[Symbol, Set[int]] = {}
        sym_order: List[Symbol] = []
        for q in sorted(subset):
            for t in per_state.get(q, ()):
                if t.sym not in by_symbol:
                    by_symbol[t.sym] = set()
                    sym_order.append(t.sym)
                by_symbol[t.sym].add(t.dst)
        atoms_by_lf: Dict[Tuple[str, tuple], List[AtomSymbol]] = {}
        for sym in sym_order:
            if isinstance(sym, AtomSymbol):
                atoms_by_lf.setdefault((sym.label, sym.front), []).append(sym)
        for (label, front), syms in atoms_by_lf.items():
            if len(syms) > 1:
                raise SubsetConflict(
                    f"subset {sorted(subset)} keeps {len(syms)} atoms with label "
                    f"{label!r} and front {front}", transitions=syms)
        for sym in sym_order:
            target = frozenset(by_symbol[sym])
            if isinstance(sym, BlankSymbol):
                for q in target:
                    if per_state.get(q) or q not in auto.final:
                        raise InternalError(
                            f"blank transition into non-sink state {q}")
            if target not in subsets:
                subsets[target] = len(order)
                order.append(target)
                ranks.append(sym.type[1])
                queue.append(target)
            transitions.append((sid, sym, subsets[target]))

    final = {subsets[s] for s in order if s & auto.final}
    return Dfa(auto.vocab, ranks, 0, final,
               [Transition(a, s, b) for a, s, b in transitions],
               names=[f"q{i}" for i in range(len(order))])


def minimize(dfa: Dfa) -> Dfa:
    """Hopcroft minimization, partitioning initially by (final?, rank).

    The rank refinement keeps merged states well-typed; two states of
    different ranks never merge even if their string languages agree.
    """
    n = dfa.n_states
    per_state: Dict[int, List[Transition]] = {}
    for t in dfa.transitions:
        per_state.setdefault(t.src, []).append(t)

    # trim to useful states: reachable and able to reach a final state
    reach = set()
    queue = [dfa.start]
    while queue:
        q = queue.pop()
        if q in reach:
            continue
        reach.add(q)
        for t in per_state.get(q, ()):
            queue.append(t.dst)
    back: Dict[int, Set[int]] = {}
    for t in dfa.transitions:
        back.setdefault(t.dst, set()).add(t.src)
    coaccess = set()
    queue = list(dfa.final)
    while queue:
        q = queue.pop()
        if q in coaccess:
            continue
        coaccess.add(q)
        queue.extend(back.get(q, ()))
    useful = reach & coaccess
    if dfa.start not in useful:
        # empty language: keep only the start state
        return Dfa(dfa.vocab, [dfa.ranks[dfa.start]], 0, set(), [], names=["q0"])

    # Hopcroft refinement over the partial transition function
    symbols = sorted({t.sym for t in dfa.transitions if t.src in useful and t.dst in useful},
                     key=str)
    pre: Dict[Symbol, Dict[int, Set[int]]] = {s: {} for s in symbols}
    for t in dfa.transitions:
        if t.src in useful and t.dst in useful:
            pre[t.sym].setdefault(t.dst, set()).add(t.src)

    blocks: List[Set[int]] = []
    block_of: Dict[int, int] = {}
    init: Dict[Tuple[bool, int], Set[int]] = {}
    for q in useful:
        init.setdefault((q in dfa.final, dfa.ranks[q]), set()).add(q)
    for group in init.values():
        for q in group:
            block_of[q] = len(blocks)
        blocks.append(set(group))

    from collections import deque
    work = deque((b, s) for b in range(len(blocks)) for s in symbols)
    while work:
        b, sym = work.popleft()
        splitter = blocks[b]
        x: Set[int] = set()
        table = pre[sym]
        for q in splitter:
            x |= table.get(q, set())
        if not x:
            continue
        touched: Dict[int, Set[int]] = {}
        for q in x:
            touched.setdefault(block_of[q], set()).add(q)
        for bid, inside in touched.items():
            block = blocks[bid]
            if len(inside) == len(block):
                continue
            outside = block - inside
            small, large = (inside, outside) if len(inside) <= len(outside) else (outside, inside)
            blocks[bid] = large
            new_id = len(blocks)
            blocks.append(small)
            for q in small:
                block_of[q] = new_id
            for s in symbols:
                work.append((new_id, s))

    # rebuild on blocks, numbered by breadth-first discovery from the start
    rep = {bid: min(members) for bid, members in enumerate(blocks) if members}
    start_block = block_of[dfa.start]
    new_ids: Dict[int, int] = {start_block: 0}
    bfs = [start_block]
    pos = 0
    out_syms: Dict[int, List[Transition]] = {}
    for bid in rep:
        r = rep[bid]
        trans = [t for t in per_state.get(r, ()) if t.dst in useful]
        for member in blocks[bid]:
            member_syms = {t.sym for t in per_state.get(member, ()) if t.dst in useful}
            if member_syms != {t.sym for t in trans}:
                raise InternalError("merged states disagree on outgoing symbols")
        out_syms[bid] = trans
    while pos < len(bfs):
        bid = bfs[pos]
        pos += 1
        for t in out_syms[bid]:
            dst_block = block_of[t.dst]
            if dst_block not in new_ids:
                new_ids[dst_block] = len(new_ids)
                bfs.append(dst_block)
    ranks = [0] * len(new_ids)
    final = set()
    transitions = []
    for bid, nid in new_ids.items():
        ranks[nid] = dfa.ranks[rep[bid]]
        if rep[bid] in dfa.final:
            final.add(nid)
    for bid in bfs:
        for t in out_syms[bid]:
            transitions.append(Transition(new_ids[bid], t.sym, new_ids[block_of[t.dst]]))
    return Dfa(dfa.vocab, ranks, 0, final, transitions,
               names=[f"q{i}" for i in range(len(new_ids))])


def determinize(auto: TypedAutomaton, max_rounds: int = 50) -> Dfa:
    """Disambiguation and powerset with conflict feedback, then minimize."""
    force: Set[Tuple[str, tuple]] = set()
    for _ in range(max_rounds):
        prepared = disambiguate(auto, force)
        try:
            return minimize(powerset(prepared))
        except SubsetConflict as conflict:
            new_pairs = {(s.label, s.front) for s in conflict.transitions}
            if new_pairs <= force:
                raise InternalError(
                    f"determinization makes no progress on {sorted(new_pairs)}")
            force |= new_pairs
    raise SubsetConflict(f"automaton not determinized within {max_rounds} rounds")


@dataclass
class CompileResult:
    dfa: Dfa
    ts: "object"
    fec: "object"

    @property
    def certified(self) -> bool:
        return self.dfa.certified


def compile_automaton(auto: TypedAutomaton) -> CompileResult:
    """Full chain: determinize, minimize, analyze, reorder on success."""
    from . import analysis

    dfa = determinize(auto)
    fec = analysis.fec_check(dfa)
    ts = analysis.ts_check(dfa)
    if ts.passed:
        dfa = analysis.reorder_transitions(dfa, ts, fec)
    return CompileResult(dfa=dfa, ts=ts, fec=fec)


def compile_regex_text(text: str) -> CompileResult:
    """Compile a regex file (symbol header plus expression)."""
    from .regex import load_regex, regex_to_nfa

    vocab, ast = load_regex(text)
    return compile_automaton(regex_to_nfa(ast, vocab))
