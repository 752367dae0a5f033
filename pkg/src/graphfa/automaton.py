"""Typed finite automata over graph symbols.

Each state carries a rank; a transition's symbol must have front arity equal
to the source rank and rear arity equal to the target rank, so every run's
front sequence always has the current state's rank.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import Iterable, List, Optional, Sequence, Set, Tuple

from .errors import InvariantViolation
from .model import AtomSymbol, BlankSymbol, Symbol


@dataclass(frozen=True)
class Transition:
    src: int
    sym: Symbol
    dst: int

    def __str__(self) -> str:
        return f"{self.src} -> {self.dst} : {self.sym}"


class TypedAutomaton:
    """States 0..n-1 with ranks; transitions in a significant list order.

    The list order of a state's atom transitions is the trial order used by
    the recognizers; pipeline stages preserve or rewrite it explicitly.
    """

    def __init__(self, vocab: dict, ranks: Sequence[int], start: int,
                 final: Iterable[int], transitions: Iterable[Transition],
                 names: Optional[Sequence[str]] = None, check: bool = True):
        self.vocab = dict(vocab)
        self.ranks = list(ranks)
        self.start = start
        self.final = set(final)
        self.transitions = list(transitions)
        self.names = list(names) if names is not None else [f"q{i}" for i in range(len(self.ranks))]
        if check:
            self.validate()

    @property
    def n_states(self) -> int:
        return len(self.ranks)

    def validate(self) -> "TypedAutomaton":
        n = self.n_states
        if len(self.names) != n:
            raise InvariantViolation("state name list length mismatch")
        if not 0 <= self.start < n:
            raise InvariantViolation(f"start state {self.start} out of range")
        for q in self.final:
            if not 0 <= q < n:
                raise InvariantViolation(f"final state {q} out of range")
        for label, rank in self.vocab.items():
            if rank < 1:
                raise InvariantViolation(f"label {label!r} has rank {rank}")
        for t in self.transitions:
            if not (0 <= t.src < n and 0 <= t.dst < n):
                raise InvariantViolation(f"transition {t} references unknown state")
            m, r = t.sym.type
            if isinstance(t.sym, AtomSymbol):
                if t.sym.label not in self.vocab:
                    raise InvariantViolation(f"transition {t} uses undeclared label {t.sym.label!r}")
                if t.sym.rank != self.vocab[t.sym.label]:
                    raise InvariantViolation(
                        f"transition {t}: symbol rank {t.sym.rank} != vocabulary rank "
                        f"{self.vocab[t.sym.label]}")
            if m != self.ranks[t.src]:
                raise InvariantViolation(
                    f"transition {t}: front arity {m} != rank {self.ranks[t.src]} of source")
            if r != self.ranks[t.dst]:
                raise InvariantViolation(
                    f"transition {t}: rear arity {r} != rank {self.ranks[t.dst]} of target")
        return self

    def out(self, q: int) -> List[Tuple[int, Transition]]:
        """(index, transition) pairs leaving q, in list order."""
        return [(i, t) for i, t in enumerate(self.transitions) if t.src == q]

    def atom_out(self, q: int) -> List[Tuple[int, Transition]]:
        return [(i, t) for i, t in self.out(q) if isinstance(t.sym, AtomSymbol)]

    def blank_out(self, q: int) -> List[Tuple[int, Transition]]:
        return [(i, t) for i, t in self.out(q) if isinstance(t.sym, BlankSymbol)]

    def is_sink(self, q: int) -> bool:
        return q in self.final and not any(t.src == q for t in self.transitions)

    def digest(self) -> str:
        """Stable content hash covering structure, order and names."""
        h = hashlib.sha256()
        h.update(repr(sorted(self.vocab.items())).encode())
        for i, rank in enumerate(self.ranks):
            h.update(f"s {self.names[i]} {rank} {int(i in self.final)}\n".encode())
        h.update(f"start {self.start}\n".encode())
        for t in self.transitions:
            h.update(f"t {t.src} {t.dst} {t.sym}\n".encode())
        return h.hexdigest()

    def __repr__(self) -> str:
        return (f"<{type(self).__name__} states={self.n_states} "
                f"transitions={len(self.transitions)} start={self.start}>")


class Dfa(TypedAutomaton):
    """Deterministic automaton, optionally carrying TS/FEC certificates.

    Determinism here means: at most one outgoing transition per (state, full
    symbol), and for atoms at most one per (state, label, front).  The list
    order of each state's atom transitions is the committed trial order.
    """

    def __init__(self, vocab, ranks, start, final, transitions, names=None,
                 check: bool = True, cert_ts: bool = False, cert_fec: bool = False,
                 deferrable: Iterable[int] = ()):
        super().__init__(vocab, ranks, start, final, transitions, names, check=check)
        self.cert_ts = cert_ts
        self.cert_fec = cert_fec
        self.deferrable = tuple(sorted(deferrable))
        if check:
            self.check_deterministic()

    @property
    def certified(self) -> bool:
        return self.cert_ts and self.cert_fec

    def check_deterministic(self) -> "Dfa":
        seen_full = set()
        seen_lf = set()
        for t in self.transitions:
            key = (t.src, t.sym)
            if key in seen_full:
                raise InvariantViolation(f"duplicate transition {t}")
            seen_full.add(key)
            if isinstance(t.sym, AtomSymbol):
                lf = (t.src, t.sym.label, t.sym.front)
                if lf in seen_lf:
                    raise InvariantViolation(
                        f"state {self.names[t.src]} has two atoms with label "
                        f"{t.sym.label!r} and front {t.sym.front}")
                seen_lf.add(lf)
        return self

    def with_certificates(self, cert_ts: bool, cert_fec: bool,
                          deferrable: Iterable[int] = ()) -> "Dfa":
        return Dfa(self.vocab, self.ranks, self.start, self.final, self.transitions,
                   names=self.names, check=False, cert_ts=cert_ts, cert_fec=cert_fec,
                   deferrable=deferrable)

    def with_transitions(self, transitions: Iterable[Transition]) -> "Dfa":
        """Same states, new transition list (certificates reset)."""
        return Dfa(self.vocab, self.ranks, self.start, self.final, list(transitions),
                   names=self.names)
