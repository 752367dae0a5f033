"""Regular expressions over graph symbols.

Grammar: juxtaposition concatenates, `|` alternates, `*` is Kleene star,
parentheses group.  There is no epsilon literal and `()` is rejected; a star
may still make the empty word acceptable at top level, which the recognizer
handles through its final-configuration check.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Set, Tuple, Union

from .automaton import Transition, TypedAutomaton
from .errors import (AltTypeMismatch, ChainMismatch, EmptyExpression,
                     EpsilonLanguage, InternalError, ParseError, StarNotSquare)
from .formats import _SYMBOL_RE, parse_symbol, split_regex_file
from .model import Symbol as GraphSymbol
from .model import Vocabulary


@dataclass(frozen=True)
class Sym:
    sym: GraphSymbol


@dataclass(frozen=True)
class Concat:
    parts: tuple


@dataclass(frozen=True)
class Alt:
    parts: tuple


@dataclass(frozen=True)
class Star:
    child: "Regex"


Regex = Union[Sym, Concat, Alt, Star]


# -- parsing ------------------------------------------------------------------

_PUNCT = {"(", ")", "|", "*"}


def _tokenize(text: str, vocab: Vocabulary) -> List[Tuple[str, object, int, int]]:
    """Tokens: ('sym', GraphSymbol) or ('punct', char), with line/column."""
    tokens = []
    line, col = 1, 1
    i = 0
    while i < len(text):
        c = text[i]
        if c == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if c.isspace():
            i += 1
            col += 1
            continue
        if c in _PUNCT:
            tokens.append(("punct", c, line, col))
            i += 1
            col += 1
            continue
        m = _SYMBOL_RE.match(text, i)
        if m is None or m.start() != i:
            raise ParseError(f"unexpected character {c!r}", line, col)
        sym = parse_symbol(m.group(0), vocab, line, col)
        tokens.append(("sym", sym, line, col))
        col += m.end() - m.start()
        i = m.end()
    return tokens


class _Parser:
    def __init__(self, tokens):
        self.tokens = tokens
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def take(self):
        tok = self.peek()
        self.pos += 1
        return tok

    def parse(self) -> Regex:
        if not self.tokens:
            raise EmptyExpression("empty expression")
        node = self.alt()
        tok = self.peek()
        if tok is not None:
            raise ParseError(f"unexpected {tok[1]!r}", tok[2], tok[3])
        return node

    def alt(self) -> Regex:
        parts = [self.concat()]
        while True:
            tok = self.peek()
            if tok is None or tok[:2] != ("punct", "|"):
                break
            self.take()
            parts.append(self.concat())
        return parts[0] if len(parts) == 1 else Alt(tuple(parts))

    def concat(self) -> Regex:
        parts = []
        while True:
            tok = self.peek()
            if tok is None or tok[:2] in (("punct", "|"), ("punct", ")")):
                break
            parts.append(self.factor())
        if not parts:
            tok = self.peek()
            if tok is not None:
                raise EmptyExpression(
                    f"empty branch at line {tok[2]}, column {tok[3]}")
            raise EmptyExpression("empty branch")
        return parts[0] if len(parts) == 1 else Concat(tuple(parts))

    def factor(self) -> Regex:
        node = self.primary()
        while True:
            tok = self.peek()
            if tok is None or tok[:2] != ("punct", "*"):
                break
            self.take()
            node = Star(node)
        return node

    def primary(self) -> Regex:
        tok = self.take()
        if tok is None:
            raise EmptyExpression("expression ends early")
        kind, value, line, col = tok
        if kind == "sym":
            return Sym(value)
        if value == "(":
            nxt = self.peek()
            if nxt is not None and nxt[:2] == ("punct", ")"):
                raise EmptyExpression(f"empty group at line {line}, column {col}")
            node = self.alt()
            closing = self.take()
            if closing is None or closing[:2] != ("punct", ")"):
                raise ParseError("unbalanced parenthesis", line, col)
            return node
        raise ParseError(f"unexpected {value!r}", line, col)


def parse_regex(text: str, vocab: Vocabulary) -> Regex:
    ast = _Parser(_tokenize(text, vocab)).parse()
    typecheck(ast)
    return ast


def load_regex(text: str) -> Tuple[Vocabulary, Regex]:
    """Parse a regex file: symbol header plus expression body."""
    vocab, body = split_regex_file(text)
    return vocab, parse_regex(body, vocab)


# -- typing -------------------------------------------------------------------

def typecheck(r: Regex) -> Tuple[int, int]:
    """The (front, rear) arity of the expression; raises on type breaks."""
    if isinstance(r, Sym):
        return r.sym.type
    if isinstance(r, Concat):
        types = [typecheck(p) for p in r.parts]
        for (m1, r1), (m2, r2) in zip(types, types[1:]):
            if r1 != m2:
                raise ChainMismatch(
                    f"cannot concatenate type ({m1},{r1}) with type ({m2},{r2})")
        return (types[0][0], types[-1][1])
    if isinstance(r, Alt):
        types = {typecheck(p) for p in r.parts}
        if len(types) > 1:
            raise AltTypeMismatch(
                "alternation branches have different types: "
                + ", ".join(str(t) for t in sorted(types)))
        return next(iter(types))
    if isinstance(r, Star):
        m, n = typecheck(r.child)
        if m != n:
            raise StarNotSquare(f"star needs equal front and rear arity, got ({m},{n})")
        return (m, n)
    raise InternalError(f"unknown regex node {r!r}")


# -- translation to a typed NFA ----------------------------------------------

class _NfaBuilder:
    """Thompson-style construction with epsilon edges, then elimination."""

    def __init__(self):
        self.n = 0
        self.eps: List[Tuple[int, int]] = []
        self.edges: List[Tuple[int, GraphSymbol, int]] = []

    def fresh(self) -> int:
        self.n += 1
        return self.n - 1

    def build(self, r: Regex) -> Tuple[int, int]:
        if isinstance(r, Sym):
            a, b = self.fresh(), self.fresh()
            self.edges.append((a, r.sym, b))
            return a, b
        if isinstance(r, Concat):
            first_in, prev_out = self.build(r.parts[0])
            for part in r.parts[1:]:
                a, b = self.build(part)
                self.eps.append((prev_out, a))
                prev_out = b
            return first_in, prev_out
        if isinstance(r, Alt):
            a, b = self.fresh(), self.fresh()
            for part in r.parts:
                pa, pb = self.build(part)
                self.eps.append((a, pa))
                self.eps.append((pb, b))
            return a, b
        if isinstance(r, Star):
            a, b = self.fresh(), self.fresh()
            ca, cb = self.build(r.child)
            self.eps.append((a, ca))
            self.eps.append((cb, b))
            self.eps.append((a, b))
            self.eps.append((cb, ca))
            return a, b
        raise InternalError(f"unknown regex node {r!r}")


def _eps_closure(n: int, eps: Sequence[Tuple[int, int]]) -> List[Set[int]]:
    succ: List[Set[int]] = [set() for _ in range(n)]
    for a, b in eps:
        succ[a].add(b)
    closure = []
    for s in range(n):
        seen = {s}
        stack = [s]
        while stack:
            x = stack.pop()
            for y in succ[x]:
                if y not in seen:
                    seen.add(y)
                    stack.append(y)
        closure.append(seen)
    return closure


def regex_to_nfa(r: Regex, vocab: Vocabulary) -> TypedAutomaton:
    """Typed NFA for the expression; epsilon-free, every state ranked.

    States reachable only through epsilon edges are folded away; each
    remaining state's rank is forced by the arities of its incident symbols.
    """
    typecheck(r)
    builder = _NfaBuilder()
    start, accept = builder.build(r)
    closure = _eps_closure(builder.n, builder.eps)

    # edge (a, sym, b) lifts to (p, sym, b) for every p with a in closure(p)
    out_edges: List[Set[int]] = [set() for _ in range(builder.n)]
    for k, (a, _, _) in enumerate(builder.edges):
        for p in range(builder.n):
            if a in closure[p]:
                out_edges[p].add(k)
    final = {p for p in range(builder.n) if accept in closure[p]}

    reachable = []
    seen = {start}
    queue = [start]
    while queue:
        p = queue.pop()
        reachable.append(p)
        for k in out_edges[p]:
            q = builder.edges[k][2]
            if q not in seen:
                seen.add(q)
                queue.append(q)
    reachable.sort()
    if not any(out_edges[p] for p in reachable) and start in final:
        raise EpsilonLanguage("expression accepts only the empty word")

    index = {p: i for i, p in enumerate(reachable)}
    ranks: List[Optional[int]] = [None] * len(reachable)

    def constrain(state: int, rank: int) -> None:
        if ranks[state] is None:
            ranks[state] = rank
        elif ranks[state] != rank:
            raise InternalError(
                f"state {state} forced to ranks {ranks[state]} and {rank}")

    transitions = []
    for p in reachable:
        for k in out_edges[p]:
            _, sym, b = builder.edges[k]
            m, rr = sym.type
            constrain(index[p], m)
            constrain(index[b], rr)
            transitions.append(Transition(index[p], sym, index[b]))
    m, _ = typecheck(r)
    constrain(index[start], m)
    for i, rank in enumerate(ranks):
        if rank is None:
            raise InternalError(f"state {i} has no rank constraint")

    return TypedAutomaton(vocab, ranks, index[start],
                          {index[p] for p in reachable if p in final},
                          transitions)
