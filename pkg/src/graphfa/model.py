"""Typed graph symbols and the edge-labeled hypergraphs they denote.

A vocabulary maps each edge label to a rank >= 1.  Node numbers inside a
symbol are 1-based (node i <= rank(label) is the i-th attachment of the
symbol's single edge); Python-level sequence indices ("slots" of a front
tuple) are 0-based throughout.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Hashable, Iterable, NamedTuple, Optional, Sequence, Union

from .errors import InvariantViolation, SizeLimitExceeded, TypeMismatch

Vocabulary = dict  # label -> rank


def _seq_text(seq: Sequence[int]) -> str:
    if not seq:
        return "<>"
    if all(1 <= i <= 9 for i in seq):
        return "".join(str(i) for i in seq)
    return "{" + ",".join(str(i) for i in seq) + "}"


def _check_repetition_free(seq: Sequence, what: str) -> None:
    if len(set(seq)) != len(seq):
        raise InvariantViolation(f"{what} has repeated entries: {seq!r}")


@dataclass(frozen=True)
class AtomSymbol:
    """One edge with label `label`, nodes 1..n, front/rear node sequences."""

    label: str
    rank: int
    front: tuple
    rear: tuple

    @property
    def nodes(self) -> int:
        return max(self.rank, max(itertools.chain(self.front, self.rear), default=0))

    @property
    def type(self) -> tuple:
        return (len(self.front), len(self.rear))

    def bound_positions(self) -> tuple:
        """Edge positions whose node is also in the front (1-based, sorted)."""
        fs = set(self.front)
        return tuple(i for i in range(1, self.rank + 1) if i in fs)

    def fresh_positions(self) -> tuple:
        """Edge positions whose node is not in the front (1-based, sorted)."""
        fs = set(self.front)
        return tuple(i for i in range(1, self.rank + 1) if i not in fs)

    def front_slot(self, node: int) -> int:
        """0-based index of `node` in the front sequence."""
        return self.front.index(node)

    @property
    def text(self) -> str:
        return f"{self.label}^{_seq_text(self.front)}_{_seq_text(self.rear)}"

    def __str__(self) -> str:
        return self.text


@dataclass(frozen=True)
class BlankSymbol:
    """A discrete graph on nodes 1..size with front (1..size) and rear `rear`."""

    size: int
    rear: tuple

    @property
    def nodes(self) -> int:
        return self.size

    @property
    def front(self) -> tuple:
        return tuple(range(1, self.size + 1))

    @property
    def type(self) -> tuple:
        return (self.size, len(self.rear))

    @property
    def text(self) -> str:
        return f"<>^{self.size}_{_seq_text(self.rear)}"

    def __str__(self) -> str:
        return self.text


Symbol = Union[AtomSymbol, BlankSymbol]


def make_atom(label: str, rank: int, front: Iterable[int], rear: Iterable[int]) -> AtomSymbol:
    """Build a validated atom symbol.

    Node count n = max(rank, largest index mentioned); every node must lie on
    the edge or in the front; every rear node must be reachable (in the front
    or on the edge).
    """
    front = tuple(front)
    rear = tuple(rear)
    if rank < 1:
        raise InvariantViolation(f"rank must be >= 1, got {rank}")
    _check_repetition_free(front, f"front of {label}")
    _check_repetition_free(rear, f"rear of {label}")
    for i in itertools.chain(front, rear):
        if i < 1:
            raise InvariantViolation(f"node indices are 1-based, got {i}")
    n = max(rank, max(itertools.chain(front, rear), default=0))
    fs = set(front)
    for i in range(1, n + 1):
        if i > rank and i not in fs:
            raise InvariantViolation(
                f"node {i} of {label}^{_seq_text(front)}_{_seq_text(rear)} is neither "
                f"on the edge nor in the front"
            )
    for i in rear:
        if i > rank and i not in fs:
            raise InvariantViolation(
                f"rear node {i} of {label}^{_seq_text(front)}_{_seq_text(rear)} is unreachable"
            )
    return AtomSymbol(label, rank, front, rear)


def make_blank(size: int, rear: Iterable[int]) -> BlankSymbol:
    rear = tuple(rear)
    if size < 0:
        raise InvariantViolation(f"blank size must be >= 0, got {size}")
    _check_repetition_free(rear, "blank rear")
    for i in rear:
        if not 1 <= i <= size:
            raise InvariantViolation(f"blank rear index {i} outside 1..{size}")
    return BlankSymbol(size, rear)


class Edge(NamedTuple):
    label: str
    att: tuple


@dataclass(frozen=True)
class Graph:
    """Edge-labeled hypergraph with ordered front/rear node interfaces."""

    nodes: tuple
    edges: tuple
    front: tuple
    rear: tuple

    @property
    def type(self) -> tuple:
        return (len(self.front), len(self.rear))

    def discrete_nodes(self) -> set:
        attached = set()
        for e in self.edges:
            attached.update(e.att)
        return set(self.nodes) - attached

    def validate(self, vocab: Optional[Vocabulary] = None) -> "Graph":
        nodeset = set(self.nodes)
        if len(nodeset) != len(self.nodes):
            raise InvariantViolation("duplicate node ids")
        for e in self.edges:
            _check_repetition_free(e.att, f"attachment of {e.label} edge")
            for v in e.att:
                if v not in nodeset:
                    raise InvariantViolation(f"edge {e.label}{e.att!r} attached to unknown node {v!r}")
            if vocab is not None:
                if e.label not in vocab:
                    raise InvariantViolation(f"edge label {e.label!r} not in vocabulary")
                if len(e.att) != vocab[e.label]:
                    raise InvariantViolation(
                        f"{e.label} edge has {len(e.att)} attachments, rank is {vocab[e.label]}"
                    )
        for name, seq in (("front", self.front), ("rear", self.rear)):
            _check_repetition_free(seq, name)
            for v in seq:
                if v not in nodeset:
                    raise InvariantViolation(f"{name} node {v!r} not in graph")
        return self


def graph(nodes: Iterable, edges: Iterable, front: Iterable, rear: Iterable,
          vocab: Optional[Vocabulary] = None) -> Graph:
    g = Graph(
        nodes=tuple(nodes),
        edges=tuple(Edge(label, tuple(att)) for label, att in edges),
        front=tuple(front),
        rear=tuple(rear),
    )
    return g.validate(vocab)


def interpret(sym: Symbol) -> Graph:
    """The single-symbol graph: nodes 1..n, one edge for atoms, none for blanks."""
    if isinstance(sym, AtomSymbol):
        n = sym.nodes
        return Graph(
            nodes=tuple(range(1, n + 1)),
            edges=(Edge(sym.label, tuple(range(1, sym.rank + 1))),),
            front=sym.front,
            rear=sym.rear,
        )
    return Graph(
        nodes=tuple(range(1, sym.size + 1)),
        edges=(),
        front=sym.front,
        rear=sym.rear,
    )


def _fresh_ids(count: int, taken: set) -> list:
    out = []
    i = 0
    for v in taken:
        if isinstance(v, int) and v > i:
            i = v
    while len(out) < count:
        i += 1
        if i not in taken:
            out.append(i)
    return out


def concat(g: Graph, h: Graph) -> Graph:
    """Disjoint union of g and h with rear(g) merged pointwise onto front(h)."""
    if len(g.rear) != len(h.front):
        raise TypeMismatch(
            f"cannot concatenate type {g.type} with type {h.type}: "
            f"|rear| = {len(g.rear)} but |front| = {len(h.front)}"
        )
    rename = dict(zip(h.front, g.rear))
    fresh_nodes = [v for v in h.nodes if v not in rename]
    taken = set(g.nodes)
    for old, new in zip(fresh_nodes, _fresh_ids(len(fresh_nodes), taken)):
        rename[old] = new
    nodes = list(g.nodes) + [rename[v] for v in fresh_nodes]
    edges = list(g.edges) + [Edge(e.label, tuple(rename[v] for v in e.att)) for e in h.edges]
    return Graph(
        nodes=tuple(nodes),
        edges=tuple(edges),
        front=g.front,
        rear=tuple(rename[v] for v in h.rear),
    )


def interpret_string(word: Sequence[Symbol], empty_arity: Optional[int] = None) -> Graph:
    """Left fold of concat over the word's symbol graphs.

    The empty word denotes the discrete identity graph, whose arity cannot be
    inferred from the word itself; pass `empty_arity` to allow it.
    """
    if not word:
        if empty_arity is None:
            raise InvariantViolation("empty word needs an explicit arity")
        ident = tuple(range(1, empty_arity + 1))
        return Graph(nodes=ident, edges=(), front=ident, rear=ident)
    g = interpret(word[0])
    for sym in word[1:]:
        g = concat(g, interpret(sym))
    return g


def word_type(word: Sequence[Symbol]) -> tuple:
    """Front/rear arity of a composable word; TypeMismatch if the chain breaks."""
    if not word:
        raise InvariantViolation("empty word has no inherent type")
    m = word[0].type[0]
    cur = m
    for sym in word:
        fm, fr = sym.type
        if fm != cur:
            raise TypeMismatch(f"word breaks at {sym}: expected front arity {cur}, got {fm}")
        cur = fr
    return (m, cur)


def iso_check(g: Graph, h: Graph, max_edges: int = 64) -> bool:
    """Exact isomorphism respecting labels, attachment order and interfaces.

    Front and rear must correspond pointwise.  Refuses graphs above
    `max_edges` (SizeLimitExceeded); meant for oracle-sized inputs.
    """
    if len(g.edges) > max_edges or len(h.edges) > max_edges:
        raise SizeLimitExceeded(f"iso_check bound is {max_edges} edges")
    if len(g.nodes) != len(h.nodes) or len(g.edges) != len(h.edges):
        return False
    if len(g.front) != len(h.front) or len(g.rear) != len(h.rear):
        return False
    if sorted(e.label for e in g.edges) != sorted(e.label for e in h.edges):
        return False

    gmap = {}   # g node -> h node
    used = {}   # h node -> g node
    def bind(a, b):
        if a in gmap:
            return gmap[a] == b
        if b in used:
            return False
        gmap[a] = b
        used[b] = a
        return True

    for a, b in itertools.chain(zip(g.front, h.front), zip(g.rear, h.rear)):
        if not bind(a, b):
            return False

    # node -> incident label multiset, a cheap compatibility filter
    def signature(graph_):
        sig = {v: [] for v in graph_.nodes}
        for e in graph_.edges:
            for pos, v in enumerate(e.att):
                sig[v].append((e.label, pos))
        return {v: tuple(sorted(s)) for v, s in sig.items()}

    gsig, hsig = signature(g), signature(h)
    hedges_by_label = {}
    for idx, e in enumerate(h.edges):
        hedges_by_label.setdefault(e.label, []).append(idx)

    gedges = sorted(range(len(g.edges)),
                    key=lambda i: -sum(v in gmap for v in g.edges[i].att))
    used_h = [False] * len(h.edges)

    def backtrack(k: int) -> bool:
        if k == len(gedges):
            # leftover isolated nodes are interchangeable; counts already match
            free_g = sum(1 for v in g.nodes if v not in gmap)
            free_h = sum(1 for v in h.nodes if v not in used)
            return free_g == free_h
        ge = g.edges[gedges[k]]
        for hj in hedges_by_label[ge.label]:
            if used_h[hj]:
                continue
            he = h.edges[hj]
            saved = (dict(gmap), dict(used))
            ok = True
            for a, b in zip(ge.att, he.att):
                if gsig[a] != hsig[b] or not bind(a, b):
                    ok = False
                    break
            if ok:
                used_h[hj] = True
                if backtrack(k + 1):
                    return True
                used_h[hj] = False
            gmap.clear(); gmap.update(saved[0])
            used.clear(); used.update(saved[1])
        return False

    return backtrack(0)
