"""Built-in example languages, their generators, and graph mutation helpers.

Each language is registered with the full text of its regex file; the sample
files under samples/ carry the same text.  Generators build members directly
in array form so benchmark-sized instances need no per-edge Python objects;
`gen_*` wrappers return ordinary Graph values for oracle-sized work.

Generator edge order follows the left-to-right interpretation of a witness
word; use `shuffled`/`shuffle_edges` to exercise order independence.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Iterator, List, Optional, Tuple

import numpy as np

from .automaton import Dfa, TypedAutomaton
from .engine import GraphArrays
from .errors import InvariantViolation
from .model import Graph, Vocabulary

ABC_REGEX = """\
symbol a(2), b(2), c(2)
a^13_23 b^12_2 c^1_<>
| a^13_23 b^32_312 c^341_342 (a^134_234 b^324_314 c^341_342)* a^134_234 b^123_3 c^1_<>
"""

SPIKES_REGEX = """\
symbol s(3)
s^124_134 (s^134_124)* s^123_<>
| s^423_421 (s^421_423)* s^321_<>
| s^143_243 (s^243_143)* s^123_<>
"""

PALINDROMES_REGEX = """\
symbol a(2), b(2)
(a^13_23 a^32_31 | b^13_23 b^32_31)*
(a^13_23 a^12_<> | b^13_23 b^12_<> | a^12_<> | b^12_<>)
"""

WHEELS_REGEX = """\
symbol s(2), t(2)
t^<>_12 s^32_123 (t^314_324 s^123_123)* t^312_32 s^12_<>
"""


@dataclass(frozen=True)
class LangSpec:
    """One registered language: vocabulary, regex file text, size lattice."""

    name: str
    vocab: Vocabulary
    regex_text: str
    quantum: int     # edge counts grow in steps of this
    min_edges: int
    variants: int = 1

    def valid_size(self, edges: int) -> bool:
        return edges >= self.min_edges and (edges - self.min_edges) % self.quantum == 0

    def snap(self, edges: int) -> int:
        """Largest valid edge count <= edges (or the minimum)."""
        if edges <= self.min_edges:
            return self.min_edges
        return edges - (edges - self.min_edges) % self.quantum


LANGUAGES: Dict[str, LangSpec] = {
    "abc": LangSpec("abc", {"a": 2, "b": 2, "c": 2}, ABC_REGEX,
                    quantum=3, min_edges=3),
    "spikes": LangSpec("spikes", {"s": 3}, SPIKES_REGEX,
                       quantum=1, min_edges=2, variants=3),
    "palindromes": LangSpec("palindromes", {"a": 2, "b": 2}, PALINDROMES_REGEX,
                            quantum=1, min_edges=1),
    "wheels": LangSpec("wheels", {"s": 2, "t": 2}, WHEELS_REGEX,
                       quantum=2, min_edges=4),
}

_DFA_CACHE: Dict[str, Dfa] = {}
_NFA_CACHE: Dict[str, TypedAutomaton] = {}


def lang(name: str) -> LangSpec:
    try:
        return LANGUAGES[name]
    except KeyError:
        raise InvariantViolation(
            f"unknown language {name!r}; choices: {', '.join(sorted(LANGUAGES))}")


def compiled_dfa(name: str) -> Dfa:
    """The certified deterministic automaton for a registered language."""
    if name not in _DFA_CACHE:
        from .pipeline import compile_regex_text

        result = compile_regex_text(lang(name).regex_text)
        _DFA_CACHE[name] = result.dfa
    return _DFA_CACHE[name]


def nfa(name: str) -> TypedAutomaton:
    """The raw, non-determinized automaton; the backtracking oracle's input."""
    if name not in _NFA_CACHE:
        from .regex import load_regex, regex_to_nfa

        vocab, ast = load_regex(lang(name).regex_text)
        _NFA_CACHE[name] = regex_to_nfa(ast, vocab)
    return _NFA_CACHE[name]


# -- array-level generators --------------------------------------------------


def _abc_arrays(n: int) -> GraphArrays:
    """Three chains of n edges each: a forward, b reversed, c forward."""
    if n < 1:
        raise InvariantViolation(f"need at least one triple, got {n}")
    i = np.arange(1, n + 1, dtype=np.int32)
    e_label = np.empty(3 * n, dtype=np.int32)
    e_att = np.empty((3 * n, 2), dtype=np.int32)
    e_label[0::3], e_label[1::3], e_label[2::3] = 0, 1, 2
    e_att[0::3, 0], e_att[0::3, 1] = i - 1, i
    e_att[1::3, 0], e_att[1::3, 1] = 2 * n - i, 2 * n - i + 1
    e_att[2::3, 0], e_att[2::3, 1] = 2 * n + i - 1, 2 * n + i
    return GraphArrays(
        labels=("a", "b", "c"), lab_rank=np.array([2, 2, 2], dtype=np.int32),
        n_nodes=3 * n + 1, e_label=e_label, e_att=e_att,
        front=np.array([0, 2 * n], dtype=np.int32),
        rear=np.array([], dtype=np.int32))


def _spikes_arrays(k: int, variant: int = 1) -> GraphArrays:
    """A rank-3 hub edge fan: k+2 edges sharing one threading chain."""
    if k < 0:
        raise InvariantViolation(f"need at least zero repetitions, got {k}")
    if variant not in (1, 2, 3):
        raise InvariantViolation(f"variant must be 1, 2 or 3, got {variant}")
    rows: List[Tuple[int, int, int]] = [(0, 1, 2)]
    j = np.arange(1, k + 1, dtype=np.int64)
    prevs = np.concatenate(([0], 3 + j[:-1])) if k else np.array([], dtype=np.int64)
    if variant == 1:
        chain = np.concatenate(([2], 3 + j[:-1])) if k else prevs
        body = np.column_stack((np.zeros(k, dtype=np.int64), 3 + j, chain))
        close = (0, 3 + k if k else 2, 3)
        front = (0, 1, 3)
    elif variant == 2:
        body = np.column_stack((prevs, np.ones(k, dtype=np.int64), 3 + j))
        close = (3 + k if k else 0, 1, 3)
        front = (3, 1, 2)
    else:
        chain = np.concatenate(([1], 3 + j[:-1])) if k else prevs
        body = np.column_stack((3 + j, chain, 2 * np.ones(k, dtype=np.int64)))
        close = (3 + k if k else 1, 3, 2)
        front = (0, 3, 2)
    e_att = np.empty((k + 2, 3), dtype=np.int32)
    e_att[0] = rows[0]
    if k:
        e_att[1:k + 1] = body
    e_att[k + 1] = close
    return GraphArrays(
        labels=("s",), lab_rank=np.array([3], dtype=np.int32),
        n_nodes=k + 4, e_label=np.zeros(k + 2, dtype=np.int32), e_att=e_att,
        front=np.array(front, dtype=np.int32),
        rear=np.array([], dtype=np.int32))


def _palindrome_arrays(half: np.ndarray, odd: bool) -> GraphArrays:
    """Edge-labeled path spelling half + mirror(half), front at both ends."""
    half = np.asarray(half, dtype=np.int32)
    if half.size < 1:
        raise InvariantViolation("palindrome half must have at least one letter")
    if not np.isin(half, (0, 1)).all():
        raise InvariantViolation("palindrome letters must be 0 (a) or 1 (b)")
    mirror = half[-2::-1] if odd else half[::-1]
    word = np.concatenate((half, mirror))
    n = word.size
    e_att = np.empty((n, 2), dtype=np.int32)
    e_att[:, 0] = np.arange(n, dtype=np.int32)
    e_att[:, 1] = np.arange(1, n + 1, dtype=np.int32)
    return GraphArrays(
        labels=("a", "b"), lab_rank=np.array([2, 2], dtype=np.int32),
        n_nodes=n + 1, e_label=word, e_att=e_att,
        front=np.array([0, n], dtype=np.int32),
        rear=np.array([], dtype=np.int32))


def _wheel_arrays(spokes: int) -> GraphArrays:
    """Rim cycle of t edges, one s spoke from the hub to each rim node."""
    if spokes < 2:
        raise InvariantViolation(
            f"a wheel needs at least 2 spokes to keep attachments repetition-free, "
            f"got {spokes}")
    k = spokes
    j = np.arange(1, k + 1, dtype=np.int32)
    succ = j % k + 1
    e_label = np.empty(2 * k, dtype=np.int32)
    e_att = np.empty((2 * k, 2), dtype=np.int32)
    e_label[0::2], e_label[1::2] = 1, 0  # t then s, labels sorted (s, t)
    e_att[0::2, 0], e_att[0::2, 1] = j, succ
    e_att[1::2, 0], e_att[1::2, 1] = 0, succ
    return GraphArrays(
        labels=("s", "t"), lab_rank=np.array([2, 2], dtype=np.int32),
        n_nodes=k + 1, e_label=e_label, e_att=e_att,
        front=np.array([], dtype=np.int32),
        rear=np.array([], dtype=np.int32))


def generate(name: str, edges: int, seed: Optional[int] = None,
             variant: int = 1) -> GraphArrays:
    """A member of the language with exactly `edges` edges, in array form.

    Raises InvariantViolation when no member of that size exists (see
    LangSpec.quantum / min_edges).  `seed` only matters for palindromes,
    where it picks the letters; `variant` only for spikes.
    """
    spec = lang(name)
    if not spec.valid_size(edges):
        raise InvariantViolation(
            f"{name} has no member with {edges} edges: sizes are "
            f"{spec.min_edges} + k*{spec.quantum}")
    if name == "abc":
        return _abc_arrays(edges // 3)
    if name == "spikes":
        return _spikes_arrays(edges - 2, variant)
    if name == "wheels":
        return _wheel_arrays(edges // 2)
    rng = np.random.default_rng(seed)
    half = rng.integers(0, 2, size=(edges + 1) // 2, dtype=np.int32)
    return _palindrome_arrays(half, odd=bool(edges % 2))


# -- Graph-level generators --------------------------------------------------


def gen_abc(n: int) -> Graph:
    """The abc member with n triples (3n edges)."""
    return _abc_arrays(n).to_graph()


def gen_spikes(k: int, variant: int = 1) -> Graph:
    """The spikes member with k repetitions (k+2 edges) of one variant."""
    return _spikes_arrays(k, variant).to_graph()


def gen_palindrome(half: str, odd: bool = False) -> Graph:
    """Labeled path spelling the palindrome built from `half` over {a, b}."""
    letters = []
    for ch in half:
        if ch not in "ab":
            raise InvariantViolation(f"palindrome letters must be a or b, got {ch!r}")
        letters.append(0 if ch == "a" else 1)
    return _palindrome_arrays(np.array(letters, dtype=np.int32), odd).to_graph()


def gen_wheel(spokes: int) -> Graph:
    """The wheel with `spokes` rim nodes (2*spokes edges); needs spokes >= 2."""
    return _wheel_arrays(spokes).to_graph()


def sample_members(name: str, max_edges: int = 30, seed: int = 0,
                   words_per_size: int = 2) -> List[Graph]:
    """Deterministic family of members with at most `max_edges` edges."""
    spec = lang(name)
    out: List[Graph] = []
    if name == "abc":
        for n in range(1, max_edges // 3 + 1):
            out.append(gen_abc(n))
    elif name == "spikes":
        for variant in (1, 2, 3):
            for k in range(0, max_edges - 1):
                out.append(gen_spikes(k, variant))
    elif name == "wheels":
        for spokes in range(2, max_edges // 2 + 1):
            out.append(gen_wheel(spokes))
    elif name == "palindromes":
        rng = np.random.default_rng(seed)
        for edges in range(1, max_edges + 1):
            for _ in range(words_per_size):
                half = rng.integers(0, 2, size=(edges + 1) // 2, dtype=np.int32)
                out.append(_palindrome_arrays(half, odd=bool(edges % 2)).to_graph())
    else:
        raise InvariantViolation(f"no sampler for language {name!r}")
    return out


def shuffle_edges(g: Graph, seed: int) -> Graph:
    """Same graph with the edge list permuted."""
    rng = np.random.default_rng(seed)
    perm = rng.permutation(len(g.edges))
    return Graph(nodes=g.nodes, edges=tuple(g.edges[i] for i in perm),
                 front=g.front, rear=g.rear)


# -- mutations ----------------------------------------------------------------


def _relabel(g: Graph, rng, vocab: Vocabulary) -> Optional[Graph]:
    if not g.edges:
        return None
    i = int(rng.integers(len(g.edges)))
    e = g.edges[i]
    others = sorted(l for l, r in vocab.items() if r == len(e.att) and l != e.label)
    if not others:
        return None
    new_label = others[int(rng.integers(len(others)))]
    edges = list(g.edges)
    edges[i] = e._replace(label=new_label)
    return Graph(g.nodes, tuple(edges), g.front, g.rear)


def _swap_att(g: Graph, rng, vocab: Vocabulary) -> Optional[Graph]:
    wide = [i for i, e in enumerate(g.edges) if len(e.att) >= 2]
    if not wide:
        return None
    i = wide[int(rng.integers(len(wide)))]
    e = g.edges[i]
    p, q = rng.choice(len(e.att), size=2, replace=False)
    att = list(e.att)
    att[p], att[q] = att[q], att[p]
    edges = list(g.edges)
    edges[i] = e._replace(att=tuple(att))
    return Graph(g.nodes, tuple(edges), g.front, g.rear)


def _delete_edge(g: Graph, rng, vocab: Vocabulary) -> Optional[Graph]:
    if not g.edges:
        return None
    i = int(rng.integers(len(g.edges)))
    edges = list(g.edges)
    del edges[i]
    return Graph(g.nodes, tuple(edges), g.front, g.rear)


def _retarget(g: Graph, rng, vocab: Vocabulary) -> Optional[Graph]:
    if not g.edges:
        return None
    i = int(rng.integers(len(g.edges)))
    e = g.edges[i]
    p = int(rng.integers(len(e.att)))
    candidates = [v for v in g.nodes if v not in e.att]
    if not candidates:
        return None
    v = candidates[int(rng.integers(len(candidates)))]
    att = list(e.att)
    att[p] = v
    edges = list(g.edges)
    edges[i] = e._replace(att=tuple(att))
    return Graph(g.nodes, tuple(edges), g.front, g.rear)


_MUTATIONS = (_relabel, _swap_att, _delete_edge, _retarget)


def mutate(g: Graph, rng: np.random.Generator, vocab: Vocabulary) -> Optional[Graph]:
    """One random structural edit: relabel, attachment swap, edge deletion,
    or retargeting one attachment.  Returns a valid graph or None if no edit
    applies.  The result may or may not stay in the language; callers must
    consult an oracle."""
    for op_index in rng.permutation(len(_MUTATIONS)):
        out = _MUTATIONS[op_index](g, rng, vocab)
        if out is not None:
            return out.validate()
    return None
