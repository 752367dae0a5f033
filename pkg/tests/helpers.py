"""Shared test utilities: word sampling, NFA string simulation, random
typed symbols/words/regexes for property tests."""

import numpy as np

from graphfa.automaton import TypedAutomaton
from graphfa.model import AtomSymbol, BlankSymbol, make_atom, make_blank
from graphfa.regex import Alt, Concat, Star, Sym


def nfa_accepts_word(auto: TypedAutomaton, word) -> bool:
    """Set-of-states simulation over full-symbol equality (text form)."""
    cur = {auto.start}
    for sym in word:
        text = str(sym)
        cur = {t.dst for t in auto.transitions
               if t.src in cur and str(t.sym) == text}
        if not cur:
            return False
    return bool(cur & auto.final)


def enum_words(auto: TypedAutomaton, max_syms: int, cap: int = 2000):
    """All accepted symbol words of length <= max_syms (DFS, capped)."""
    out = []
    stack = [(auto.start, ())]
    while stack and len(out) < cap:
        state, word = stack.pop()
        if state in auto.final and word:
            out.append(word)
        if len(word) == max_syms:
            continue
        for _, t in auto.out(state):
            stack.append((t.dst, word + (t.sym,)))
    return out


def sample_ast_word(ast, rng, star_reps=2):
    """One random word of the regex's language."""
    if isinstance(ast, Sym):
        return [ast.sym]
    if isinstance(ast, Concat):
        out = []
        for part in ast.parts:
            out.extend(sample_ast_word(part, rng, star_reps))
        return out
    if isinstance(ast, Alt):
        pick = ast.parts[rng.integers(len(ast.parts))]
        return sample_ast_word(pick, rng, star_reps)
    if isinstance(ast, Star):
        out = []
        for _ in range(int(rng.integers(star_reps + 1))):
            out.extend(sample_ast_word(ast.child, rng, star_reps))
        return out
    raise TypeError(ast)


def random_atom(rng, vocab, front_arity=None):
    """A random valid atom; front arity constrained when given."""
    for _ in range(50):
        label = sorted(vocab)[rng.integers(len(vocab))]
        rank = vocab[label]
        if front_arity is None:
            m = int(rng.integers(0, rank + 2))
        else:
            m = front_arity
        # nodes above the rank must all sit in the front
        extra = int(rng.integers(0, m + 1)) if m else 0
        n = rank + min(extra, m)
        if m > n:
            continue
        pool = list(range(1, n + 1))
        rng.shuffle(pool)
        front = []
        for i in range(rank + 1, n + 1):
            front.append(i)
        for v in pool:
            if len(front) == m:
                break
            if v not in front:
                front.append(v)
        if len(front) != m:
            continue
        front = list(front)
        rng.shuffle(front)
        k = int(rng.integers(0, n + 1))
        rear = list(rng.permutation(np.arange(1, n + 1))[:k])
        try:
            return make_atom(label, rank, tuple(front), tuple(int(r) for r in rear))
        except Exception:
            continue
    return None


def random_word(rng, vocab, max_len=6):
    """A random type-valid symbol word (non-empty)."""
    for _ in range(100):
        word = []
        cur = None
        n_syms = int(rng.integers(1, max_len + 1))
        ok = True
        for _ in range(n_syms):
            if cur == 0 and rng.random() < 0.5:
                break
            use_blank = cur is not None and cur > 0 and rng.random() < 0.2
            if use_blank:
                k = int(rng.integers(0, cur + 1))
                rear = tuple(int(r) for r in rng.permutation(np.arange(1, cur + 1))[:k])
                sym = make_blank(cur, rear)
            else:
                sym = random_atom(rng, vocab, front_arity=cur)
                if sym is None:
                    ok = False
                    break
            word.append(sym)
            cur = len(sym.rear)
        if ok and word:
            return word
    raise RuntimeError("word sampler starved")


def random_typed_regex(rng, vocab, depth=3, front_arity=None):
    """A random well-typed regex AST, or None when sampling starves."""
    kind = rng.random()
    if depth == 0 or kind < 0.45:
        atom = random_atom(rng, vocab, front_arity)
        return None if atom is None else Sym(atom)
    if kind < 0.65:
        left = random_typed_regex(rng, vocab, depth - 1, front_arity)
        if left is None:
            return None
        from graphfa.regex import typecheck
        mid = typecheck(left)[1]
        right = random_typed_regex(rng, vocab, depth - 1, mid)
        return None if right is None else Concat((left, right))
    if kind < 0.85:
        left = random_typed_regex(rng, vocab, depth - 1, front_arity)
        if left is None:
            return None
        from graphfa.regex import typecheck
        m, n = typecheck(left)
        right = None
        for _ in range(10):
            cand = random_typed_regex(rng, vocab, depth - 1, m)
            if cand is not None and typecheck(cand) == (m, n):
                right = cand
                break
        return Alt((left, right)) if right is not None else left
    m = front_arity if front_arity is not None else int(rng.integers(0, 3))
    for _ in range(10):
        child = random_typed_regex(rng, vocab, depth - 1, m)
        if child is None:
            continue
        from graphfa.regex import typecheck
        if typecheck(child) == (m, m):
            return Star(child)
    return random_typed_regex(rng, vocab, 0, front_arity)
