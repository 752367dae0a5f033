"""Array layout and kernel dispatch for the linear recognizer.

A Dfa is flattened once into a Plan (per-state transition tables, bound and
fresh attachment positions, next-front recipes, query signatures) and a
Graph into GraphArrays (dense node ids, padded attachment matrix).  The run
kernels consume only these flat arrays.  Two engines exist: the Python
reference (hash buckets with eager unlinking, auditable) and the numba
kernels (anchor-sorted buckets with lazy deletion, built for large inputs).
The GRAPHFA_NUMBA environment variable selects one (0 = Python, 1 = require
numba, unset = numba when importable).  Both return a valid run; where a
transition has several candidate edges they may pick different ones, so on
a certified Dfa the engines agree on acceptance but not necessarily on the
witness.
"""

from __future__ import annotations

import os
import time
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

import numpy as np

from .automaton import Dfa
from .errors import InternalError, InvariantViolation
from .model import AtomSymbol, Graph, graph as make_graph

MAX_LABEL_RANK = 62  # bound-position sets live in an int64 bitmask


@dataclass
class Plan:
    """Flattened atom transitions of a Dfa plus its query signatures.

    All positions are 0-based here: b_pos/f_pos index attachment columns,
    b_slot indexes the front sequence.  r_src encodes the next front: a
    value v >= 0 copies old front slot v, v < 0 copies attachment column
    -(v+1) of the matched edge.  Blank transitions are not flattened; the
    recognizer consults the Dfa for them at termination.
    """

    dfa: Dfa
    labels: Tuple[str, ...]
    lab_rank: np.ndarray
    start: int
    ranks: np.ndarray
    final: np.ndarray
    t_off: np.ndarray
    t_label: np.ndarray
    t_target: np.ndarray
    t_sig: np.ndarray
    t_dfa: np.ndarray
    b_off: np.ndarray
    b_pos: np.ndarray
    b_slot: np.ndarray
    f_off: np.ndarray
    f_pos: np.ndarray
    r_off: np.ndarray
    r_src: np.ndarray
    sig_label: np.ndarray
    sig_mask: np.ndarray
    sk_off: np.ndarray
    sk_pos: np.ndarray
    ls_off: np.ndarray
    ls_sig: np.ndarray
    sig_fresh: np.ndarray
    max_b: int
    sigs_per_label: int
    max_state_rank: int

    @property
    def n_sigs(self) -> int:
        return len(self.sig_label)

    @property
    def n_atoms(self) -> int:
        return len(self.t_label)


def build_plan(dfa: Dfa) -> Plan:
    labels = tuple(sorted(dfa.vocab))
    lab_of = {l: i for i, l in enumerate(labels)}
    lab_rank = np.array([dfa.vocab[l] for l in labels], dtype=np.int32)
    if labels and int(lab_rank.max()) > MAX_LABEL_RANK:
        raise InvariantViolation(f"label rank above {MAX_LABEL_RANK} is not supported")

    n = dfa.n_states
    per_state: List[List[int]] = [[] for _ in range(n)]
    for i, t in enumerate(dfa.transitions):
        if isinstance(t.sym, AtomSymbol):
            per_state[t.src].append(i)

    sig_of: Dict[Tuple[int, Tuple[int, ...]], int] = {}
    flat: List[int] = []
    for q in range(n):
        flat.extend(per_state[q])
    for i in flat:
        sym = dfa.transitions[i].sym
        key = (lab_of[sym.label], tuple(p - 1 for p in sym.bound_positions()))
        sig_of.setdefault(key, 0)
    for ordinal, key in enumerate(sorted(sig_of)):
        sig_of[key] = ordinal

    t_off = np.zeros(n + 1, dtype=np.int32)
    t_label: List[int] = []
    t_target: List[int] = []
    t_sig: List[int] = []
    t_dfa: List[int] = []
    b_off, b_pos, b_slot = [0], [], []
    f_off, f_pos = [0], []
    r_off, r_src = [0], []
    for q in range(n):
        for i in per_state[q]:
            t = dfa.transitions[i]
            sym = t.sym
            t_label.append(lab_of[sym.label])
            t_target.append(t.dst)
            t_dfa.append(i)
            bound = tuple(p - 1 for p in sym.bound_positions())
            t_sig.append(sig_of[(lab_of[sym.label], bound)])
            for p in sym.bound_positions():
                b_pos.append(p - 1)
                b_slot.append(sym.front_slot(p))
            b_off.append(len(b_pos))
            for p in sym.fresh_positions():
                f_pos.append(p - 1)
            f_off.append(len(f_pos))
            for node in sym.rear:
                if node in sym.front:
                    r_src.append(sym.front.index(node))
                else:
                    r_src.append(-node)  # attachment column node-1 = -(-node)-1
            r_off.append(len(r_src))
        t_off[q + 1] = len(t_label)

    n_sigs = len(sig_of)
    sig_label = np.zeros(n_sigs, dtype=np.int32)
    sig_mask = np.zeros(n_sigs, dtype=np.int64)
    sk_off = [0]
    sk_pos: List[int] = []
    for key, ordinal in sorted(sig_of.items(), key=lambda kv: kv[1]):
        lab, positions = key
        sig_label[ordinal] = lab
        mask = 0
        for p in positions:
            mask |= 1 << p
        sig_mask[ordinal] = mask
        sk_pos.extend(positions)
        sk_off.append(len(sk_pos))

    ls_off = [0]
    ls_sig: List[int] = []
    for lab in range(len(labels)):
        for ordinal in range(n_sigs):
            if sig_label[ordinal] == lab:
                ls_sig.append(ordinal)
        ls_off.append(len(ls_sig))

    sig_fresh = np.zeros(n_sigs, dtype=np.int64)
    for s in range(n_sigs):
        rank = int(lab_rank[sig_label[s]])
        sig_fresh[s] = ((1 << rank) - 1) & ~int(sig_mask[s])

    def arr(x, dtype=np.int32):
        return np.array(x, dtype=dtype)

    max_b = max((sk_off[i + 1] - sk_off[i] for i in range(n_sigs)), default=0)
    sigs_per_label = max((ls_off[i + 1] - ls_off[i] for i in range(len(labels))), default=0)
    max_state_rank = int(max(dfa.ranks, default=0))
    return Plan(
        dfa=dfa, labels=labels, lab_rank=lab_rank, start=dfa.start,
        ranks=arr(list(dfa.ranks)), final=np.array([q in dfa.final for q in range(n)], dtype=np.bool_),
        t_off=t_off, t_label=arr(t_label), t_target=arr(t_target), t_sig=arr(t_sig),
        t_dfa=arr(t_dfa), b_off=arr(b_off), b_pos=arr(b_pos), b_slot=arr(b_slot),
        f_off=arr(f_off), f_pos=arr(f_pos), r_off=arr(r_off), r_src=arr(r_src),
        sig_label=sig_label, sig_mask=sig_mask, sk_off=arr(sk_off), sk_pos=arr(sk_pos),
        ls_off=arr(ls_off), ls_sig=arr(ls_sig), sig_fresh=sig_fresh, max_b=max_b,
        sigs_per_label=sigs_per_label, max_state_rank=max_state_rank,
    )


_PLAN_CACHE: Dict[int, Tuple[Dfa, Plan]] = {}


def plan_for(dfa: Dfa) -> Plan:
    """Build or reuse the Plan for this exact Dfa object."""
    hit = _PLAN_CACHE.get(id(dfa))
    if hit is not None and hit[0] is dfa:
        return hit[1]
    plan = build_plan(dfa)
    if len(_PLAN_CACHE) > 64:
        _PLAN_CACHE.clear()
    _PLAN_CACHE[id(dfa)] = (dfa, plan)
    return plan


@dataclass
class GraphArrays:
    """Dense array form of a Graph: nodes renumbered 0..n_nodes-1.

    e_att rows are padded with -1 beyond each label's rank.  node_ids maps
    dense ids back to the original node ids (None for natively generated
    graphs, whose ids are already dense).
    """

    labels: Tuple[str, ...]
    lab_rank: np.ndarray
    n_nodes: int
    e_label: np.ndarray
    e_att: np.ndarray
    front: np.ndarray
    rear: np.ndarray
    node_ids: Optional[tuple] = None

    @property
    def n_edges(self) -> int:
        return len(self.e_label)

    @classmethod
    def from_graph(cls, g: Graph) -> "GraphArrays":
        order = list(g.nodes)
        try:
            order.sort()
        except TypeError:
            pass
        idx = {v: i for i, v in enumerate(order)}
        rank_of: Dict[str, int] = {}
        for e in g.edges:
            if rank_of.setdefault(e.label, len(e.att)) != len(e.att):
                raise InvariantViolation(f"label {e.label!r} used with two different arities")
        labels = tuple(sorted(rank_of))
        lab_of = {l: i for i, l in enumerate(labels)}
        width = max(rank_of.values(), default=0)
        e_label = np.zeros(len(g.edges), dtype=np.int32)
        e_att = np.full((len(g.edges), width), -1, dtype=np.int32)
        for i, e in enumerate(g.edges):
            e_label[i] = lab_of[e.label]
            for j, v in enumerate(e.att):
                e_att[i, j] = idx[v]
        return cls(
            labels=labels,
            lab_rank=np.array([rank_of[l] for l in labels], dtype=np.int32),
            n_nodes=len(order),
            e_label=e_label,
            e_att=e_att,
            front=np.array([idx[v] for v in g.front], dtype=np.int32),
            rear=np.array([idx[v] for v in g.rear], dtype=np.int32),
            node_ids=tuple(order),
        )

    def to_graph(self) -> Graph:
        ids = self.node_ids or tuple(range(1, self.n_nodes + 1))
        edges = []
        for i in range(self.n_edges):
            rank = int(self.lab_rank[self.e_label[i]])
            edges.append((self.labels[self.e_label[i]],
                          tuple(ids[v] for v in self.e_att[i, :rank])))
        return make_graph(ids, edges,
                          tuple(ids[v] for v in self.front),
                          tuple(ids[v] for v in self.rear))

    def shuffled(self, seed: int) -> "GraphArrays":
        """Same graph with the edge list permuted; node numbering untouched."""
        rng = np.random.default_rng(seed)
        perm = rng.permutation(self.n_edges)
        return GraphArrays(
            labels=self.labels, lab_rank=self.lab_rank, n_nodes=self.n_nodes,
            e_label=self.e_label[perm], e_att=self.e_att[perm],
            front=self.front, rear=self.rear, node_ids=self.node_ids,
        )


def align(plan: Plan, arrays: GraphArrays) -> Optional[GraphArrays]:
    """Remap edge label ordinals into the plan's vocabulary.

    Returns None when an edge uses a label the plan does not know or uses a
    known label with the wrong arity; no symbol string can interpret to
    such a graph, so the caller rejects without running.
    """
    if arrays.labels == plan.labels and np.array_equal(arrays.lab_rank, plan.lab_rank):
        return arrays
    remap = np.zeros(max(1, len(arrays.labels)), dtype=np.int32)
    for i, name in enumerate(arrays.labels):
        if name not in plan.labels:
            remap[i] = -1
        else:
            j = plan.labels.index(name)
            remap[i] = j if int(arrays.lab_rank[i]) == int(plan.lab_rank[j]) else -1
    if arrays.n_edges:
        new_label = remap[arrays.e_label]
        if (new_label < 0).any():
            return None
    else:
        new_label = arrays.e_label
    width = int(plan.lab_rank.max()) if len(plan.labels) else 0
    e_att = arrays.e_att
    if e_att.shape[1] < width:
        padded = np.full((arrays.n_edges, width), -1, dtype=np.int32)
        padded[:, :e_att.shape[1]] = e_att
        e_att = padded
    return GraphArrays(
        labels=plan.labels, lab_rank=plan.lab_rank, n_nodes=arrays.n_nodes,
        e_label=new_label.astype(np.int32), e_att=e_att,
        front=arrays.front, rear=arrays.rear, node_ids=arrays.node_ids,
    )


@dataclass
class RawRun:
    """Kernel output: where the greedy run stopped and what it consumed."""

    state: int
    front: np.ndarray
    n_read: int
    taken: np.ndarray   # plan transition slots, one per step
    edges: np.ndarray   # matched edge ids, one per step
    build_s: float
    exec_s: float


_ENV = "GRAPHFA_NUMBA"


def numba_requested() -> Optional[bool]:
    """Tri-state env switch: False, True, or None for auto."""
    value = os.environ.get(_ENV)
    if value is None or value == "":
        return None
    if value == "0":
        return False
    if value == "1":
        return True
    raise InvariantViolation(f"{_ENV} must be unset, 0, or 1, not {value!r}")


def resolve_engine(name: Optional[str] = None) -> str:
    """Pick 'python' or 'numba'. Explicit name wins over the env switch."""
    if name not in (None, "auto", "python", "numba"):
        raise InvariantViolation(f"unknown engine {name!r}")
    if name in ("python", "numba"):
        choice: Optional[bool] = (name == "numba")
    else:
        choice = numba_requested()
    if choice is False:
        return "python"
    try:
        from . import engine_numba  # noqa: F401
        return "numba"
    except ImportError:
        if choice is True:
            raise InternalError("GRAPHFA_NUMBA=1 but numba is not importable")
        return "python"


def run(plan: Plan, arrays: GraphArrays, mode: str = "efficient",
        engine: Optional[str] = None, audit: bool = False) -> RawRun:
    """Execute the greedy run; times index build and execution separately.

    `arrays` must already be aligned to the plan's label ordering.
    `audit` (Python engine only) turns on the per-step invariant checks.
    """
    if mode not in ("efficient", "simple"):
        raise InvariantViolation(f"unknown index mode {mode!r}")
    which = resolve_engine(engine)
    if which == "numba" and not audit:
        from . import engine_numba as impl
    else:
        from . import engine_python as impl
    if mode == "efficient":
        return impl.run_efficient(plan, arrays, audit)
    return impl.run_simple(plan, arrays, audit)


def perf() -> float:
    return time.perf_counter()
