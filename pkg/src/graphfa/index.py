"""Unread-edge candidate lookup for the linear recognizer.

Both structures answer the same query: an unread edge with the transition's
label whose bound attachment positions carry exactly the required front
nodes and whose remaining positions carry nodes the run has never
encountered.

SimpleIndex keeps one doubly-linked list of unread edges per label and
scans it on every query, checking the full predicate per edge.

EdgeIndex makes the query a hash probe: for every signature (label, set of
bound positions) of the automaton, edges are bucketed by their attachments
at the bound positions.  The bucket invariant — member iff unread and every
attachment outside the bound positions is unencountered — is maintained
eagerly: reading an edge unlinks it everywhere, encountering a node unlinks
each incident edge from every bucket whose signature leaves that position
unbound.  Each (edge, signature) pair is unlinked at most once, so index
maintenance over a whole run is linear in edges times signatures.

Hash tables are fixed-capacity open-addressing arrays sized at build time
(next power of two at or above twice the label's edge count).  A cell stays
claimed by its key after its bucket empties, keeping probe sequences valid
without tombstones.
"""

from __future__ import annotations

from typing import List, Optional

import numpy as np

from .engine import GraphArrays, Plan
from .errors import InternalError

FNV_OFFSET = 0xCBF29CE484222325
FNV_PRIME = 0x100000001B3
MASK64 = (1 << 64) - 1


def fnv1a(values) -> int:
    h = FNV_OFFSET
    for v in values:
        h ^= int(v) & MASK64
        h = (h * FNV_PRIME) & MASK64
    return h


def _pow2_at_least(n: int) -> int:
    c = 2
    while c < n:
        c <<= 1
    return c


class SimpleIndex:
    """Per-label doubly-linked lists of unread edges, scanned on lookup."""

    def __init__(self, plan: Plan, arrays: GraphArrays):
        self.plan = plan
        self.arrays = arrays
        n_edges = arrays.n_edges
        self.read = np.zeros(n_edges, dtype=np.bool_)
        self.enc = np.zeros(arrays.n_nodes, dtype=np.bool_)
        for v in arrays.front:
            self.enc[v] = True
        self.head = np.full(len(plan.labels), -1, dtype=np.int64)
        self.nxt = np.full(n_edges, -1, dtype=np.int64)
        self.prv = np.full(n_edges, -1, dtype=np.int64)
        for e in range(n_edges - 1, -1, -1):
            lab = int(arrays.e_label[e])
            old = int(self.head[lab])
            self.nxt[e] = old
            if old >= 0:
                self.prv[old] = e
            self.head[lab] = e
        self.unlinks = 0
        self.front: Optional[np.ndarray] = None  # set by the run loop

    def lookup(self, k: int) -> int:
        """First unread matching edge for plan transition slot k, or -1."""
        plan, arrays, F = self.plan, self.arrays, self.front
        b0, b1 = int(plan.b_off[k]), int(plan.b_off[k + 1])
        f0, f1 = int(plan.f_off[k]), int(plan.f_off[k + 1])
        e = int(self.head[int(plan.t_label[k])])
        while e >= 0:
            ok = True
            for i in range(b0, b1):
                if arrays.e_att[e, plan.b_pos[i]] != F[plan.b_slot[i]]:
                    ok = False
                    break
            if ok:
                for i in range(f0, f1):
                    if self.enc[arrays.e_att[e, plan.f_pos[i]]]:
                        ok = False
                        break
            if ok:
                return e
            e = int(self.nxt[e])
        return -1

    def on_read(self, e: int) -> None:
        if self.read[e]:
            raise InternalError(f"edge {e} read twice")
        self.read[e] = True
        p, n = int(self.prv[e]), int(self.nxt[e])
        if p >= 0:
            self.nxt[p] = n
        else:
            self.head[int(self.arrays.e_label[e])] = n
        if n >= 0:
            self.prv[n] = p
        self.unlinks += 1

    def on_encounter(self, v: int) -> None:
        if self.enc[v]:
            raise InternalError(f"node {v} encountered twice")
        self.enc[v] = True

    def audit(self) -> None:
        """Each unread edge sits in its label list exactly once; read edges in none."""
        seen = np.zeros(self.arrays.n_edges, dtype=np.int64)
        for lab in range(len(self.plan.labels)):
            e = int(self.head[lab])
            prev = -1
            while e >= 0:
                if int(self.arrays.e_label[e]) != lab:
                    raise InternalError(f"edge {e} filed under the wrong label")
                if int(self.prv[e]) != prev:
                    raise InternalError("label list back-link broken")
                seen[e] += 1
                prev = e
                e = int(self.nxt[e])
        for e in range(self.arrays.n_edges):
            want = 0 if self.read[e] else 1
            if int(seen[e]) != want:
                raise InternalError(f"edge {e} appears {int(seen[e])} times, expected {want}")


class EdgeIndex:
    """Signature-keyed hash buckets of unread-edge lists."""

    def __init__(self, plan: Plan, arrays: GraphArrays):
        self.plan = plan
        self.arrays = arrays
        n_edges = arrays.n_edges
        n_sigs = plan.n_sigs
        self.read = np.zeros(n_edges, dtype=np.bool_)
        self.enc = np.zeros(arrays.n_nodes, dtype=np.bool_)
        for v in arrays.front:
            self.enc[v] = True

        label_count = np.zeros(len(plan.labels), dtype=np.int64)
        for e in range(n_edges):
            label_count[arrays.e_label[e]] += 1
        self.cap = np.array(
            [_pow2_at_least(2 * max(1, int(label_count[plan.sig_label[s]])))
             for s in range(n_sigs)], dtype=np.int64)
        self.tb_off = np.zeros(n_sigs + 1, dtype=np.int64)
        np.cumsum(self.cap, out=self.tb_off[1:])
        total = int(self.tb_off[-1])
        self.cell_keys: List[Optional[tuple]] = [None] * total
        self.cell_head = np.full(total, -1, dtype=np.int64)

        # slot w of edge e = position of its signature in the label's list
        w = max(1, plan.sigs_per_label)
        self.w = w
        self.nxt = np.full((n_edges, w), -1, dtype=np.int64)
        self.prv = np.full((n_edges, w), -1, dtype=np.int64)
        self.cell = np.full((n_edges, w), -1, dtype=np.int64)
        self.linked = np.zeros((n_edges, w), dtype=np.bool_)

        inc_count = np.zeros(arrays.n_nodes + 1, dtype=np.int64)
        for e in range(n_edges):
            rank = int(arrays.lab_rank[arrays.e_label[e]])
            for p in range(rank):
                inc_count[arrays.e_att[e, p] + 1] += 1
        self.inc_off = np.cumsum(inc_count)
        self.inc_edge = np.zeros(int(self.inc_off[-1]), dtype=np.int64)
        self.inc_pos = np.zeros(int(self.inc_off[-1]), dtype=np.int64)
        fill = self.inc_off[:-1].copy()
        for e in range(n_edges):
            rank = int(arrays.lab_rank[arrays.e_label[e]])
            for p in range(rank):
                v = int(arrays.e_att[e, p])
                self.inc_edge[fill[v]] = e
                self.inc_pos[fill[v]] = p
                fill[v] += 1

        self.unlinks = 0
        self.front: Optional[np.ndarray] = None  # set by the run loop
        for e in range(n_edges):
            lab = int(arrays.e_label[e])
            for w_i, s in enumerate(range(int(plan.ls_off[lab]), int(plan.ls_off[lab + 1]))):
                self._try_link(e, w_i, int(plan.ls_sig[s]))

    def _edge_key(self, e: int, sig: int) -> tuple:
        plan = self.plan
        k0, k1 = int(plan.sk_off[sig]), int(plan.sk_off[sig + 1])
        return tuple(int(self.arrays.e_att[e, plan.sk_pos[i]]) for i in range(k0, k1))

    def _try_link(self, e: int, w_i: int, sig: int) -> None:
        """Insert (e, sig) unless the bucket invariant already excludes it."""
        plan = self.plan
        mask = int(plan.sig_mask[sig])
        rank = int(self.arrays.lab_rank[self.arrays.e_label[e]])
        for p in range(rank):
            if not (mask >> p) & 1 and self.enc[self.arrays.e_att[e, p]]:
                return
        c = self._claim(sig, self._edge_key(e, sig))
        old = int(self.cell_head[c])
        self.nxt[e, w_i] = old
        self.prv[e, w_i] = -1
        if old >= 0:
            self.prv[old, w_i] = e
        self.cell_head[c] = e
        self.cell[e, w_i] = c
        self.linked[e, w_i] = True

    def _claim(self, sig: int, key: tuple) -> int:
        base = int(self.tb_off[sig])
        cap = int(self.cap[sig])
        i = fnv1a(key) & (cap - 1)
        while True:
            c = base + i
            if self.cell_keys[c] is None:
                self.cell_keys[c] = key
                return c
            if self.cell_keys[c] == key:
                return c
            i = (i + 1) & (cap - 1)

    def lookup(self, k: int) -> int:
        """Bucket head for plan transition slot k's signature and key, or -1."""
        plan, F = self.plan, self.front
        sig = int(plan.t_sig[k])
        b0, b1 = int(plan.b_off[k]), int(plan.b_off[k + 1])
        key = tuple(int(F[plan.b_slot[i]]) for i in range(b0, b1))
        base = int(self.tb_off[sig])
        cap = int(self.cap[sig])
        i = fnv1a(key) & (cap - 1)
        while True:
            c = base + i
            stored = self.cell_keys[c]
            if stored is None:
                return -1
            if stored == key:
                return int(self.cell_head[c])
            i = (i + 1) & (cap - 1)

    def _unlink(self, e: int, w_i: int) -> None:
        p, n = int(self.prv[e, w_i]), int(self.nxt[e, w_i])
        if p >= 0:
            self.nxt[p, w_i] = n
        else:
            self.cell_head[int(self.cell[e, w_i])] = n
        if n >= 0:
            self.prv[n, w_i] = p
        self.linked[e, w_i] = False
        self.unlinks += 1

    def on_read(self, e: int) -> None:
        if self.read[e]:
            raise InternalError(f"edge {e} read twice")
        self.read[e] = True
        lab = int(self.arrays.e_label[e])
        n_w = int(self.plan.ls_off[lab + 1] - self.plan.ls_off[lab])
        for w_i in range(n_w):
            if self.linked[e, w_i]:
                self._unlink(e, w_i)

    def on_encounter(self, v: int) -> None:
        if self.enc[v]:
            raise InternalError(f"node {v} encountered twice")
        self.enc[v] = True
        plan = self.plan
        for i in range(int(self.inc_off[v]), int(self.inc_off[v + 1])):
            e = int(self.inc_edge[i])
            p = int(self.inc_pos[i])
            lab = int(self.arrays.e_label[e])
            for w_i, s_i in enumerate(range(int(plan.ls_off[lab]), int(plan.ls_off[lab + 1]))):
                sig = int(plan.ls_sig[s_i])
                if self.linked[e, w_i] and not (int(plan.sig_mask[sig]) >> p) & 1:
                    self._unlink(e, w_i)

    def audit(self) -> None:
        """Full rescan of the bucket invariant; raises on any violation."""
        plan, arrays = self.plan, self.arrays
        for e in range(arrays.n_edges):
            lab = int(arrays.e_label[e])
            rank = int(arrays.lab_rank[lab])
            for w_i, s_i in enumerate(range(int(plan.ls_off[lab]), int(plan.ls_off[lab + 1]))):
                sig = int(plan.ls_sig[s_i])
                mask = int(plan.sig_mask[sig])
                should = not self.read[e] and all(
                    (mask >> p) & 1 or not self.enc[arrays.e_att[e, p]]
                    for p in range(rank))
                if bool(self.linked[e, w_i]) != should:
                    raise InternalError(
                        f"bucket invariant broken for edge {e}, signature {sig}: "
                        f"linked={bool(self.linked[e, w_i])}, expected {should}")
                if self.linked[e, w_i]:
                    c = int(self.cell[e, w_i])
                    if self.cell_keys[c] != self._edge_key(e, sig):
                        raise InternalError(f"edge {e} sits in a bucket with a foreign key")
        for c in range(len(self.cell_keys)):
            e = int(self.cell_head[c])
            prev = -1
            while e >= 0:
                slots = np.where((self.cell[e] == c) & self.linked[e])[0]
                if len(slots) != 1:
                    raise InternalError("bucket membership not uniquely slotted")
                w_i = int(slots[0])
                if int(self.prv[e, w_i]) != prev:
                    raise InternalError("bucket list back-link broken")
                prev = e
                e = int(self.nxt[e, w_i])
