"""Numba-compiled run kernels over a sorted-bucket candidate index.

The Python engine maintains its hash buckets eagerly; these kernels trade
that for memory locality, which is what large inputs are bound by.
Signatures of one label are covered by anchor groups: every member
signature of a group binds the group's anchor column.  Build radix-sorts
one row per edge by the node in that column, so a bucket is a contiguous
run of rows and its key is the node itself: no hash tables, and the sort's
counting passes touch only small histograms.  Rows carry the edge id and
its attachments inline, so execution reads candidates as a forward scan.

Anchor columns are chosen per run, not per Dfa: a small sample of each
label's edges scores how many distinct nodes each column holds, and the
cover prefers discriminating columns, so a column that mostly repeats one
hub node is avoided whenever the signatures allow.  Short buckets keep the
lookup walk amortized constant.

Deletion is lazy.  Reading an edge or encountering a node only flips a bit
(both bitmaps stay cache-resident even at millions of edges); stale rows
are discarded when a lookup walks over them.  A row is dropped for good -
the bucket's cursor moves past it - once its edge is read or every member
signature of the group has an encountered node in a fresh column, both
irreversible.  A row that merely mismatches the current front stays, so a
lookup still returns exactly the edges the eager index would hold, in
bucket order.
"""

from __future__ import annotations

import time
from typing import List

import numpy as np
from numba import njit

from .engine import GraphArrays, Plan, RawRun
from .errors import InternalError

SAMPLE_EDGES = 4096


def _anchor_groups(plan: Plan, arrays: GraphArrays):
    """Greedy cover of each label's signatures by anchor columns.

    Returns (g_label, g_col, sig_group, gs_off, gs_sig, t_aslot).  A
    signature with no bound positions forms its own group with column -1
    (one bucket holding every row).  Column preference: sampled node
    distinctness first, then how many signatures the column covers.
    """
    n_sigs = plan.n_sigs
    sig_group = np.full(max(1, n_sigs), -1, np.int32)
    g_label: List[int] = []
    g_col: List[int] = []
    gs_off = [0]
    gs_sig: List[int] = []
    head_lab = arrays.e_label[:SAMPLE_EDGES]
    head_att = arrays.e_att[:SAMPLE_EDGES]
    for lab in range(len(plan.labels)):
        lo, hi = int(plan.ls_off[lab]), int(plan.ls_off[lab + 1])
        if lo == hi:
            continue
        rank = int(plan.lab_rank[lab])
        idx = np.flatnonzero(head_lab == lab)
        distinct = [int(np.unique(head_att[idx, c]).size) if idx.size else 1
                    for c in range(rank)]
        rest: List[int] = []
        for i in range(lo, hi):
            s = int(plan.ls_sig[i])
            if int(plan.sig_mask[s]) == 0:
                sig_group[s] = len(g_label)
                g_label.append(lab)
                g_col.append(-1)
                gs_sig.append(s)
                gs_off.append(len(gs_sig))
            else:
                rest.append(s)
        while rest:
            best = (-1, -1, 0)
            for c in range(rank):
                hit = sum(1 for s in rest if (int(plan.sig_mask[s]) >> c) & 1)
                if hit and (distinct[c], hit, -c) > best:
                    best = (distinct[c], hit, -c)
            col = -best[2]
            grabbed = [s for s in rest if (int(plan.sig_mask[s]) >> col) & 1]
            rest = [s for s in rest if not (int(plan.sig_mask[s]) >> col) & 1]
            for s in grabbed:
                sig_group[s] = len(g_label)
            g_label.append(lab)
            g_col.append(col)
            gs_sig.extend(grabbed)
            gs_off.append(len(gs_sig))
    t_aslot = np.full(max(1, plan.n_atoms), -1, np.int32)
    for k in range(plan.n_atoms):
        col = g_col[int(sig_group[plan.t_sig[k]])]
        if col >= 0:
            for i in range(int(plan.b_off[k]), int(plan.b_off[k + 1])):
                if int(plan.b_pos[i]) == col:
                    t_aslot[k] = plan.b_slot[i]
                    break
            if t_aslot[k] < 0:
                raise InternalError("transition misses its group's anchor column")
    return (np.array(g_label, np.int32), np.array(g_col, np.int32),
            sig_group, np.array(gs_off, np.int32), np.array(gs_sig, np.int32),
            t_aslot)


@njit(cache=True)
def _build_edge(n_nodes, e_label, e_att, front,
                g_label, g_col, st_arr, rb_off,
                rows, tmp, cur_pack, enc_bits):
    n_edges = e_label.shape[0]
    for i in range(front.shape[0]):
        v = front[i]
        enc_bits[v >> 6] |= np.int64(1) << (v & 63)
    hist = np.zeros(2048, np.int64)
    for g in range(g_label.shape[0]):
        lab = g_label[g]
        st = st_arr[g]
        rank = st - 1
        col = g_col[g]
        kc = 1 + col
        base = rb_off[g]
        # one row per edge of the label: [edge id, attachments...]; an edge
        # with a repeated attachment can never match a symbol and is dropped
        m = np.int64(0)
        for e in range(n_edges):
            if e_label[e] != lab:
                continue
            dup = False
            for p in range(rank):
                for q in range(p + 1, rank):
                    if e_att[e, p] == e_att[e, q]:
                        dup = True
                        break
                if dup:
                    break
            if dup:
                continue
            o = base + m * st
            rows[o] = e
            for p in range(rank):
                rows[o + 1 + p] = e_att[e, p]
            m += 1
        if m == 0:
            continue
        if col < 0:
            # anchorless group: a single bucket holding every row
            cur_pack[g, 0] = m
            continue
        if m > 1:
            # stable LSD radix by the anchor node, 11-bit digits
            nb = 0
            mv = n_nodes - 1
            while mv > 0:
                nb += 1
                mv >>= 1
            npass = (nb + 10) // 11
            if npass < 1:
                npass = 1
            in_rows = True
            for d in range(npass):
                shift = 11 * d
                for i in range(2048):
                    hist[i] = 0
                if in_rows:
                    for j in range(m):
                        k = np.int64(rows[base + j * st + kc])
                        hist[(k >> shift) & 2047] += 1
                else:
                    for j in range(m):
                        k = np.int64(tmp[j * st + kc])
                        hist[(k >> shift) & 2047] += 1
                s = np.int64(0)
                for i in range(2048):
                    c = hist[i]
                    hist[i] = s
                    s += c
                if in_rows:
                    for j in range(m):
                        o = base + j * st
                        dg = (np.int64(rows[o + kc]) >> shift) & 2047
                        p = hist[dg]
                        hist[dg] = p + 1
                        do = p * st
                        for t in range(st):
                            tmp[do + t] = rows[o + t]
                else:
                    for j in range(m):
                        o = j * st
                        dg = (np.int64(tmp[o + kc]) >> shift) & 2047
                        p = hist[dg]
                        hist[dg] = p + 1
                        do = base + p * st
                        for t in range(st):
                            rows[do + t] = tmp[o + t]
                in_rows = not in_rows
            if not in_rows:
                for j in range(m * st):
                    rows[base + j] = tmp[j]
        # bucket boundaries: pack (start row << 32 | end row) per anchor node
        s_j = np.int64(0)
        prev = rows[base + kc]
        for j in range(1, m):
            va = rows[base + j * st + kc]
            if va != prev:
                cur_pack[g, prev] = (s_j << 32) | j
                s_j = j
                prev = va
        cur_pack[g, prev] = (s_j << 32) | m


@njit(cache=True)
def _exec_edge(start, t_off, t_sig, t_target,
               b_off, b_pos, b_slot, f_off, f_pos, r_off, r_src, t_aslot,
               sig_group, g_col, gs_off, gs_sig, sig_fresh, st_arr, rb_off,
               rows, cur_pack, enc_bits, read_bits,
               front0, max_state_rank,
               taken, edges, f_out):
    state = start
    flen = front0.shape[0]
    fw = max_state_rank if max_state_rank > 0 else 1
    F = np.empty(fw, np.int64)
    F2 = np.empty(fw, np.int64)
    for i in range(flen):
        F[i] = front0[i]
    n = 0
    while True:
        took = -1
        fnd = np.int64(-1)
        for k in range(t_off[state], t_off[state + 1]):
            g = sig_group[t_sig[k]]
            st = st_arr[g]
            gb = rb_off[g]
            if g_col[g] >= 0:
                va = F[t_aslot[k]]
            else:
                va = np.int64(0)
            pack = cur_pack[g, va]
            end = pack & 4294967295
            cur = pack >> 32
            i = cur
            adv = cur
            found = np.int64(-1)
            while i < end:
                ro = gb + i * st
                e = rows[ro]
                if (read_bits[e >> 6] >> (e & 63)) & 1:
                    if i == adv:
                        adv += 1
                    i += 1
                    continue
                ok = True
                for bi in range(b_off[k], b_off[k + 1]):
                    if rows[ro + 1 + b_pos[bi]] != F[b_slot[bi]]:
                        ok = False
                        break
                if ok:
                    for fi in range(f_off[k], f_off[k + 1]):
                        v = rows[ro + 1 + f_pos[fi]]
                        if (enc_bits[v >> 6] >> (v & 63)) & 1:
                            ok = False
                            break
                if ok:
                    found = ro
                    break
                # row unusable for this transition; drop it for good only if
                # no member signature of the group can ever use it either
                if i == adv:
                    emask = np.int64(0)
                    for p in range(st - 1):
                        v = rows[ro + 1 + p]
                        if (enc_bits[v >> 6] >> (v & 63)) & 1:
                            emask |= np.int64(1) << p
                    dead = True
                    for gi in range(gs_off[g], gs_off[g + 1]):
                        if (emask & sig_fresh[gs_sig[gi]]) == 0:
                            dead = False
                            break
                    if dead:
                        adv += 1
                i += 1
            if adv != cur:
                cur_pack[g, va] = (adv << 32) | end
            if found >= 0:
                took = k
                fnd = found
                break
        if took < 0:
            break
        e = rows[fnd]
        taken[n] = took
        edges[n] = e
        read_bits[e >> 6] |= np.int64(1) << (e & 63)
        for fi in range(f_off[took], f_off[took + 1]):
            v = rows[fnd + 1 + f_pos[fi]]
            enc_bits[v >> 6] |= np.int64(1) << (v & 63)
        r0 = r_off[took]
        rl = r_off[took + 1] - r0
        for j in range(rl):
            src = r_src[r0 + j]
            if src >= 0:
                F2[j] = F[src]
            else:
                F2[j] = rows[fnd + 1 + (-src - 1)]
        for j in range(rl):
            F[j] = F2[j]
        flen = rl
        state = t_target[took]
        n += 1
    for i in range(flen):
        f_out[i] = F[i]
    return state, n, flen


@njit(cache=True)
def _build_simple(n_nodes, e_label, front, n_labels):
    n_edges = e_label.shape[0]
    enc = np.zeros(n_nodes, np.bool_)
    for i in range(front.shape[0]):
        enc[front[i]] = True
    read = np.zeros(n_edges, np.bool_)
    head = np.full(n_labels if n_labels > 0 else 1, -1, np.int32)
    nxt = np.full(n_edges, -1, np.int32)
    prv = np.full(n_edges, -1, np.int32)
    for e in range(n_edges - 1, -1, -1):
        lab = e_label[e]
        old = head[lab]
        nxt[e] = old
        if old >= 0:
            prv[old] = e
        head[lab] = e
    return enc, read, head, nxt, prv


@njit(cache=True)
def _exec_simple(start, t_off, t_label, t_target,
                 b_off, b_pos, b_slot, f_off, f_pos, r_off, r_src,
                 e_label, e_att, front0, max_state_rank,
                 enc, read, head, nxt, prv,
                 taken, edges, f_out):
    state = start
    flen = front0.shape[0]
    fw = max_state_rank if max_state_rank > 0 else 1
    F = np.empty(fw, np.int64)
    F2 = np.empty(fw, np.int64)
    for i in range(flen):
        F[i] = front0[i]
    n = 0
    while True:
        took = -1
        edge = -1
        for k in range(t_off[state], t_off[state + 1]):
            lab = t_label[k]
            e = head[lab]
            while e >= 0:
                ok = True
                for i in range(b_off[k], b_off[k + 1]):
                    if e_att[e, b_pos[i]] != F[b_slot[i]]:
                        ok = False
                        break
                if ok:
                    for i in range(f_off[k], f_off[k + 1]):
                        if enc[e_att[e, f_pos[i]]]:
                            ok = False
                            break
                if ok:
                    break
                e = nxt[e]
            if e >= 0:
                took = k
                edge = e
                break
        if took < 0:
            break
        taken[n] = took
        edges[n] = edge
        read[edge] = True
        p = prv[edge]
        nx = nxt[edge]
        if p >= 0:
            nxt[p] = nx
        else:
            head[e_label[edge]] = nx
        if nx >= 0:
            prv[nx] = p
        for i in range(f_off[took], f_off[took + 1]):
            enc[e_att[edge, f_pos[i]]] = True
        r0 = r_off[took]
        rl = r_off[took + 1] - r0
        for j in range(rl):
            src = r_src[r0 + j]
            if src >= 0:
                F2[j] = F[src]
            else:
                F2[j] = e_att[edge, -src - 1]
        for j in range(rl):
            F[j] = F2[j]
        flen = rl
        state = t_target[took]
        n += 1
    for i in range(flen):
        f_out[i] = F[i]
    return state, n, flen


def run_efficient(plan: Plan, arrays: GraphArrays, audit: bool = False) -> RawRun:
    if audit:
        raise InternalError("audit runs use the python engine")
    n_edges = arrays.n_edges
    n_nodes = arrays.n_nodes
    t0 = time.perf_counter()
    n_labels = len(plan.labels)
    g_label, g_col, sig_group, gs_off, gs_sig, t_aslot = _anchor_groups(plan, arrays)
    n_groups = len(g_label)
    if n_edges:
        label_count = np.bincount(arrays.e_label, minlength=n_labels)
    else:
        label_count = np.zeros(max(1, n_labels), np.int64)
    st_arr = (1 + plan.lab_rank[g_label]).astype(np.int64)
    sizes = label_count[g_label] * st_arr
    rb_off = np.zeros(n_groups + 1, np.int64)
    if n_groups:
        np.cumsum(sizes, out=rb_off[1:])
    rows = np.empty(max(1, int(rb_off[-1])), np.int32)
    tmp = np.empty(max(1, int(sizes.max()) if n_groups else 1), np.int32)
    cur_pack = np.zeros((max(1, n_groups), max(1, n_nodes)), np.int64)
    enc_bits = np.zeros(max(1, (n_nodes + 63) // 64), np.int64)
    read_bits = np.zeros(max(1, (n_edges + 63) // 64), np.int64)
    _build_edge(n_nodes, arrays.e_label, arrays.e_att, arrays.front,
                g_label, g_col, st_arr, rb_off,
                rows, tmp, cur_pack, enc_bits)
    t1 = time.perf_counter()
    taken = np.full(n_edges, -1, np.int32)
    edges = np.full(n_edges, -1, np.int32)
    f_out = np.zeros(max(1, plan.max_state_rank), np.int64)
    state, n, flen = _exec_edge(
        plan.start, plan.t_off, plan.t_sig, plan.t_target,
        plan.b_off, plan.b_pos, plan.b_slot, plan.f_off, plan.f_pos,
        plan.r_off, plan.r_src, t_aslot,
        sig_group, g_col, gs_off, gs_sig,
        plan.sig_fresh, st_arr, rb_off,
        rows, cur_pack, enc_bits, read_bits,
        arrays.front, plan.max_state_rank,
        taken, edges, f_out)
    t2 = time.perf_counter()
    return RawRun(state=int(state), front=f_out[:flen], n_read=int(n),
                  taken=taken[:n], edges=edges[:n],
                  build_s=t1 - t0, exec_s=t2 - t1)


def run_simple(plan: Plan, arrays: GraphArrays, audit: bool = False) -> RawRun:
    if audit:
        raise InternalError("audit runs use the python engine")
    t0 = time.perf_counter()
    enc, read, head, nxt, prv = _build_simple(
        arrays.n_nodes, arrays.e_label, arrays.front, len(plan.labels))
    t1 = time.perf_counter()
    n_edges = arrays.n_edges
    taken = np.full(n_edges, -1, np.int32)
    edges = np.full(n_edges, -1, np.int32)
    f_out = np.zeros(max(1, plan.max_state_rank), np.int64)
    state, n, flen = _exec_simple(
        plan.start, plan.t_off, plan.t_label, plan.t_target,
        plan.b_off, plan.b_pos, plan.b_slot, plan.f_off, plan.f_pos,
        plan.r_off, plan.r_src,
        arrays.e_label, arrays.e_att, arrays.front, plan.max_state_rank,
        enc, read, head, nxt, prv,
        taken, edges, f_out)
    t2 = time.perf_counter()
    return RawRun(state=int(state), front=f_out[:flen], n_read=int(n),
                  taken=taken[:n], edges=edges[:n],
                  build_s=t1 - t0, exec_s=t2 - t1)
