"""Numba tree-growing kernel.

Grows one binary classification tree best-first (largest count-weighted
Gini decrease splits first) into flat arrays. All randomness (bootstrap
rows, per-node feature subsets, ET thresholds) is drawn by the caller and
passed in, so the kernel is pure and the per-tree RNG stream is consumed
in a data-independent order.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def _eval_split(X, y, work, start, end, feats, uniform_row, random_thresholds):
    """Best split of work[start:end] among candidate features.

    Returns (feature, threshold, improvement); feature is -1 when the node
    is pure or no candidate separates it.
    """
    m = end - start
    pos = 0.0
    for i in range(start, end):
        pos += y[work[i]]
    if pos == 0.0 or pos == m:
        return -1, 0.0, 0.0
    parent = m - (pos * pos + (m - pos) * (m - pos)) / m

    best_f = -1
    best_thr = 0.0
    best_w = np.inf
    k = feats.shape[0]
    if random_thresholds:
        for jj in range(k):
            f = feats[jj]
            lo = X[work[start], f]
            hi = lo
            for i in range(start + 1, end):
                v = X[work[i], f]
                if v < lo:
                    lo = v
                elif v > hi:
                    hi = v
            if lo == hi:
                continue
            thr = lo + uniform_row[jj] * (hi - lo)
            if thr >= hi:  # rounding guard at the top edge
                thr = np.nextafter(hi, lo)
            nl = 0.0
            pl = 0.0
            for i in range(start, end):
                if X[work[i], f] <= thr:
                    nl += 1.0
                    pl += y[work[i]]
            nr = m - nl
            if nl == 0.0 or nr == 0.0:
                continue
            pr = pos - pl
            w = (
                nl - (pl * pl + (nl - pl) * (nl - pl)) / nl
                + nr - (pr * pr + (nr - pr) * (nr - pr)) / nr
            )
            if w < best_w - 1e-12:
                best_w = w
                best_f = f
                best_thr = thr
    else:
        vals = np.empty(m)
        for jj in range(k):
            f = feats[jj]
            for i in range(m):
                vals[i] = X[work[start + i], f]
            order = np.argsort(vals)
            cpos = 0.0
            for i in range(m - 1):
                oi = order[i]
                cpos += y[work[start + oi]]
                v = vals[oi]
                vn = vals[order[i + 1]]
                if v == vn:
                    continue
                nl = i + 1.0
                nr = m - nl
                pl = cpos
                pr = pos - pl
                w = (
                    nl - (pl * pl + (nl - pl) * (nl - pl)) / nl
                    + nr - (pr * pr + (nr - pr) * (nr - pr)) / nr
                )
                if w < best_w - 1e-12:
                    best_w = w
                    best_f = f
                    best_thr = 0.5 * (v + vn)
    if best_f < 0:
        return -1, 0.0, 0.0
    imp = parent - best_w
    if imp <= 1e-12:
        return -1, 0.0, 0.0
    return best_f, best_thr, imp


@njit(cache=True)
def grow_tree(X, y, rows, max_depth, max_leaf_nodes, min_samples_split,
              feat_candidates, uniforms, random_thresholds):
    """Returns flat node arrays (feature, threshold, improvement, left,
    right, n_samples, pos_fraction) and the node count. Leaves have
    left = right = -1."""
    max_nodes = 2 * max_leaf_nodes - 1
    feature = np.full(max_nodes, -1, np.int64)
    threshold = np.zeros(max_nodes)
    improvement = np.zeros(max_nodes)
    left = np.full(max_nodes, -1, np.int64)
    right = np.full(max_nodes, -1, np.int64)
    n_node = np.zeros(max_nodes, np.int64)
    pos_frac = np.zeros(max_nodes)

    work = rows.copy()
    n = work.shape[0]

    cap = max_leaf_nodes + 1  # open leaves never exceed the leaf budget
    c_node = np.full(cap, -1, np.int64)
    c_start = np.zeros(cap, np.int64)
    c_end = np.zeros(cap, np.int64)
    c_depth = np.zeros(cap, np.int64)
    c_feat = np.zeros(cap, np.int64)
    c_thr = np.zeros(cap)
    c_imp = np.zeros(cap)
    c_seq = np.zeros(cap, np.int64)
    c_active = np.zeros(cap, np.bool_)

    eval_count = 0
    seq = 0
    n_nodes = 1
    n_leaves = 1

    # root stats
    pos = 0.0
    for i in range(n):
        pos += y[work[i]]
    n_node[0] = n
    pos_frac[0] = pos / n

    if n >= min_samples_split and max_depth > 0:
        f, thr, imp = _eval_split(
            X, y, work, 0, n, feat_candidates[eval_count], uniforms[eval_count],
            random_thresholds,
        )
        eval_count += 1
        if f >= 0:
            c_node[0] = 0
            c_start[0] = 0
            c_end[0] = n
            c_depth[0] = 0
            c_feat[0] = f
            c_thr[0] = thr
            c_imp[0] = imp
            c_seq[0] = seq
            c_active[0] = True
            seq += 1

    while n_leaves < max_leaf_nodes:
        # pick the active candidate with the largest improvement
        best_slot = -1
        best_imp = 0.0
        best_seq = 0
        for s in range(cap):
            if not c_active[s]:
                continue
            if (
                best_slot < 0
                or c_imp[s] > best_imp + 1e-15
                or (abs(c_imp[s] - best_imp) <= 1e-15 and c_seq[s] < best_seq)
            ):
                best_slot = s
                best_imp = c_imp[s]
                best_seq = c_seq[s]
        if best_slot < 0:
            break

        node = c_node[best_slot]
        start = c_start[best_slot]
        end = c_end[best_slot]
        depth = c_depth[best_slot]
        f = c_feat[best_slot]
        thr = c_thr[best_slot]
        c_active[best_slot] = False

        # partition the node's rows in place
        i = start
        j = end - 1
        while i <= j:
            if X[work[i], f] <= thr:
                i += 1
            else:
                tmp = work[i]
                work[i] = work[j]
                work[j] = tmp
                j -= 1
        mid = i

        li = n_nodes
        ri = n_nodes + 1
        n_nodes += 2
        n_leaves += 1

        feature[node] = f
        threshold[node] = thr
        improvement[node] = c_imp[best_slot]
        left[node] = li
        right[node] = ri

        for child, cs, ce in ((li, start, mid), (ri, mid, end)):
            cm = ce - cs
            cpos = 0.0
            for t in range(cs, ce):
                cpos += y[work[t]]
            n_node[child] = cm
            pos_frac[child] = cpos / cm
            if depth + 1 < max_depth and cm >= min_samples_split and n_leaves < max_leaf_nodes:
                cf, cthr, cimp = _eval_split(
                    X, y, work, cs, ce, feat_candidates[eval_count],
                    uniforms[eval_count], random_thresholds,
                )
                eval_count += 1
                if cf >= 0:
                    slot = -1
                    for s in range(cap):
                        if not c_active[s]:
                            slot = s
                            break
                    c_node[slot] = child
                    c_start[slot] = cs
                    c_end[slot] = ce
                    c_depth[slot] = depth + 1
                    c_feat[slot] = cf
                    c_thr[slot] = cthr
                    c_imp[slot] = cimp
                    c_seq[slot] = seq
                    c_active[slot] = True
                    seq += 1

    return feature, threshold, improvement, left, right, n_node, pos_frac, n_nodes
