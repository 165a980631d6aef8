"""Numba kernels for constrained second-order gradient boosting.

Everything hot lives here: an xorshift64* generator for in-kernel
subsampling, exact greedy split finding with interaction and monotonicity
handling, and full-ensemble prediction. Trees are stored as flat parallel
arrays (feature, threshold, left, right, weight) with child indices local to
each tree; `feature == -1` marks a leaf.
"""
from __future__ import annotations

import numpy as np
from numba import njit

_INF = np.inf


@njit(cache=True, inline="always")
def _next_u64(state):
    s = state[0]
    s ^= s >> np.uint64(12)
    s ^= s << np.uint64(25)
    s ^= s >> np.uint64(27)
    state[0] = s
    return s * np.uint64(0x2545F4914F6CDD1D)


@njit(cache=True, inline="always")
def _soft(g, alpha):
    # L1 soft-thresholding of a gradient sum
    if g > alpha:
        return g - alpha
    if g < -alpha:
        return g + alpha
    return 0.0


@njit(cache=True)
def _sample_sorted(pool, k, scratch, state):
    """k values drawn without replacement from `pool`, returned sorted."""
    n = pool.shape[0]
    for i in range(n):
        scratch[i] = pool[i]
    for j in range(k):
        r = j + np.int64(_next_u64(state) % np.uint64(n - j))
        t = scratch[j]
        scratch[j] = scratch[r]
        scratch[r] = t
    out = np.empty(k, np.int64)
    for j in range(k):
        out[j] = scratch[j]
    out.sort()
    return out


@njit(cache=True)
def _grow_tree(X, gvec, hvec, idx, level_allowed, tree_allowed, group_id,
               monotone, max_depth, min_cw, lam, gamma, alpha,
               feat, thr, left, right, weight):
    """Grow one tree over the rows in `idx` (permuted in place).

    The root split may use any allowed feature; every descendant split is
    restricted to the root feature's interaction group. Splits on monotone
    features are rejected when the left child's Newton-optimal weight
    exceeds the right child's, and the midpoint of the two child weights is
    propagated as a shared leaf-value bound. Returns the node count; child
    indices are local to this tree.
    """
    m = idx.shape[0]
    p = X.shape[1]
    maxn = 2 * m + 1
    st_start = np.empty(maxn, np.int64)
    st_end = np.empty(maxn, np.int64)
    st_depth = np.empty(maxn, np.int64)
    st_slot = np.empty(maxn, np.int64)
    st_grp = np.empty(maxn, np.int64)
    st_lo = np.empty(maxn, np.float64)
    st_hi = np.empty(maxn, np.float64)
    tmp = np.empty(m, np.int64)
    vals = np.empty(m, np.float64)

    sp = 0
    st_start[0] = 0
    st_end[0] = m
    st_depth[0] = 0
    st_slot[0] = 0
    st_grp[0] = -1
    st_lo[0] = -_INF
    st_hi[0] = _INF
    sp = 1
    n_nodes = 1

    while sp > 0:
        sp -= 1
        start = st_start[sp]
        end = st_end[sp]
        depth = st_depth[sp]
        slot = st_slot[sp]
        grp = st_grp[sp]
        lo = st_lo[sp]
        hi = st_hi[sp]

        G = 0.0
        H = 0.0
        for i in range(start, end):
            G += gvec[idx[i]]
            H += hvec[idx[i]]

        best_f = -1
        best_thr = 0.0
        best_wl = 0.0
        best_wr = 0.0
        if depth < max_depth and end - start >= 2:
            pn = _soft(G, alpha)
            parent_score = pn * pn / (H + lam)
            # the per-level column subset may miss the group entirely; fall
            # back to the per-tree subset in that case
            fallback = True
            for f in range(p):
                if level_allowed[depth, f] and (grp == -1 or group_id[f] == grp):
                    fallback = False
                    break
            best_gain = 0.0
            cnt = end - start
            for f in range(p):
                if grp != -1 and group_id[f] != grp:
                    continue
                if fallback:
                    if not tree_allowed[f]:
                        continue
                elif not level_allowed[depth, f]:
                    continue
                for i in range(cnt):
                    vals[i] = X[idx[start + i], f]
                order = np.argsort(vals[:cnt])
                sg = 0.0
                sh = 0.0
                for i in range(1, cnt):
                    r = order[i - 1]
                    sg += gvec[idx[start + r]]
                    sh += hvec[idx[start + r]]
                    vprev = vals[order[i - 1]]
                    vcur = vals[order[i]]
                    if vcur == vprev:
                        continue
                    HL = sh
                    HR = H - sh
                    if HL < min_cw or HR < min_cw:
                        continue
                    GL = sg
                    GR = G - sg
                    nl = _soft(GL, alpha)
                    nr = _soft(GR, alpha)
                    wl = -nl / (HL + lam)
                    wr = -nr / (HR + lam)
                    if monotone[f] and wl > wr:
                        continue
                    gain = 0.5 * (nl * nl / (HL + lam) + nr * nr / (HR + lam) - parent_score) - gamma
                    if gain > best_gain:
                        t = vprev + 0.5 * (vcur - vprev)
                        if t >= vcur:
                            t = vprev
                        best_gain = gain
                        best_f = f
                        best_thr = t
                        best_wl = wl
                        best_wr = wr

        if best_f < 0:
            feat[slot] = -1
            thr[slot] = 0.0
            left[slot] = -1
            right[slot] = -1
            w = -_soft(G, alpha) / (H + lam)
            if w < lo:
                w = lo
            if w > hi:
                w = hi
            weight[slot] = w
            continue

        # stable partition: values <= threshold go left
        cnt = end - start
        for i in range(cnt):
            tmp[i] = idx[start + i]
        k = start
        for i in range(cnt):
            if X[tmp[i], best_f] <= best_thr:
                idx[k] = tmp[i]
                k += 1
        nleft = k - start
        for i in range(cnt):
            if X[tmp[i], best_f] > best_thr:
                idx[k] = tmp[i]
                k += 1

        lslot = n_nodes
        rslot = n_nodes + 1
        n_nodes += 2
        feat[slot] = best_f
        thr[slot] = best_thr
        left[slot] = lslot
        right[slot] = rslot
        weight[slot] = 0.0

        if monotone[best_f]:
            # midpoint of the child weights, clamped into the node's own
            # interval so ancestor bounds are never widened
            mid = 0.5 * (best_wl + best_wr)
            if mid < lo:
                mid = lo
            if mid > hi:
                mid = hi
            l_lo, l_hi = lo, mid
            r_lo, r_hi = mid, hi
        else:
            l_lo, l_hi = lo, hi
            r_lo, r_hi = lo, hi
        child_grp = group_id[best_f] if grp == -1 else grp

        st_start[sp] = start + nleft
        st_end[sp] = end
        st_depth[sp] = depth + 1
        st_slot[sp] = rslot
        st_grp[sp] = child_grp
        st_lo[sp] = r_lo
        st_hi[sp] = r_hi
        sp += 1
        st_start[sp] = start
        st_end[sp] = start + nleft
        st_depth[sp] = depth + 1
        st_slot[sp] = lslot
        st_grp[sp] = child_grp
        st_lo[sp] = l_lo
        st_hi[sp] = l_hi
        sp += 1

    return n_nodes


@njit(cache=True)
def _boost(X, y, nrounds, eta, lam, gamma, alpha, subsample, max_depth,
           min_cw, col_bytree, col_bylevel, selected, group_id, monotone,
           base_score, seed):
    """Full boosting loop: logistic loss, Newton gradients, per-tree row and
    column subsampling, per-level column subsampling. Returns the flat node
    arrays and the per-tree offsets into them."""
    n, p = X.shape
    state = np.empty(1, np.uint64)
    state[0] = np.uint64(seed) | np.uint64(1)

    raw = np.empty(n, np.float64)
    for i in range(n):
        raw[i] = base_score
    gvec = np.empty(n, np.float64)
    hvec = np.empty(n, np.float64)

    n_sel = selected.shape[0]
    scratch = np.empty(max(n, n_sel), np.int64)
    all_rows = np.arange(n)
    tree_allowed = np.zeros(p, np.bool_)
    level_allowed = np.zeros((max_depth, p), np.bool_)

    k_rows = n
    if subsample < 1.0:
        k_rows = np.int64(np.floor(subsample * n + 0.5))
        if k_rows < 1:
            k_rows = 1
    k_tree = n_sel
    if col_bytree < 1.0:
        k_tree = np.int64(np.floor(col_bytree * n_sel + 0.5))
        if k_tree < 1:
            k_tree = 1

    cap = 4096
    feat = np.empty(cap, np.int64)
    thr = np.empty(cap, np.float64)
    left = np.empty(cap, np.int64)
    right = np.empty(cap, np.int64)
    weight = np.empty(cap, np.float64)
    tree_start = np.empty(nrounds + 1, np.int64)
    tree_start[0] = 0
    top = 0

    for t in range(nrounds):
        for i in range(n):
            pr = 1.0 / (1.0 + np.exp(-raw[i]))
            gvec[i] = pr - y[i]
            hvec[i] = pr * (1.0 - pr)

        if k_rows < n:
            rows = _sample_sorted(all_rows, k_rows, scratch, state)
        else:
            rows = all_rows.copy()

        if k_tree < n_sel:
            tree_cols = _sample_sorted(selected, k_tree, scratch, state)
        else:
            tree_cols = selected
        for f in range(p):
            tree_allowed[f] = False
        for i in range(tree_cols.shape[0]):
            tree_allowed[tree_cols[i]] = True

        k_level = tree_cols.shape[0]
        if col_bylevel < 1.0:
            k_level = np.int64(np.floor(col_bylevel * tree_cols.shape[0] + 0.5))
            if k_level < 1:
                k_level = 1
        for d in range(max_depth):
            for f in range(p):
                level_allowed[d, f] = False
            if k_level < tree_cols.shape[0]:
                lcols = _sample_sorted(tree_cols, k_level, scratch, state)
            else:
                lcols = tree_cols
            for i in range(lcols.shape[0]):
                level_allowed[d, lcols[i]] = True

        need = top + 2 * rows.shape[0] + 1
        if need > cap:
            while cap < need:
                cap *= 2
            nf = np.empty(cap, np.int64)
            nf[:top] = feat[:top]
            feat = nf
            nt = np.empty(cap, np.float64)
            nt[:top] = thr[:top]
            thr = nt
            nl = np.empty(cap, np.int64)
            nl[:top] = left[:top]
            left = nl
            nr = np.empty(cap, np.int64)
            nr[:top] = right[:top]
            right = nr
            nw = np.empty(cap, np.float64)
            nw[:top] = weight[:top]
            weight = nw

        cnt = _grow_tree(X, gvec, hvec, rows, level_allowed, tree_allowed,
                         group_id, monotone, max_depth, min_cw, lam, gamma,
                         alpha, feat[top:], thr[top:], left[top:],
                         right[top:], weight[top:])
        for i in range(cnt):
            if feat[top + i] < 0:
                weight[top + i] *= eta

        for r in range(n):
            node = 0
            while feat[top + node] >= 0:
                if X[r, feat[top + node]] <= thr[top + node]:
                    node = left[top + node]
                else:
                    node = right[top + node]
            raw[r] += weight[top + node]

        top += cnt
        tree_start[t + 1] = top

    return feat[:top].copy(), thr[:top].copy(), left[:top].copy(), \
        right[:top].copy(), weight[:top].copy(), tree_start


@njit(cache=True)
def _predict_many(X, feat, thr, left, right, weight, tree_start, out):
    n = X.shape[0]
    ntrees = tree_start.shape[0] - 1
    for r in range(n):
        acc = 0.0
        for t in range(ntrees):
            base = tree_start[t]
            node = 0
            while feat[base + node] >= 0:
                if X[r, feat[base + node]] <= thr[base + node]:
                    node = left[base + node]
                else:
                    node = right[base + node]
            acc += weight[base + node]
        out[r] += acc


def fit_variance_tree(x, y, max_depth=5, min_obs=10):
    """Single regression tree on one feature, variance-reduction splitting.

    Leaf values are plain means (squared loss, no regularization); used by
    the monotonicity detector.
    """
    x = np.ascontiguousarray(np.asarray(x, dtype=np.float64).reshape(-1, 1))
    y = np.asarray(y, dtype=np.float64)
    m = x.shape[0]
    maxn = 2 * m + 1
    feat = np.empty(maxn, np.int64)
    thr = np.empty(maxn, np.float64)
    left = np.empty(maxn, np.int64)
    right = np.empty(maxn, np.int64)
    weight = np.empty(maxn, np.float64)
    cnt = _grow_tree(
        x, -y, np.ones(m), np.arange(m),
        np.ones((max_depth, 1), np.bool_), np.ones(1, np.bool_),
        np.zeros(1, np.int64), np.zeros(1, np.bool_),
        max_depth, float(min_obs), 0.0, 0.0, 0.0,
        feat, thr, left, right, weight,
    )
    return feat[:cnt].copy(), thr[:cnt].copy(), left[:cnt].copy(), \
        right[:cnt].copy(), weight[:cnt].copy()


def predict_tree_arrays(x, feat, thr, left, right, weight):
    """Predictions of a single flat tree over a 1-d or 2-d input."""
    X = np.asarray(x, dtype=np.float64)
    if X.ndim == 1:
        X = X.reshape(-1, 1)
    out = np.zeros(X.shape[0])
    tree_start = np.array([0, feat.shape[0]], dtype=np.int64)
    _predict_many(np.ascontiguousarray(X), feat, thr, left, right, weight, tree_start, out)
    return out
