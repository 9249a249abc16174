"""Jitted kernels for CART growth, histogram trees, and tree prediction.

Trees are stored as parallel arrays (feature, threshold, left, right,
value); feature == -1 marks a leaf.  Split search maximizes the usual
variance-reduction score sum_L^2/n_L + sum_R^2/n_R with strict-greater
updates, candidate features scanned in ascending order and thresholds
ascending within a feature, so equal-gain ties resolve to the lowest
feature index, then the lowest threshold.
"""

from __future__ import annotations

import numpy as np
from numba import njit

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)


@njit(cache=True)
def _next_u64(state):  # pragma: no cover - jitted
    state = state + _GOLDEN
    z = state
    z ^= z >> np.uint64(30)
    z *= _MIX1
    z ^= z >> np.uint64(27)
    z *= _MIX2
    z ^= z >> np.uint64(31)
    return state, z


@njit(cache=True)
def grow_cart(X, y, sample_idx, max_depth, min_leaf, mtry, rng_state):  # pragma: no cover
    """Grow one exact-split regression tree on the rows in sample_idx.

    max_depth < 0 means unlimited.  mtry features are drawn per node from
    the rng stream.  Returns (feature, threshold, left, right, value) arrays
    trimmed to the node count.
    """
    n = sample_idx.shape[0]
    p = X.shape[1]
    max_nodes = 2 * n + 1
    feature = np.full(max_nodes, -1, dtype=np.int64)
    threshold = np.zeros(max_nodes, dtype=np.float64)
    left = np.full(max_nodes, -1, dtype=np.int64)
    right = np.full(max_nodes, -1, dtype=np.int64)
    value = np.zeros(max_nodes, dtype=np.float64)

    idx = sample_idx.copy()
    scratch = np.empty(n, dtype=np.int64)
    feat_pool = np.empty(p, dtype=np.int64)

    stack_node = np.empty(max_nodes, dtype=np.int64)
    stack_start = np.empty(max_nodes, dtype=np.int64)
    stack_end = np.empty(max_nodes, dtype=np.int64)
    stack_depth = np.empty(max_nodes, dtype=np.int64)
    top = 0
    stack_node[0] = 0
    stack_start[0] = 0
    stack_end[0] = n
    stack_depth[0] = 0
    top = 1
    node_count = 1

    while top > 0:
        top -= 1
        node = stack_node[top]
        start = stack_start[top]
        end = stack_end[top]
        depth = stack_depth[top]
        m = end - start

        total = 0.0
        for t in range(start, end):
            total += y[idx[t]]
        mean = total / m
        value[node] = mean

        if m < 2 * min_leaf:
            continue
        if max_depth >= 0 and depth >= max_depth:
            continue
        pure = True
        first = y[idx[start]]
        for t in range(start + 1, end):
            if y[idx[t]] != first:
                pure = False
                break
        if pure:
            continue

        for j in range(p):
            feat_pool[j] = j
        n_cand = mtry if mtry < p else p
        for j in range(n_cand):
            rng_state, rnd = _next_u64(rng_state)
            pick = j + np.int64(rnd % np.uint64(p - j))
            tmp = feat_pool[j]
            feat_pool[j] = feat_pool[pick]
            feat_pool[pick] = tmp
        # ascending candidate order for the tie-break
        for j in range(1, n_cand):
            key = feat_pool[j]
            t = j - 1
            while t >= 0 and feat_pool[t] > key:
                feat_pool[t + 1] = feat_pool[t]
                t -= 1
            feat_pool[t + 1] = key

        no_split = total * total / m
        best_score = no_split
        best_feat = -1
        best_thr = 0.0
        vals = np.empty(m, dtype=np.float64)
        ys = np.empty(m, dtype=np.float64)
        for jj in range(n_cand):
            f = feat_pool[jj]
            for t in range(m):
                vals[t] = X[idx[start + t], f]
            order = np.argsort(vals)
            for t in range(m):
                ys[t] = y[idx[start + order[t]]]
            run = 0.0
            for t in range(m - 1):
                run += ys[t]
                nl = t + 1
                nr = m - nl
                if nl < min_leaf:
                    continue
                if nr < min_leaf:
                    break
                lo = vals[order[t]]
                hi = vals[order[t + 1]]
                if lo == hi:
                    continue
                rest = total - run
                score = run * run / nl + rest * rest / nr
                if score > best_score:
                    best_score = score
                    best_feat = f
                    thr = lo + (hi - lo) / 2.0
                    # midpoint may round up to hi for adjacent floats; the
                    # partition must stay within [lo, hi)
                    if thr >= hi:
                        thr = lo
                    best_thr = thr

        if best_feat < 0:
            continue

        n_left = 0
        for t in range(start, end):
            if X[idx[t], best_feat] <= best_thr:
                scratch[n_left] = idx[t]
                n_left += 1
        n_right = 0
        for t in range(start, end):
            if X[idx[t], best_feat] > best_thr:
                scratch[n_left + n_right] = idx[t]
                n_right += 1
        for t in range(m):
            idx[start + t] = scratch[t]

        left_id = node_count
        right_id = node_count + 1
        node_count += 2
        feature[node] = best_feat
        threshold[node] = best_thr
        left[node] = left_id
        right[node] = right_id
        stack_node[top] = right_id
        stack_start[top] = start + n_left
        stack_end[top] = end
        stack_depth[top] = depth + 1
        top += 1
        stack_node[top] = left_id
        stack_start[top] = start
        stack_end[top] = start + n_left
        stack_depth[top] = depth + 1
        top += 1

    return (
        feature[:node_count].copy(),
        threshold[:node_count].copy(),
        left[:node_count].copy(),
        right[:node_count].copy(),
        value[:node_count].copy(),
    )


@njit(cache=True)
def grow_hist_tree(codes, grad, max_depth, min_leaf, n_bins):  # pragma: no cover
    """Grow one histogram regression tree on binned features.

    codes holds per-feature bin indices (uint16); a split at (f, b) sends
    codes[:, f] <= b left.  Returns arrays with threshold holding the bin
    index (converted to a real value by the caller).
    """
    n, p = codes.shape
    max_nodes = 2 * n + 1
    feature = np.full(max_nodes, -1, dtype=np.int64)
    thr_bin = np.full(max_nodes, -1, dtype=np.int64)
    left = np.full(max_nodes, -1, dtype=np.int64)
    right = np.full(max_nodes, -1, dtype=np.int64)
    value = np.zeros(max_nodes, dtype=np.float64)

    idx = np.arange(n)
    scratch = np.empty(n, dtype=np.int64)
    max_b = 0
    for f in range(p):
        if n_bins[f] > max_b:
            max_b = n_bins[f]
    hist_cnt = np.zeros(max_b, dtype=np.int64)
    hist_sum = np.zeros(max_b, dtype=np.float64)

    stack_node = np.empty(max_nodes, dtype=np.int64)
    stack_start = np.empty(max_nodes, dtype=np.int64)
    stack_end = np.empty(max_nodes, dtype=np.int64)
    stack_depth = np.empty(max_nodes, dtype=np.int64)
    stack_node[0] = 0
    stack_start[0] = 0
    stack_end[0] = n
    stack_depth[0] = 0
    top = 1
    node_count = 1

    while top > 0:
        top -= 1
        node = stack_node[top]
        start = stack_start[top]
        end = stack_end[top]
        depth = stack_depth[top]
        m = end - start

        total = 0.0
        for t in range(start, end):
            total += grad[idx[t]]
        value[node] = total / m

        if m < 2 * min_leaf:
            continue
        if max_depth >= 0 and depth >= max_depth:
            continue

        no_split = total * total / m
        best_score = no_split
        best_feat = -1
        best_bin = -1
        for f in range(p):
            nb = n_bins[f]
            if nb < 2:
                continue
            for b in range(nb):
                hist_cnt[b] = 0
                hist_sum[b] = 0.0
            for t in range(start, end):
                b = codes[idx[t], f]
                hist_cnt[b] += 1
                hist_sum[b] += grad[idx[t]]
            nl = 0
            run = 0.0
            for b in range(nb - 1):
                if hist_cnt[b] == 0:
                    continue
                nl += hist_cnt[b]
                run += hist_sum[b]
                nr = m - nl
                if nl < min_leaf:
                    continue
                if nr < min_leaf:
                    break
                rest = total - run
                score = run * run / nl + rest * rest / nr
                if score > best_score:
                    best_score = score
                    best_feat = f
                    best_bin = b

        if best_feat < 0:
            continue

        n_left = 0
        for t in range(start, end):
            if codes[idx[t], best_feat] <= best_bin:
                scratch[n_left] = idx[t]
                n_left += 1
        n_right = 0
        for t in range(start, end):
            if codes[idx[t], best_feat] > best_bin:
                scratch[n_left + n_right] = idx[t]
                n_right += 1
        for t in range(m):
            idx[start + t] = scratch[t]

        left_id = node_count
        right_id = node_count + 1
        node_count += 2
        feature[node] = best_feat
        thr_bin[node] = best_bin
        left[node] = left_id
        right[node] = right_id
        stack_node[top] = right_id
        stack_start[top] = start + n_left
        stack_end[top] = end
        stack_depth[top] = depth + 1
        top += 1
        stack_node[top] = left_id
        stack_start[top] = start
        stack_end[top] = start + n_left
        stack_depth[top] = depth + 1
        top += 1

    return (
        feature[:node_count].copy(),
        thr_bin[:node_count].copy(),
        left[:node_count].copy(),
        right[:node_count].copy(),
        value[:node_count].copy(),
    )


@njit(cache=True)
def predict_tree(feature, threshold, left, right, value, X):  # pragma: no cover
    n = X.shape[0]
    out = np.empty(n, dtype=np.float64)
    for i in range(n):
        node = 0
        while feature[node] >= 0:
            if X[i, feature[node]] <= threshold[node]:
                node = left[node]
            else:
                node = right[node]
        out[i] = value[node]
    return out
