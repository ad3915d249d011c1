"""Integer kernels behind guess enumeration and guess counting.

Both kernels compile under numba when available and run as plain Python
otherwise; the source is shared (see ._jit), so the two paths produce
identical output. Everything is int64/float64 arrays, no Python objects.
"""

from __future__ import annotations

import numpy as np

from ._jit import njit


@njit(cache=True)
def _enum_fill(
    vec_neg,
    init_grams,
    init_start,
    succ_chars,
    succ_start,
    sigma,
    ctx_size,
    level_count,
    n1,
    prefix,
    cursors,
    ctxs,
    pos_box,
    out,
):
    """Resume a depth-first walk for one level vector, filling ``out``.

    The walk has k = len(vec_neg) positions. Position 0 chooses an initial
    (n-1)-gram whose level index equals vec_neg[0], from the rank-sorted
    slice init_grams[init_start[v]:init_start[v+1]]. Position i >= 1 chooses
    a next character at level index vec_neg[i] for the rolling context
    ctxs[i], from the CSR slice succ_chars[succ_start[b]:succ_start[b+1]]
    with b = ctxs[i]*level_count + vec_neg[i]. A full assignment is one
    guess, written as character ranks into the next row of ``out``.

    State lives in the caller-owned arrays (prefix, cursors, ctxs, pos_box)
    so the walk can stop when ``out`` is full and pick up where it left off
    on the next call. pos_box[0] is the position about to move; -1 means the
    walk is finished. Returns the number of rows written this call.
    """
    k = vec_neg.shape[0]
    cap = out.shape[0]
    m = 0
    while True:
        pos = pos_box[0]
        if pos < 0:
            return m
        if pos == 0:
            base = vec_neg[0]
            idx = init_start[base] + cursors[0]
            if idx >= init_start[base + 1]:
                pos_box[0] = -1
                return m
            gram = init_grams[idx]
            cursors[0] += 1
            # decode the gram rank, most significant character first
            g = gram
            for j in range(n1 - 1, -1, -1):
                prefix[j] = g % sigma
                g //= sigma
            if k == 1:
                for j in range(n1):
                    out[m, j] = prefix[j]
                m += 1
                if m == cap:
                    return m
            else:
                ctxs[1] = gram
                cursors[1] = 0
                pos_box[0] = 1
        else:
            base = ctxs[pos] * level_count + vec_neg[pos]
            idx = succ_start[base] + cursors[pos]
            if idx >= succ_start[base + 1]:
                pos_box[0] = pos - 1
                continue
            z = succ_chars[idx]
            cursors[pos] += 1
            prefix[n1 - 1 + pos] = z
            if pos == k - 1:
                for j in range(n1 + k - 1):
                    out[m, j] = prefix[j]
                m += 1
                if m == cap:
                    return m
            else:
                ctxs[pos + 1] = (ctxs[pos] * sigma + z) % ctx_size
                cursors[pos + 1] = 0
                pos_box[0] = pos + 1


@njit(cache=True)
def _count_dp(init_level_neg, cond_level_neg, sigma, ctx_size, transitions, depth):
    """Count strings by total level without enumerating them.

    Forward dynamic program: ways[c, s] is the number of prefixes ending in
    context c whose negated level sum is s. Sums only grow, so anything at
    or beyond ``depth`` is dropped. Returns hist[s] = number of full-length
    strings with negated level sum s, for s in [0, depth).

    Counts are float64: exact up to 2**53, approximate beyond.
    """
    ways = np.zeros((ctx_size, depth), dtype=np.float64)
    for c in range(ctx_size):
        s0 = init_level_neg[c]
        if s0 < depth:
            ways[c, s0] += 1.0
    for _ in range(transitions):
        nxt = np.zeros((ctx_size, depth), dtype=np.float64)
        for c in range(ctx_size):
            shifted = (c * sigma) % ctx_size
            for z in range(sigma):
                lv = cond_level_neg[c * sigma + z]
                c2 = shifted + z
                for s in range(depth - lv):
                    w = ways[c, s]
                    if w != 0.0:
                        nxt[c2, s + lv] += w
        ways = nxt
    hist = np.zeros(depth, dtype=np.float64)
    for c in range(ctx_size):
        for s in range(depth):
            hist[s] += ways[c, s]
    return hist
