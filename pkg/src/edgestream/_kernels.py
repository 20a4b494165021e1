"""Label-propagation kernels over CSR graphs.

Sequential and deterministic: vertices are visited in index order, ties
resolve toward the lowest id.  Compiled with numba when available; the
pure-Python fallback is identical but slow.
"""

from __future__ import annotations

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]

        def wrap(fn):
            return fn

        return wrap


@njit(cache=True)
def lp_cluster(indptr, indices, weights, vweight, nonart_n, cap, rounds, cluster, cluster_weight):
    """Size-constrained clustering rounds.

    Moves each non-artificial vertex to the neighboring cluster with the
    strictly strongest connection whose weight stays within ``cap``.
    Artificial vertices (ids >= ``nonart_n``) are skipped entirely, as are
    edges toward them.  Returns the total number of moves.
    """
    n = cluster.size
    stamp = np.zeros(n, dtype=np.int64)
    acc = np.zeros(n, dtype=np.int64)
    touched = np.empty(n, dtype=np.int64)
    tick = 0
    total_moves = 0
    for _ in range(rounds):
        moved = 0
        for u in range(nonart_n):
            start = indptr[u]
            end = indptr[u + 1]
            if end == start:
                continue
            cu = cluster[u]
            wu = vweight[u]
            tick += 1
            ntouch = 0
            for e in range(start, end):
                v = indices[e]
                if v >= nonart_n:
                    continue
                c = cluster[v]
                if stamp[c] != tick:
                    stamp[c] = tick
                    acc[c] = 0
                    touched[ntouch] = c
                    ntouch += 1
                acc[c] += weights[e]
            own = acc[cu] if stamp[cu] == tick else np.int64(0)
            best = cu
            best_aff = own
            for t in range(ntouch):
                c = touched[t]
                if c == cu:
                    continue
                if cluster_weight[c] + wu > cap:
                    continue
                a = acc[c]
                if a > best_aff or (a == best_aff and c < best):
                    best = c
                    best_aff = a
            if best != cu and best_aff > own:
                cluster_weight[cu] -= wu
                cluster_weight[best] += wu
                cluster[u] = best
                moved += 1
        total_moves += moved
        if moved == 0:
            break
    return total_moves


@njit(cache=True)
def lp_refine(indptr, indices, weights, vweight, nonart_n, block, loads, l_max, alpha, gamma, rounds):
    """Gain-driven refinement rounds.

    A non-artificial vertex may move only to a block present in its
    neighborhood (artificial neighbors contribute their fixed blocks), when
    the move strictly improves its gain and respects ``l_max``.  The target
    penalty is taken at the post-move load and the current block's at the
    post-removal load, which keeps the global score non-decreasing.
    Updates ``block`` and ``loads`` in place; returns the move count.
    """
    k = loads.size
    stamp = np.zeros(k, dtype=np.int64)
    acc = np.zeros(k, dtype=np.int64)
    touched = np.empty(k, dtype=np.int64)
    tick = 0
    total_moves = 0
    ag = alpha * gamma
    use_sqrt = gamma == 1.5
    for _ in range(rounds):
        moved = 0
        for u in range(nonart_n):
            start = indptr[u]
            end = indptr[u + 1]
            if end == start:
                continue
            bu = block[u]
            cu = vweight[u]
            tick += 1
            ntouch = 0
            for e in range(start, end):
                b = block[indices[e]]
                if stamp[b] != tick:
                    stamp[b] = tick
                    acc[b] = 0
                    touched[ntouch] = b
                    ntouch += 1
                acc[b] += weights[e]
            w_cur = acc[bu] if stamp[bu] == tick else np.int64(0)
            lrem = float(loads[bu] - cu)
            if lrem < 0.0:
                lrem = 0.0
            if use_sqrt:
                stay = w_cur - cu * (ag * np.sqrt(lrem))
            else:
                stay = w_cur - cu * (ag * lrem ** (gamma - 1.0))
            best = -1
            best_score = 0.0
            for t in range(ntouch):
                b = touched[t]
                if b == bu:
                    continue
                if loads[b] + cu > l_max:
                    continue
                lb = float(loads[b] + cu)
                if use_sqrt:
                    s = acc[b] - cu * (ag * np.sqrt(lb))
                else:
                    s = acc[b] - cu * (ag * lb ** (gamma - 1.0))
                if best < 0 or s > best_score or (s == best_score and b < best):
                    best = b
                    best_score = s
            if best >= 0 and best_score > stay:
                loads[bu] -= cu
                loads[best] += cu
                block[u] = best
                moved += 1
        total_moves += moved
        if moved == 0:
            break
    return total_moves
