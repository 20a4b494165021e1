"""Synthetic power-law graph generator (recursive-matrix sampling).

Produces a simple undirected graph in METIS text: endpoints are drawn bit
by bit through the skewed quadrant distribution, out-of-range and loop
draws are rejected, duplicates removed, and sampling repeats until the
requested edge count is met.  Deterministic for a fixed seed.
"""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np

from edgestream.graph_io import GraphHeader


def generate_rmat(
    path: str | Path,
    n: int,
    m: int,
    seed: int = 0,
    a: float = 0.57,
    b: float = 0.19,
    c: float = 0.19,
) -> GraphHeader:
    """Write a deterministic synthetic graph with ``n`` vertices and exactly
    ``m`` distinct edges (no self-loops) to ``path``."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    max_edges = n * (n - 1) // 2
    if m < 0 or m > max_edges:
        raise ValueError(f"m must be in [0, {max_edges}], got {m}")
    d = 1.0 - a - b - c
    if min(a, b, c, d) < 0 or max(a, b, c, d) >= 1.0:
        raise ValueError("quadrant probabilities must be in [0, 1) and sum to 1")

    rng = np.random.default_rng(seed)
    scale = max(1, math.ceil(math.log2(n))) if n > 1 else 1
    keys = np.empty(0, dtype=np.int64)
    attempts = 0
    while keys.size < m:
        attempts += 1
        if attempts > 200:
            raise RuntimeError("edge sampling failed to reach the requested count")
        need = int((m - keys.size) * 1.5) + 1024
        u = np.zeros(need, dtype=np.int64)
        v = np.zeros(need, dtype=np.int64)
        for _ in range(scale):
            r = rng.random(need)
            ubit = r >= a + b
            vbit = ((r >= a) & (r < a + b)) | (r >= a + b + c)
            u = (u << 1) | ubit
            v = (v << 1) | vbit
        ok = (u < n) & (v < n) & (u != v)
        lo = np.minimum(u[ok], v[ok])
        hi = np.maximum(u[ok], v[ok])
        new = lo * n + hi
        if keys.size:
            new = new[~np.isin(new, keys)]
        # keep first occurrences in generation order
        uniq, first = np.unique(new, return_index=True)
        new = uniq[np.argsort(first, kind="stable")]
        take = min(new.size, m - keys.size)
        keys = np.concatenate([keys, new[:take]])

    us = keys // n + 1
    vs = keys % n + 1
    src = np.concatenate([us, vs])
    dst = np.concatenate([vs, us])
    order = np.lexsort((dst, src))
    src, dst = src[order], dst[order]
    starts = np.searchsorted(src, np.arange(1, n + 1))
    ends = np.searchsorted(src, np.arange(2, n + 2))
    dst_list = dst.tolist()
    with open(path, "w", encoding="ascii") as fh:
        fh.write(f"{n} {m}\n")
        for i in range(n):
            fh.write(" ".join(map(str, dst_list[starts[i] : ends[i]])))
            fh.write("\n")
    return GraphHeader(n=n, m=m)
