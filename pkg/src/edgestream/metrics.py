"""Evaluation quantities over edge assignments.

The replication factor counts, per vertex, the distinct blocks among its
incident edges, averaged over all n vertices (isolated vertices contribute
nothing but stay in the denominator).  The balance cap is the exact
ceiling ``l_max = ceil((1+eps) * m / k)``, computed in rational arithmetic
so float rounding can never shift it by one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

_MASK = (1 << 64) - 1


def compute_l_max(m: int, k: int, eps) -> int:
    """Exact ceil((1+eps) * m / k); eps may be float, str, or Fraction."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if isinstance(eps, Fraction):
        f = eps
    else:
        f = Fraction(str(eps))
    if f < 0:
        raise ValueError(f"eps must be >= 0, got {eps}")
    return math.ceil((1 + f) * Fraction(m, k))


@dataclass
class MetricsReport:
    """Per-run evaluation summary."""

    rf: float
    replica_total: int
    block_sizes: np.ndarray
    max_load: int
    l_max: int
    imbalance: float
    runtime_ms: float
    parse_ms: float
    peak_rss_bytes: int | None = None


def _as_assignment_array(assignment) -> np.ndarray:
    arr = np.asarray(assignment, dtype=np.int64)
    if arr.ndim != 2 or arr.shape[1] != 3:
        arr = np.array([tuple(row) for row in assignment], dtype=np.int64).reshape(-1, 3)
    return arr


def replication_factor(assignment, n: int, k: int) -> tuple[float, int]:
    """(rf, total replicas) from (u, v, block) triples.

    Counts distinct (vertex, block) incidences; rf divides by all n
    vertices, isolated ones included.
    """
    arr = _as_assignment_array(assignment)
    if arr.shape[0] == 0:
        return 0.0, 0
    u, v, b = arr[:, 0], arr[:, 1], arr[:, 2]
    if int(u.min()) < 1 or int(v.min()) < 1 or int(max(u.max(), v.max())) > n:
        raise ValueError(f"vertex id out of range [1..{n}]")
    if int(b.min()) < 0 or int(b.max()) >= k:
        raise ValueError(f"block id out of range [0..{k - 1}]")
    pairs = np.concatenate([u * k + b, v * k + b])
    replica_total = int(np.unique(pairs).size)
    return replica_total / n, replica_total


def balance_report(block_sizes, m: int, k: int, eps) -> tuple[int, int, bool]:
    """(max_load, l_max, within-cap) for the given per-block edge counts."""
    l_max = compute_l_max(m, k, eps)
    sizes = np.asarray(block_sizes, dtype=np.int64)
    max_load = int(sizes.max()) if sizes.size else 0
    return max_load, l_max, max_load <= l_max


def connectivity_sum(assignment, n: int) -> int:
    """Sum over graph vertices of the number of blocks their incident edges
    touch, computed per block (each vertex is a net spanning its incident
    edges); equals the replica total counted per vertex."""
    blocks: dict[int, set[int]] = {}
    for u, v, b in _as_assignment_array(assignment).tolist():
        if not 1 <= u <= n or not 1 <= v <= n:
            raise ValueError(f"vertex id out of range [1..{n}]")
        s = blocks.setdefault(b, set())
        s.add(u)
        s.add(v)
    return sum(len(s) for s in blocks.values())


def _mix64(z: int) -> int:
    z = (z + 0x9E3779B97F4A7C15) & _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


def hash_partition(edge: tuple[int, int], k: int, seed: int = 0) -> int:
    """Deterministic block for an edge: hash of the canonical endpoint pair
    and the seed, modulo k.  Orientation-independent."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    u, v = edge
    a, b = (u, v) if u <= v else (v, u)
    h = _mix64(seed & _MASK)
    h = _mix64(h ^ a)
    h = _mix64(h ^ b)
    return h % k


def hash_partition_array(us: np.ndarray, vs: np.ndarray, k: int, seed: int = 0) -> np.ndarray:
    """Vectorized :func:`hash_partition` over canonical endpoint pairs."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    a = np.minimum(us, vs).astype(np.uint64)
    b = np.maximum(us, vs).astype(np.uint64)

    def mix(z):
        z = z + np.uint64(0x9E3779B97F4A7C15)
        z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
        return z ^ (z >> np.uint64(31))

    h = mix(np.full(a.shape, seed & _MASK, dtype=np.uint64))
    h = mix(h ^ a)
    h = mix(h ^ b)
    return (h % np.uint64(k)).astype(np.int64)


def peak_rss_bytes() -> int | None:
    """Maximum resident set size of this process, if the platform reports it."""
    try:
        import resource
    except ImportError:  # pragma: no cover
        return None
    import sys

    rss = resource.getrusage(resource.RUSAGE_SELF).ru_maxrss
    if sys.platform == "darwin":  # pragma: no cover
        return int(rss)
    return int(rss) * 1024
