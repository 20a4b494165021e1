"""Multilevel partitioning of the batch model.

Three phases: size-constrained label-propagation coarsening, generalized
Fennel initial partitioning with two-set block selection, and
label-propagation refinement down the hierarchy.

Block selection evaluates only the blocks adjacent to the vertex plus the
globally lightest block (from a min-queue), which is decision-equivalent
to the exhaustive argmax of the gain for any positive ``alpha``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from edgestream._kernels import lp_cluster, lp_refine
from edgestream.errors import BalanceInfeasibleError
from edgestream.model import CspacModel


@dataclass(frozen=True)
class FennelParams:
    """Gain parameters: ``gain = w_i - c(u) * alpha * gamma * load_i^(gamma-1)``."""

    alpha: float
    l_max: int
    gamma: float = 1.5

    def __post_init__(self):
        if self.alpha < 0:
            raise ValueError(f"alpha must be >= 0, got {self.alpha}")
        if self.gamma <= 1:
            raise ValueError(f"gamma must be > 1, got {self.gamma}")
        if self.l_max < 0:
            raise ValueError(f"l_max must be >= 0, got {self.l_max}")

    def penalty(self, load) -> float:
        """The marginal balance penalty f(load); f(0) = 0."""
        load = float(load)
        if self.gamma == 1.5:
            return self.alpha * 1.5 * math.sqrt(load)
        return self.alpha * self.gamma * load ** (self.gamma - 1.0)


@dataclass(frozen=True)
class AlphaPolicy:
    """How alpha is chosen: fixed over the stream, per batch, or extrapolated."""

    kind: str
    y: float = 2.0

    _KINDS = ("static", "batch", "dynamic")

    def __post_init__(self):
        if self.kind not in self._KINDS:
            raise ValueError(f"unknown alpha policy {self.kind!r}")
        if self.y <= 0:
            raise ValueError("tuning parameter y must be > 0")

    @classmethod
    def parse(cls, text: str) -> "AlphaPolicy":
        """Parse ``batch``, ``dynamic``, or ``static:Y``."""
        if text in ("batch", "dynamic"):
            return cls(text)
        if text.startswith("static:"):
            return cls("static", float(text.split(":", 1)[1]))
        if text == "static":
            return cls("static")
        raise ValueError(f"cannot parse alpha policy {text!r}")

    def __str__(self) -> str:
        return f"static:{self.y:g}" if self.kind == "static" else self.kind


@dataclass
class StreamStats:
    """Whole-stream quantities driving the static and dynamic policies.

    ``n_star`` is the edge-vertex count of the hypothetical whole-graph
    model (m, or m/2 behind the halved convention switch); the running
    totals feed the dynamic policy's auxiliary-edge ratio.
    """

    n_star: float
    total_edge_vertices: int = 0
    total_aux_edges: int = 0

    def observe(self, n_s: int, m_s: int) -> None:
        self.total_edge_vertices += n_s
        self.total_aux_edges += m_s


@dataclass(frozen=True)
class BatchStats:
    """Vertex and edge counts of the current batch's unaugmented model."""

    n_s: int
    m_s: int


def compute_alpha(
    policy: AlphaPolicy,
    k: int,
    stream: StreamStats,
    batch: BatchStats | None = None,
) -> float:
    """Evaluate the configured alpha policy.

    static: sqrt(k) * y*n_star / n_star^1.5, constant over the stream.
    batch:  sqrt(k) * m_s / n_s^1.5 from the current model's counts.
    dynamic: the static formula with y replaced by the running ratio of
    observed auxiliary edges to edge-vertices.
    """
    if policy.kind == "batch":
        if batch is None:
            raise ValueError("batch alpha requires batch stats")
        if batch.n_s == 0:
            raise ValueError("alpha undefined for an empty batch model")
        return math.sqrt(k) * batch.m_s / batch.n_s**1.5
    if stream.n_star <= 0:
        return 0.0
    if policy.kind == "static":
        ratio = policy.y
    else:
        if stream.total_edge_vertices > 0:
            ratio = stream.total_aux_edges / stream.total_edge_vertices
        else:
            ratio = policy.y
    m_approx = ratio * stream.n_star
    return math.sqrt(k) * m_approx / stream.n_star**1.5


class BlockMinQueue:
    """Indexed binary min-heap over the k blocks, keyed by (load, block id).

    ``loads`` is shared with the caller; after increasing ``loads[i]`` call
    :meth:`sift_down` (or :meth:`update` for arbitrary changes).  get-min is
    O(1), a key change O(log k).
    """

    def __init__(self, loads):
        self.loads = loads
        k = len(loads)
        order = np.lexsort((np.arange(k), np.asarray(loads)))
        self.heap = order.tolist()  # sorted order is a valid heap
        pos = [0] * k
        for i, b in enumerate(self.heap):
            pos[b] = i
        self.pos = pos

    def __len__(self) -> int:
        return len(self.heap)

    def peek_min(self) -> int:
        return self.heap[0]

    def _less(self, a: int, b: int) -> bool:
        la, lb = self.loads[a], self.loads[b]
        return la < lb or (la == lb and a < b)

    def sift_down(self, block: int) -> None:
        heap, pos = self.heap, self.pos
        n = len(heap)
        i = pos[block]
        while True:
            left = 2 * i + 1
            if left >= n:
                break
            child = left
            right = left + 1
            if right < n and self._less(heap[right], heap[left]):
                child = right
            if self._less(heap[child], heap[i]):
                heap[i], heap[child] = heap[child], heap[i]
                pos[heap[i]] = i
                pos[heap[child]] = child
                i = child
            else:
                break

    def sift_up(self, block: int) -> None:
        heap, pos = self.heap, self.pos
        i = pos[block]
        while i > 0:
            parent = (i - 1) // 2
            if self._less(heap[i], heap[parent]):
                heap[i], heap[parent] = heap[parent], heap[i]
                pos[heap[i]] = i
                pos[heap[parent]] = parent
                i = parent
            else:
                break

    def update(self, block: int) -> None:
        self.sift_down(block)
        self.sift_up(block)


def fennel_gain(c_u: float, w_i: float, load_i: float, params: FennelParams) -> float:
    """Generalized gain of placing a weight-``c_u`` vertex with aggregated
    neighbor weight ``w_i`` into a block of load ``load_i``.

    Linear in (w_i, c_u), so contracting a cluster preserves the sum of its
    members' gains toward any fixed block.
    """
    return w_i - c_u * params.penalty(load_i)


def select_block(
    neighbor_weights: dict[int, float],
    c_u,
    loads,
    queue: BlockMinQueue,
    params: FennelParams,
) -> int:
    """Argmax of the gain over feasible blocks, evaluating only the blocks
    adjacent to the vertex plus the queue's minimum-load block.

    Ties break toward the lowest block index.  Raises
    :class:`BalanceInfeasibleError` when no block can take the vertex.
    """
    best = -1
    best_score = 0.0
    l_max = params.l_max
    # grouped exactly like FennelParams.penalty so equal states produce
    # bit-identical scores regardless of which path computes them
    ag = params.alpha * params.gamma
    plain = params.gamma != 1.5
    for i, w in neighbor_weights.items():
        li = loads[i]
        if li + c_u > l_max:
            continue
        if plain:
            s = w - c_u * (ag * li ** (params.gamma - 1.0))
        else:
            s = w - c_u * (ag * math.sqrt(li))
        if best < 0 or s > best_score or (s == best_score and i < best):
            best = i
            best_score = s
    t = queue.heap[0]
    if loads[t] + c_u <= l_max and t not in neighbor_weights:
        lt = loads[t]
        s = -c_u * (ag * (lt ** (params.gamma - 1.0) if plain else math.sqrt(lt)))
        if best < 0 or s > best_score or (s == best_score and t < best):
            best = t
            best_score = s
    if best < 0:
        raise BalanceInfeasibleError(
            f"no block can take weight {c_u} under l_max={l_max}"
        )
    return best


@dataclass
class LevelGraph:
    """One hierarchy level: CSR plus the undirected edge list it was built
    from.  Artificial slots occupy the tail ids ``[nonart, n)``;
    ``art_blocks[t]`` is the block represented by slot ``nonart + t``.
    """

    n: int
    nonart: int
    indptr: np.ndarray
    indices: np.ndarray
    eweights: np.ndarray
    vweight: np.ndarray
    edges_a: np.ndarray
    edges_b: np.ndarray
    edges_w: np.ndarray
    art_blocks: np.ndarray


@dataclass
class Hierarchy:
    """Coarsening ladder; ``maps[i]`` sends level-``i`` vertices to their
    coarse vertex at level ``i+1``."""

    levels: list[LevelGraph]
    maps: list[np.ndarray] = field(default_factory=list)

    @property
    def coarsest(self) -> LevelGraph:
        return self.levels[-1]

    @property
    def coarsest_index(self) -> int:
        return len(self.levels) - 1


def _csr_from_edges(n: int, a: np.ndarray, b: np.ndarray, w: np.ndarray):
    src = np.concatenate([a, b])
    dst = np.concatenate([b, a])
    wt = np.concatenate([w, w])
    deg = np.bincount(src, minlength=n)
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(deg, out=indptr[1:])
    order = np.argsort(src, kind="stable")
    return indptr, dst[order].astype(np.int64), wt[order].astype(np.int64)


def build_level0(model: CspacModel) -> LevelGraph:
    """Materialize the augmented model as the finest hierarchy level.

    Artificial vertices without incident artificial edges are isolated and
    affect nothing downstream (their weight is the block load, which the
    load array already tracks), so only blocks referenced by an artificial
    edge get a slot.
    """
    if not model.augmented:
        raise ValueError("model must be augmented before partitioning")
    n_ev = model.n_edge_vertices
    active_blocks = np.unique(model.art_edge_block)
    n = n_ev + active_blocks.size
    slot = np.searchsorted(active_blocks, model.art_edge_block)
    a = np.concatenate([model.aux_a, model.art_edge_ev])
    b = np.concatenate([model.aux_b, n_ev + slot])
    w = np.concatenate([model.aux_w, model.art_edge_w])
    vweight = np.concatenate(
        [np.ones(n_ev, dtype=np.int64), model.art_weights[active_blocks]]
    )
    indptr, indices, eweights = _csr_from_edges(n, a, b, w)
    return LevelGraph(
        n=n,
        nonart=n_ev,
        indptr=indptr,
        indices=indices,
        eweights=eweights,
        vweight=vweight,
        edges_a=a.astype(np.int64),
        edges_b=b.astype(np.int64),
        edges_w=w.astype(np.int64),
        art_blocks=active_blocks.astype(np.int64),
    )


def _contract(g: LevelGraph, cluster: np.ndarray):
    reps = cluster[: g.nonart]
    uniq, first_idx = np.unique(reps, return_index=True)
    appearance = np.argsort(first_idx, kind="stable")
    c_nonart = uniq.size
    new_of = np.full(g.n, -1, dtype=np.int64)
    new_of[uniq[appearance]] = np.arange(c_nonart)
    n_art = g.n - g.nonart
    new_of[g.nonart :] = c_nonart + np.arange(n_art)
    cmap = new_of[cluster]

    cn = c_nonart + n_art
    vweight = np.zeros(cn, dtype=np.int64)
    np.add.at(vweight, cmap[: g.nonart], g.vweight[: g.nonart])
    vweight[c_nonart:] = g.vweight[g.nonart :]

    ca = cmap[g.edges_a]
    cb = cmap[g.edges_b]
    keep = ca != cb
    ca, cb, w = ca[keep], cb[keep], g.edges_w[keep]
    lo = np.minimum(ca, cb)
    hi = np.maximum(ca, cb)
    key = lo * cn + hi
    uniq_key, inv = np.unique(key, return_inverse=True)
    ew = np.bincount(inv, weights=w).astype(np.int64)
    ea = (uniq_key // cn).astype(np.int64)
    eb = (uniq_key % cn).astype(np.int64)

    indptr, indices, eweights = _csr_from_edges(cn, ea, eb, ew)
    coarse = LevelGraph(
        n=cn,
        nonart=c_nonart,
        indptr=indptr,
        indices=indices,
        eweights=eweights,
        vweight=vweight,
        edges_a=ea,
        edges_b=eb,
        edges_w=ew,
        art_blocks=g.art_blocks,
    )
    return coarse, cmap


def compute_cluster_cap(l_max: int, m: int, k: int) -> int:
    """Largest cluster weight that keeps greedy assignment feasible.

    When every item weighs at most ``(l_max*k - m) // (k-1)``, the minimum
    block load (at most ``floor((m-w)/k)``) always leaves room under
    ``l_max``, so block selection can never run out of feasible blocks.
    """
    if k <= 1:
        return max(1, l_max)
    return max(1, min(l_max, (l_max * k - m) // (k - 1)))


def coarsen(
    model: CspacModel,
    rounds: int = 3,
    size_threshold: float | None = None,
    cluster_cap: int | None = None,
    threshold_factor: float = 1.0,
) -> Hierarchy:
    """Build the coarsening hierarchy of the augmented model.

    Repeats {<= ``rounds`` label-propagation rounds, contract} until the
    level holds fewer vertices than the threshold (default
    ``threshold_factor * max(|beta|/k, k)`` counting all k artificial
    vertices) or a pass shrinks the graph by less than 1%.  Artificial
    vertices never join clusters.
    """
    level0 = build_level0(model)
    k = model.k
    total_beta = model.n_edge_vertices + k
    if size_threshold is None:
        size_threshold = threshold_factor * max(total_beta / k, k)
    if cluster_cap is None:
        cluster_cap = int(np.iinfo(np.int64).max // 4)
    hierarchy = Hierarchy(levels=[level0])
    while len(hierarchy.levels) < 64:
        g = hierarchy.coarsest
        if g.nonart + k < size_threshold:
            break
        cluster = np.arange(g.n, dtype=np.int64)
        cluster_weight = g.vweight.copy()
        moves = lp_cluster(
            g.indptr,
            g.indices,
            g.eweights,
            g.vweight,
            g.nonart,
            cluster_cap,
            rounds,
            cluster,
            cluster_weight,
        )
        if moves == 0:
            break
        coarse, cmap = _contract(g, cluster)
        if (coarse.nonart + k) / (g.nonart + k) > 0.99:
            break
        hierarchy.levels.append(coarse)
        hierarchy.maps.append(cmap)
    return hierarchy


def initial_partition(
    level: LevelGraph,
    params: FennelParams,
    k: int,
    loads,
    queue: BlockMinQueue,
) -> np.ndarray:
    """Assign the level's non-artificial vertices in index order.

    Artificial slots are pre-assigned to their own blocks; ``loads`` holds
    the global block loads and is advanced by every assignment.
    """
    nonart = level.nonart
    assign = [-1] * nonart + level.art_blocks.tolist()
    indptr = level.indptr.tolist()
    indices = level.indices.tolist()
    eweights = level.eweights.tolist()
    vweight = level.vweight.tolist()
    sift = queue.sift_down
    for u in range(nonart):
        nw: dict[int, float] = {}
        for e in range(indptr[u], indptr[u + 1]):
            b = assign[indices[e]]
            if b >= 0:
                if b in nw:
                    nw[b] += eweights[e]
                else:
                    nw[b] = eweights[e]
        w_u = vweight[u]
        blk = select_block(nw, w_u, loads, queue, params)
        assign[u] = blk
        loads[blk] += w_u
        sift(blk)
    return np.asarray(assign, dtype=np.int64)


def refine(
    hierarchy: Hierarchy,
    assignment: np.ndarray,
    loads: np.ndarray,
    params: FennelParams,
    rounds: int = 3,
) -> np.ndarray:
    """Project the coarsest assignment down the hierarchy, running up to
    ``rounds`` refinement passes at every level.  ``loads`` is kept
    consistent with the returned finest-level assignment."""
    assign = np.asarray(assignment, dtype=np.int64).copy()
    for li in range(len(hierarchy.levels) - 1, -1, -1):
        g = hierarchy.levels[li]
        lp_refine(
            g.indptr,
            g.indices,
            g.eweights,
            g.vweight,
            g.nonart,
            assign,
            loads,
            params.l_max,
            params.alpha,
            params.gamma,
            rounds,
        )
        if li > 0:
            assign = assign[hierarchy.maps[li - 1]]
    return assign


def partition_model(
    model: CspacModel,
    block_loads: np.ndarray,
    params: FennelParams,
    rounds: int = 3,
    size_threshold: float | None = None,
    cluster_cap: int | None = None,
    threshold_factor: float = 1.0,
) -> tuple[np.ndarray, np.ndarray]:
    """Full multilevel pass over one augmented model.

    Returns (block per edge-vertex, updated load array).
    """
    hierarchy = coarsen(
        model,
        rounds=rounds,
        size_threshold=size_threshold,
        cluster_cap=cluster_cap,
        threshold_factor=threshold_factor,
    )
    # python-int loads for the selection loop, numpy for the kernels
    loads_list = np.asarray(block_loads, dtype=np.int64).tolist()
    queue = BlockMinQueue(loads_list)
    assign = initial_partition(hierarchy.coarsest, params, model.k, loads_list, queue)
    loads = np.asarray(loads_list, dtype=np.int64)
    assign0 = refine(hierarchy, assign, loads, params, rounds=rounds)
    return assign0[: model.n_edge_vertices], loads
