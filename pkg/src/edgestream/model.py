"""Contracted split-and-connect batch model.

``build_cspac`` turns a batch graph into a graph whose vertices are the
batch's edges: scanning each current vertex's retained adjacency row, an
entry ``(u, v)`` induces an edge-vertex at its first qualifying
orientation (``v`` past, or ``v`` current with the larger id).  Every
original vertex's incident edge-vertices are chained, in scan order, into
a path of unit-weight auxiliary edges.

``augment_with_blocks`` appends one artificial vertex per block, weighted
by the block's current edge load, and connects edge-vertices whose other
endpoint lives in a past batch to the blocks recorded for that endpoint
(all of them, a random sample of ``r``, or only the most recent one).
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

import numpy as np

from edgestream.graph_io import BatchGraph


@dataclass(frozen=True)
class ModelMode:
    """How recorded block sets feed artificial edges: maximal, r-subset, or minimal."""

    kind: str
    r: int | None = None

    _KINDS = ("maximal", "rsubset", "minimal")

    def __post_init__(self):
        if self.kind not in self._KINDS:
            raise ValueError(f"unknown model mode {self.kind!r}")
        if self.kind == "rsubset":
            if self.r is None or self.r < 1:
                raise ValueError("rsubset mode requires r >= 1")
        elif self.r is not None:
            raise ValueError(f"mode {self.kind!r} takes no r parameter")

    @property
    def needs_full_record(self) -> bool:
        return self.kind in ("maximal", "rsubset")

    @classmethod
    def parse(cls, text: str) -> "ModelMode":
        """Parse ``minimal``, ``maximal``, or ``rsubset:R``."""
        if text in ("minimal", "maximal"):
            return cls(text)
        if text.startswith("rsubset:"):
            return cls("rsubset", int(text.split(":", 1)[1]))
        raise ValueError(f"cannot parse model mode {text!r}")

    def __str__(self) -> str:
        return f"rsubset:{self.r}" if self.kind == "rsubset" else self.kind


MINIMAL = ModelMode("minimal")
MAXIMAL = ModelMode("maximal")


@dataclass
class CspacModel:
    """Edge-vertices, their auxiliary path edges, and (once augmented) the
    artificial block vertices and edges.

    ``ev_u[j], ev_v[j]`` are the global endpoints of the edge that induced
    edge-vertex ``j`` (``ev_u`` is the scanning current vertex);
    ``past_endpoint[j]`` is the global id of the past endpoint, or -1.
    """

    batch_index: int
    ev_u: np.ndarray
    ev_v: np.ndarray
    past_endpoint: np.ndarray
    aux_a: np.ndarray
    aux_b: np.ndarray
    aux_w: np.ndarray
    k: int | None = None
    artificial_base: int | None = None
    art_weights: np.ndarray | None = None
    art_edge_ev: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=np.int64))
    art_edge_block: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=np.int64))
    art_edge_w: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=np.int64))

    @property
    def n_edge_vertices(self) -> int:
        return int(self.ev_u.size)

    @property
    def n_aux_edges(self) -> int:
        return int(self.aux_a.size)

    @property
    def augmented(self) -> bool:
        return self.artificial_base is not None

    @property
    def edge_vertices(self) -> list[tuple[int, int]]:
        """Inducing global edges, one per edge-vertex, in induction order."""
        return list(zip(self.ev_u.tolist(), self.ev_v.tolist()))

    @property
    def aux_edges(self) -> list[tuple[int, int, int]]:
        return list(zip(self.aux_a.tolist(), self.aux_b.tolist(), self.aux_w.tolist()))

    @property
    def vertex_weights(self) -> np.ndarray:
        """Unit weight per edge-vertex, current block load per artificial vertex."""
        ones = np.ones(self.n_edge_vertices, dtype=np.int64)
        if not self.augmented:
            return ones
        return np.concatenate([ones, self.art_weights])


def build_cspac(batch: BatchGraph) -> CspacModel:
    """Build the contracted split-and-connect graph of a batch.

    One edge-vertex per edge of the batch; per original vertex, its
    incident edge-vertices form a simple path linked in adjacency scan
    order.  With every batch vertex having at least one retained edge the
    model has ``|E_b|`` vertices and ``2|E_b| - |V_b|`` auxiliary edges.
    """
    cc = batch.current_count
    nv = cc + batch.past_count
    v_loc = batch.neighbors
    deg = np.diff(batch.indptr)
    u_loc = np.repeat(np.arange(cc, dtype=np.int64), deg)

    induce = v_loc > u_loc  # past ids sort above all current ids
    n_ev = int(induce.sum())
    ev_ids = np.cumsum(induce, dtype=np.int64) - 1

    ev_at_entry = np.empty(v_loc.size, dtype=np.int64)
    ev_at_entry[induce] = ev_ids[induce]

    # look up the edge-vertex id for the second appearance of a
    # current-current edge (scanned from its larger endpoint)
    second = ~induce
    if int(second.sum()):
        key_induced = u_loc[induce] * nv + v_loc[induce]
        key_second = v_loc[second] * nv + u_loc[second]
        order = np.argsort(key_induced, kind="stable")
        pos = np.searchsorted(key_induced[order], key_second)
        if bool((pos >= key_induced.size).any()) or bool(
            (key_induced[order][np.minimum(pos, key_induced.size - 1)] != key_second).any()
        ):
            raise ValueError(
                f"batch {batch.batch_index}: asymmetric adjacency, edge listed once"
            )
        ev_at_entry[second] = ev_ids[induce][order][pos]

    ug = batch.local_to_global[u_loc]
    vg = batch.local_to_global[v_loc]
    ind_u = ug[induce]
    ind_v = vg[induce]
    is_past_entry = v_loc >= cc
    # edges between two past vertices cannot occur: adjacency rows exist
    # only for current vertices, so the scanning endpoint is current
    assert u_loc.size == 0 or int(u_loc.max()) < cc
    past_endpoint = np.where(v_loc[induce] >= cc, ind_v, np.int64(-1))

    # path events: each entry extends the scanning vertex's path; an entry
    # to a past vertex extends the past vertex's path at the same position
    evt_vertex = np.concatenate([u_loc, v_loc[is_past_entry]])
    evt_pos = np.concatenate(
        [np.arange(v_loc.size, dtype=np.int64), np.flatnonzero(is_past_entry)]
    )
    evt_ev = np.concatenate([ev_at_entry, ev_at_entry[is_past_entry]])
    order = np.lexsort((evt_pos, evt_vertex))
    sv = evt_vertex[order]
    se = evt_ev[order]
    same = sv[1:] == sv[:-1] if sv.size else np.empty(0, dtype=bool)
    aux_a = se[:-1][same] if sv.size else np.empty(0, dtype=np.int64)
    aux_b = se[1:][same] if sv.size else np.empty(0, dtype=np.int64)

    return CspacModel(
        batch_index=batch.batch_index,
        ev_u=ind_u,
        ev_v=ind_v,
        past_endpoint=past_endpoint,
        aux_a=aux_a,
        aux_b=aux_b,
        aux_w=np.ones(aux_a.size, dtype=np.int64),
    )


def augment_with_blocks(
    model: CspacModel,
    state,
    mode: ModelMode,
    rng: random.Random | None = None,
) -> CspacModel:
    """Append the k artificial block vertices and the artificial edges
    encoding prior assignments of past endpoints.  Mutates and returns
    ``model``.
    """
    if model.augmented:
        raise ValueError("model already augmented")
    if mode.needs_full_record and state.record_mode != "full":
        raise ValueError(f"mode {mode} requires a full block record, state keeps only the most recent")
    if mode.kind == "rsubset" and rng is None:
        raise ValueError("rsubset mode requires an rng")

    k = state.k
    model.k = k
    model.artificial_base = model.n_edge_vertices
    model.art_weights = np.asarray(state.block_loads, dtype=np.int64).copy()

    past_idx = np.flatnonzero(model.past_endpoint >= 0)
    ev_list: list[int] | np.ndarray
    blk_list: list[int] | np.ndarray
    if past_idx.size == 0:
        ev_list, blk_list = [], []
    elif mode.kind == "minimal":
        vglob = model.past_endpoint[past_idx]
        blk = np.asarray(state.last_block)[vglob]
        valid = blk >= 0
        ev_list = past_idx[valid]
        blk_list = blk[valid].astype(np.int64)
    else:
        evs: list[int] = []
        blks: list[int] = []
        for j in past_idx.tolist():
            recorded = sorted(state.block_sets[int(model.past_endpoint[j])])
            if mode.kind == "rsubset" and len(recorded) > mode.r:
                recorded = rng.sample(recorded, mode.r)
            for i in recorded:
                evs.append(j)
                blks.append(i)
        ev_list, blk_list = evs, blks

    ev_arr = np.asarray(ev_list, dtype=np.int64)
    blk_arr = np.asarray(blk_list, dtype=np.int64)
    if ev_arr.size:
        # collapse multiplicity into one edge of aggregate weight
        key = ev_arr * k + blk_arr
        uniq, counts = np.unique(key, return_counts=True)
        model.art_edge_ev = uniq // k
        model.art_edge_block = uniq % k
        model.art_edge_w = counts.astype(np.int64)
    return model


def induced_edge_partition(model: CspacModel, assignment: np.ndarray) -> np.ndarray:
    """Map a vertex partition of the model to the batch's edge partition.

    Edge ``j`` of the batch receives the block of edge-vertex ``j``; the
    correspondence is a bijection.
    """
    assignment = np.asarray(assignment)
    n_ev = model.n_edge_vertices
    if assignment.size < n_ev:
        raise ValueError(f"assignment covers {assignment.size} vertices, need {n_ev}")
    blocks = assignment[:n_ev]
    if n_ev and bool((blocks < 0).any()):
        raise ValueError("unassigned edge-vertex")
    return blocks.astype(np.int64, copy=True)


def dump_model_metis(model: CspacModel) -> str:
    """Render the (augmented) model as weighted METIS text for inspection."""
    n_ev = model.n_edge_vertices
    n = n_ev + (model.k if model.augmented else 0)
    a = [model.aux_a, model.aux_b]
    w = [model.aux_w]
    if model.augmented and model.art_edge_ev.size:
        a = [model.aux_a, np.concatenate([model.aux_b, model.art_edge_ev])]
        a[0] = np.concatenate([model.aux_a, model.art_edge_block + model.artificial_base])
        w = [np.concatenate([model.aux_w, model.art_edge_w])]
    ea = np.concatenate([a[0], a[1]])
    eb = np.concatenate([a[1], a[0]])
    ew = np.concatenate([w[0], w[0]])
    weights = model.vertex_weights
    lines = [f"{n} {a[0].size} 011"]
    order = np.lexsort((eb, ea))
    ea, eb, ew = ea[order], eb[order], ew[order]
    starts = np.searchsorted(ea, np.arange(n))
    ends = np.searchsorted(ea, np.arange(n) + 1)
    for u in range(n):
        parts = [str(int(weights[u]))]
        for e in range(starts[u], ends[u]):
            parts.append(f"{int(eb[e]) + 1} {int(ew[e])}")
        lines.append(" ".join(parts))
    return "\n".join(lines) + "\n"
