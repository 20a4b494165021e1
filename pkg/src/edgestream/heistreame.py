"""Buffered streaming driver.

Per batch: load the subgraph, build and augment the model, run the
multilevel partitioner, then permanently assign the batch's edges and
update the global per-vertex block record.  Strictly sequential: each
batch reads the record written by its predecessors.
"""

from __future__ import annotations

import random
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from edgestream.errors import EdgeStreamError, PartitionStageError
from edgestream.graph_io import load_batch, open_graph
from edgestream.metrics import MetricsReport, compute_l_max, peak_rss_bytes, replication_factor
from edgestream.model import MINIMAL, CspacModel, ModelMode, augment_with_blocks, build_cspac
from edgestream.multilevel import (
    AlphaPolicy,
    BatchStats,
    FennelParams,
    StreamStats,
    compute_alpha,
    compute_cluster_cap,
    partition_model,
)


@dataclass
class PartitionState:
    """Global streaming state: per-block edge loads and the per-vertex
    record of blocks holding previously committed incident edges.

    ``record_mode`` is ``minimal`` (most recent block only, O(n)) or
    ``full`` (every block per vertex, feeding maximal / r-subset models).
    The most recent block is tracked in both modes.
    """

    k: int
    n: int
    l_max: int
    record_mode: str = "minimal"
    block_loads: np.ndarray = field(init=False)
    last_block: np.ndarray = field(init=False)
    block_sets: list[set[int]] | None = field(init=False)
    assigned_edges: int = 0

    def __post_init__(self):
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")
        if self.record_mode not in ("minimal", "full"):
            raise ValueError(f"unknown record mode {self.record_mode!r}")
        self.block_loads = np.zeros(self.k, dtype=np.int64)
        self.last_block = np.full(self.n + 1, -1, dtype=np.int64)
        self.block_sets = (
            [set() for _ in range(self.n + 1)] if self.record_mode == "full" else None
        )


@dataclass
class RunConfig:
    """One partitioning run: buffer size, block count, imbalance, model
    mode, alpha policy, label-propagation rounds, seed, and file paths."""

    graph: str | Path
    k: int
    delta: int = 32768
    eps: float = 0.03
    mode: ModelMode = MINIMAL
    alpha: AlphaPolicy = AlphaPolicy("batch")
    rounds: int = 3
    seed: int = 0
    output: str | Path | None = None
    summary: str | Path | None = None
    gamma: float = 1.5
    threshold_factor: float = 1.0
    static_nstar_half: bool = False
    freighte_full_record: bool = False

    def __post_init__(self):
        if self.delta < 1:
            raise ValueError(f"delta must be >= 1, got {self.delta}")
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")
        if self.eps < 0:
            raise ValueError(f"eps must be >= 0, got {self.eps}")
        if self.rounds < 1:
            raise ValueError(f"rounds must be >= 1, got {self.rounds}")


def commit(
    state: PartitionState, model: CspacModel, assignment: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Permanently assign the batch's edges per the model's edge-vertex
    blocks; update loads and the per-vertex record (most recent overwrites,
    full mode also inserts).  Returns the emitted (u, v, block) arrays in
    edge-vertex induction order."""
    blocks = np.asarray(assignment, dtype=np.int64)
    n_ev = model.n_edge_vertices
    if blocks.size != n_ev:
        raise ValueError(f"assignment covers {blocks.size} edge-vertices, expected {n_ev}")
    if n_ev == 0:
        return (np.empty(0, np.int64),) * 3
    if bool((blocks < 0).any()) or bool((blocks >= state.k).any()):
        raise ValueError("block id out of range")

    state.block_loads += np.bincount(blocks, minlength=state.k)
    if int(state.block_loads.max()) > state.l_max:
        raise AssertionError(
            f"block load {int(state.block_loads.max())} exceeds l_max={state.l_max}"
        )
    state.assigned_edges += n_ev

    verts = np.empty(2 * n_ev, dtype=np.int64)
    verts[0::2] = model.ev_u
    verts[1::2] = model.ev_v
    per_vert = np.repeat(blocks, 2)
    rev_v = verts[::-1]
    uniq, first = np.unique(rev_v, return_index=True)
    state.last_block[uniq] = per_vert[::-1][first]

    if state.block_sets is not None:
        sets = state.block_sets
        for u, v, b in zip(model.ev_u.tolist(), model.ev_v.tolist(), blocks.tolist()):
            sets[u].add(b)
            sets[v].add(b)

    return model.ev_u.copy(), model.ev_v.copy(), blocks.copy()


def partition_stream(config: RunConfig) -> tuple[np.ndarray, MetricsReport]:
    """Run the full buffered pipeline over the input graph.

    Returns the (m, 3) array of (u, v, block) assignments in commit order
    and the metrics report.  Every edge is assigned exactly once and the
    final loads respect ``l_max`` exactly.
    """
    t0 = time.perf_counter()
    stream = open_graph(config.graph)
    n, m = stream.header.n, stream.header.m
    k = config.k
    l_max = compute_l_max(m, k, config.eps)
    state = PartitionState(
        k=k,
        n=n,
        l_max=l_max,
        record_mode="full" if config.mode.needs_full_record else "minimal",
    )
    rng = random.Random(config.seed)
    cluster_cap = compute_cluster_cap(l_max, m, k)
    n_star = m / 2 if config.static_nstar_half else float(m)
    stream_stats = StreamStats(n_star=n_star)

    out_u: list[np.ndarray] = []
    out_v: list[np.ndarray] = []
    out_b: list[np.ndarray] = []
    n_batches = -(-n // config.delta)
    for b in range(1, n_batches + 1):
        stage = "load"
        try:
            batch = load_batch(stream, config.delta, b)
            if batch.edge_count == 0:
                continue
            stage = "model"
            model = build_cspac(batch)
            stream_stats.observe(model.n_edge_vertices, model.n_aux_edges)
            stage = "augment"
            augment_with_blocks(model, state, config.mode, rng)
            stage = "alpha"
            alpha = compute_alpha(
                config.alpha,
                k,
                stream_stats,
                BatchStats(n_s=model.n_edge_vertices, m_s=model.n_aux_edges),
            )
            params = FennelParams(alpha=alpha, l_max=l_max, gamma=config.gamma)
            stage = "partition"
            blocks, _ = partition_model(
                model,
                state.block_loads,
                params,
                rounds=config.rounds,
                cluster_cap=cluster_cap,
                threshold_factor=config.threshold_factor,
            )
            stage = "commit"
            eu, ev, eb = commit(state, model, blocks)
        except Exception as exc:
            raise PartitionStageError(stage, b, exc) from exc
        out_u.append(eu)
        out_v.append(ev)
        out_b.append(eb)

    if state.assigned_edges != m:
        raise EdgeStreamError(
            f"assigned {state.assigned_edges} edges, header announced {m}"
        )
    if m:
        assignments = np.stack(
            [np.concatenate(out_u), np.concatenate(out_v), np.concatenate(out_b)], axis=1
        )
    else:
        assignments = np.empty((0, 3), dtype=np.int64)
    runtime_ms = (time.perf_counter() - t0) * 1000.0

    rf, replica_total = replication_factor(assignments, n, k)
    max_load = int(state.block_loads.max()) if k else 0
    report = MetricsReport(
        rf=rf,
        replica_total=replica_total,
        block_sizes=state.block_loads.copy(),
        max_load=max_load,
        l_max=l_max,
        imbalance=(max_load * k / m - 1.0) if m else 0.0,
        runtime_ms=runtime_ms,
        parse_ms=stream.parse_seconds * 1000.0,
        peak_rss_bytes=peak_rss_bytes(),
    )
    stream.close()
    return assignments, report
