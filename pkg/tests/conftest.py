"""Shared helpers for the test suite."""

from __future__ import annotations

import random
from pathlib import Path

import pytest


def adjacency_from_edges(n: int, edges) -> list[list[int]]:
    """1-indexed adjacency rows, neighbors in edge insertion order."""
    adj: list[list[int]] = [[] for _ in range(n + 1)]
    for u, v in edges:
        adj[u].append(v)
        adj[v].append(u)
    return adj


def metis_text(n: int, edges) -> str:
    adj = adjacency_from_edges(n, edges)
    lines = [f"{n} {len(edges)}"]
    for u in range(1, n + 1):
        lines.append(" ".join(map(str, adj[u])))
    return "\n".join(lines) + "\n"


def write_metis(path: Path, n: int, edges) -> Path:
    path.write_text(metis_text(n, edges), encoding="ascii")
    return path


def random_edges(rng: random.Random, n: int, m: int) -> list[tuple[int, int]]:
    """m distinct undirected edges on [1..n], in random draw order."""
    max_m = n * (n - 1) // 2
    m = min(m, max_m)
    seen = set()
    edges = []
    while len(edges) < m:
        u = rng.randint(1, n)
        v = rng.randint(1, n)
        if u == v:
            continue
        key = (min(u, v), max(u, v))
        if key in seen:
            continue
        seen.add(key)
        edges.append(key)
    return edges


def random_connected_edges(rng: random.Random, n: int, extra: int) -> list[tuple[int, int]]:
    """Random tree plus ``extra`` distinct extra edges: connected, min degree 1."""
    edges = []
    seen = set()
    order = list(range(1, n + 1))
    rng.shuffle(order)
    for i in range(1, n):
        u = order[rng.randrange(i)]
        v = order[i]
        key = (min(u, v), max(u, v))
        edges.append(key)
        seen.add(key)
    max_m = n * (n - 1) // 2
    target = min(len(edges) + extra, max_m)
    while len(edges) < target:
        u = rng.randint(1, n)
        v = rng.randint(1, n)
        if u == v:
            continue
        key = (min(u, v), max(u, v))
        if key in seen:
            continue
        seen.add(key)
        edges.append(key)
    return edges


@pytest.fixture
def tmp_graph(tmp_path):
    """Factory writing an edge list as a METIS file under the test tmpdir."""

    def make(n: int, edges, name: str = "g.metis") -> Path:
        return write_metis(tmp_path / name, n, edges)

    return make
