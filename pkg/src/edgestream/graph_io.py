"""Graph file streams and per-batch subgraph loading.

Two on-disk formats describe the same vertex-centric stream:

* METIS text: a header line ``n m`` (optionally ``n m 0``), then one line
  per vertex listing its 1-indexed neighbors.  Lines starting with ``%``
  are comments.
* Binary adjacency (little-endian): u64 magic ``0x53544352_43555431``,
  u64 version ``1``, u64 ``n``, u64 ``m``, then ``n+1`` u64 offsets into
  the adjacency array, then ``2m`` u64 0-indexed neighbor ids.

Both streams yield, per vertex in id order, the 1-indexed neighbor array
of that vertex.  Self-loops and repeated neighbors within a line are
rejected; weighted formats are unsupported.
"""

from __future__ import annotations

import struct
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from edgestream.errors import GraphFormatError

BINARY_MAGIC = 0x53544352_43555431
BINARY_VERSION = 1
_HEADER_STRUCT = struct.Struct("<QQQQ")


@dataclass(frozen=True)
class GraphHeader:
    """Vertex and undirected-edge counts announced by the input file."""

    n: int
    m: int

    def __post_init__(self):
        if self.n < 1:
            raise GraphFormatError(f"vertex count must be >= 1, got {self.n}")
        if self.m < 0:
            raise GraphFormatError(f"edge count must be >= 0, got {self.m}")


def _validate_row(row: np.ndarray, vertex_id: int, n: int) -> None:
    if row.size == 0:
        return
    lo = int(row.min())
    hi = int(row.max())
    if lo < 1 or hi > n:
        raise GraphFormatError(
            f"vertex {vertex_id}: neighbor id out of range [1..{n}] (saw {lo if lo < 1 else hi})"
        )
    if bool((row == vertex_id).any()):
        raise GraphFormatError(f"vertex {vertex_id}: self-loop rejected")
    if np.unique(row).size != row.size:
        raise GraphFormatError(f"vertex {vertex_id}: parallel edge (repeated neighbor) rejected")


class MetisTextStream:
    """Sequential reader over a METIS text file.

    Iteration yields one ``np.int64`` array of 1-indexed neighbor ids per
    vertex.  ``parse_seconds`` accumulates time spent reading and parsing.
    """

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self._fh = open(self.path, "r", encoding="ascii")
        self.vertices_read = 0
        self._entries_seen = 0
        self.parse_seconds = 0.0
        self.header = self._read_header()

    def _next_content_line(self) -> str | None:
        for line in self._fh:
            if line.lstrip().startswith("%"):
                continue
            return line
        return None

    def _read_header(self) -> GraphHeader:
        line = self._next_content_line()
        if line is None:
            raise GraphFormatError(f"{self.path}: empty file, no header line")
        tokens = line.split()
        if len(tokens) not in (2, 3):
            raise GraphFormatError(f"{self.path}: malformed header {line.strip()!r}")
        try:
            n = int(tokens[0])
            m = int(tokens[1])
        except ValueError as exc:
            raise GraphFormatError(f"{self.path}: malformed header {line.strip()!r}") from exc
        if len(tokens) == 3 and int(tokens[2]) != 0:
            raise GraphFormatError(
                f"{self.path}: fmt={tokens[2]} requests weights, only unit weights supported"
            )
        return GraphHeader(n=n, m=m)

    def __iter__(self):
        return self

    def __next__(self) -> np.ndarray:
        t0 = time.perf_counter()
        n = self.header.n
        if self.vertices_read >= n:
            self.parse_seconds += time.perf_counter() - t0
            raise StopIteration
        line = self._next_content_line()
        if line is None:
            raise GraphFormatError(
                f"{self.path}: fewer than n={n} vertex lines (got {self.vertices_read})"
            )
        self.vertices_read += 1
        vid = self.vertices_read
        tokens = line.split()
        try:
            row = np.array(tokens, dtype=np.int64)
        except ValueError as exc:
            raise GraphFormatError(f"{self.path}: vertex {vid}: bad neighbor token") from exc
        _validate_row(row, vid, n)
        self._entries_seen += row.size
        if self.vertices_read == n and self._entries_seen != 2 * self.header.m:
            raise GraphFormatError(
                f"{self.path}: adjacency entries {self._entries_seen} != 2m={2 * self.header.m}"
            )
        self.parse_seconds += time.perf_counter() - t0
        return row

    def close(self):
        self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()
        return False


class BinaryAdjacencyStream:
    """Sequential reader over the binary adjacency format.

    Same iteration contract as :class:`MetisTextStream`; a graph encoded in
    both formats yields identical neighborhoods in identical order.
    """

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self.vertices_read = 0
        self.parse_seconds = 0.0
        t0 = time.perf_counter()
        with open(self.path, "rb") as fh:
            head = fh.read(_HEADER_STRUCT.size)
            if len(head) != _HEADER_STRUCT.size:
                raise GraphFormatError(f"{self.path}: truncated binary header")
            magic, version, n, m = _HEADER_STRUCT.unpack(head)
            if magic != BINARY_MAGIC:
                raise GraphFormatError(f"{self.path}: bad magic 0x{magic:016x}")
            if version != BINARY_VERSION:
                raise GraphFormatError(f"{self.path}: unsupported version {version}")
            self.header = GraphHeader(n=int(n), m=int(m))
            offsets = np.fromfile(fh, dtype="<u8", count=n + 1)
            if offsets.size != n + 1:
                raise GraphFormatError(f"{self.path}: truncated offsets")
            adjacency = np.fromfile(fh, dtype="<u8", count=2 * m)
            if adjacency.size != 2 * m:
                raise GraphFormatError(f"{self.path}: truncated adjacency")
            if fh.read(1):
                raise GraphFormatError(f"{self.path}: trailing bytes after adjacency")
        if offsets[0] != 0 or offsets[-1] != 2 * m or bool((np.diff(offsets.astype(np.int64)) < 0).any()):
            raise GraphFormatError(f"{self.path}: offsets not a monotone cover of the adjacency")
        if m > 0 and adjacency.size and int(adjacency.max()) >= n:
            raise GraphFormatError(f"{self.path}: neighbor id out of range [0..{n - 1}]")
        self._offsets = offsets.astype(np.int64)
        # stored 0-indexed; iteration contract is 1-indexed
        self._adjacency = adjacency.astype(np.int64) + 1
        self.parse_seconds += time.perf_counter() - t0

    def __iter__(self):
        return self

    def __next__(self) -> np.ndarray:
        t0 = time.perf_counter()
        n = self.header.n
        if self.vertices_read >= n:
            self.parse_seconds += time.perf_counter() - t0
            raise StopIteration
        self.vertices_read += 1
        vid = self.vertices_read
        row = self._adjacency[self._offsets[vid - 1] : self._offsets[vid]]
        _validate_row(row, vid, n)
        self.parse_seconds += time.perf_counter() - t0
        return row

    def close(self):
        pass

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        return False


VertexStream = MetisTextStream | BinaryAdjacencyStream


def open_metis_stream(path: str | Path) -> MetisTextStream:
    return MetisTextStream(path)


def open_binary_stream(path: str | Path) -> BinaryAdjacencyStream:
    return BinaryAdjacencyStream(path)


def open_graph(path: str | Path) -> VertexStream:
    """Open either format, sniffing the binary magic."""
    with open(path, "rb") as fh:
        head = fh.read(8)
    if len(head) == 8 and struct.unpack("<Q", head)[0] == BINARY_MAGIC:
        return BinaryAdjacencyStream(path)
    return MetisTextStream(path)


def convert_text_to_binary(src: str | Path, dst: str | Path) -> GraphHeader:
    """Translate a METIS text file into the binary adjacency format."""
    stream = open_metis_stream(src)
    n, m = stream.header.n, stream.header.m
    rows = [row for row in stream]
    stream.close()
    degrees = np.fromiter((r.size for r in rows), dtype=np.int64, count=n)
    offsets = np.zeros(n + 1, dtype=np.uint64)
    np.cumsum(degrees, out=offsets[1:])
    adjacency = (
        np.concatenate(rows) - 1 if rows and degrees.sum() > 0 else np.empty(0, dtype=np.int64)
    )
    with open(dst, "wb") as fh:
        fh.write(_HEADER_STRUCT.pack(BINARY_MAGIC, BINARY_VERSION, n, m))
        fh.write(offsets.astype("<u8").tobytes())
        fh.write(adjacency.astype("<u8").tobytes())
    return stream.header


@dataclass
class BatchGraph:
    """Subgraph owned by one batch of the vertex stream.

    Current-batch vertices occupy local ids ``[0, current_count)`` in stream
    order; past vertices referenced by the batch occupy subsequent ids in
    first-appearance order.  ``neighbors`` holds the retained adjacency rows
    of the current vertices (local ids), concatenated, with ``indptr``
    delimiting rows.  Every retained edge ``(u, v)`` has ``u`` current and
    ``v`` in this batch or an earlier one; edges toward future batches are
    dropped, so each undirected edge is owned by exactly one batch.
    """

    batch_index: int
    delta: int
    current_count: int
    past_count: int
    local_to_global: np.ndarray
    indptr: np.ndarray
    neighbors: np.ndarray
    edge_count: int

    @property
    def adjacency(self) -> list[list[int]]:
        """Materialized per-current-vertex neighbor lists (local ids)."""
        return [
            self.neighbors[self.indptr[u] : self.indptr[u + 1]].tolist()
            for u in range(self.current_count)
        ]

    def neighbors_of(self, u_local: int) -> np.ndarray:
        return self.neighbors[self.indptr[u_local] : self.indptr[u_local + 1]]


def load_batch(stream: VertexStream, delta: int, b: int) -> BatchGraph:
    """Read batch ``b`` (1-based) of ``delta`` vertices from the stream.

    The stream must be positioned at vertex ``(b-1)*delta + 1``.  The final
    batch may hold fewer than ``delta`` vertices; all counts reflect actual
    sizes.
    """
    if delta < 1:
        raise ValueError(f"delta must be >= 1, got {delta}")
    if b < 1:
        raise ValueError(f"batch index must be >= 1, got {b}")
    if stream.vertices_read != (b - 1) * delta:
        raise ValueError(
            f"stream at vertex {stream.vertices_read + 1}, expected {(b - 1) * delta + 1}"
        )
    n = stream.header.n
    first_global = (b - 1) * delta + 1
    if first_global > n:
        raise ValueError(f"batch {b} starts past the last vertex ({n})")

    rows = []
    for _ in range(min(delta, n - first_global + 1)):
        rows.append(next(stream))
    current_count = len(rows)

    degrees = np.fromiter((r.size for r in rows), dtype=np.int64, count=current_count)
    nbrs = np.concatenate(rows) if int(degrees.sum()) > 0 else np.empty(0, dtype=np.int64)

    keep = nbrs <= b * delta
    kept = nbrs[keep]
    kept_deg = np.zeros(current_count, dtype=np.int64)
    if kept.size:
        row_of_entry = np.repeat(np.arange(current_count), degrees)[keep]
        np.add.at(kept_deg, row_of_entry, 1)
    indptr = np.zeros(current_count + 1, dtype=np.int64)
    np.cumsum(kept_deg, out=indptr[1:])

    is_past = kept < first_global
    past_vals = kept[is_past]
    if past_vals.size:
        uniq, first_idx = np.unique(past_vals, return_index=True)
        appearance = np.argsort(first_idx, kind="stable")
        rank = np.empty(uniq.size, dtype=np.int64)
        rank[appearance] = np.arange(uniq.size)
        past_local = current_count + rank[np.searchsorted(uniq, past_vals)]
        past_globals = uniq[appearance]
    else:
        past_local = np.empty(0, dtype=np.int64)
        past_globals = np.empty(0, dtype=np.int64)

    local = np.empty(kept.size, dtype=np.int64)
    local[~is_past] = kept[~is_past] - first_global
    local[is_past] = past_local

    local_to_global = np.concatenate(
        [np.arange(first_global, first_global + current_count, dtype=np.int64), past_globals]
    )

    u_rep = np.repeat(np.arange(current_count), kept_deg)
    edge_count = int((local > u_rep).sum())

    return BatchGraph(
        batch_index=b,
        delta=delta,
        current_count=current_count,
        past_count=int(past_globals.size),
        local_to_global=local_to_global,
        indptr=indptr,
        neighbors=local,
        edge_count=edge_count,
    )
