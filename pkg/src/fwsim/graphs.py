"""Graph ingestion and dense distance-matrix layout.

Edge lists come from SNAP-style text files or a synthetic generator. Distance
matrices are dense uint32 numpy arrays with INF marking absent edges, and can
be converted between row-major and tile-major layouts (padding as needed).
"""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, ParseError

INF = 0xFFFF_FFFF
"""Sentinel for "no path": the maximum representable 32-bit unsigned value."""


@dataclass(frozen=True, eq=False)
class EdgeList:
    """A weighted directed graph as a flat edge array.

    edges has shape (E, 3) with uint32 rows (src, dst, weight). Vertex ids are
    dense and 0-based; weights are strictly below INF; self-loops are never
    stored (self-distances are forced to 0 when the matrix is built).
    """

    num_vertices: int
    edges: np.ndarray

    def __post_init__(self):
        e = np.asarray(self.edges, dtype=np.uint32).reshape(-1, 3)
        object.__setattr__(self, "edges", e)
        if self.num_vertices < 0:
            raise ConfigError("num_vertices must be non-negative")
        if len(e):
            if int(e[:, :2].max()) >= self.num_vertices:
                raise ConfigError("edge endpoint out of range")
            if int(e[:, 2].max()) >= INF:
                raise ConfigError("edge weight must be below the INF sentinel")
            if np.any(e[:, 0] == e[:, 1]):
                raise ConfigError("self-loop edges are not retained")

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    def __eq__(self, other):
        if not isinstance(other, EdgeList):
            return NotImplemented
        return self.num_vertices == other.num_vertices and np.array_equal(
            self.edges, other.edges
        )


def parse_edge_list(text, directed: bool = True) -> EdgeList:
    """Parse whitespace-separated "u v [w]" records into an EdgeList.

    Lines starting with '#' and blank lines are skipped. A missing weight
    defaults to 1. Vertex ids are re-indexed densely in first-seen order.
    Duplicate edges keep the minimum weight; self-loops are dropped.
    Undirected mode emits both directions of every record.
    """
    if isinstance(text, str):
        lines = text.splitlines()
    elif isinstance(text, (io.TextIOBase, io.StringIO)):
        lines = text
    else:
        lines = text

    index: dict[int, int] = {}
    best: dict[tuple[int, int], int] = {}

    def vertex(raw_id: int) -> int:
        idx = index.get(raw_id)
        if idx is None:
            idx = len(index)
            index[raw_id] = idx
        return idx

    for line_no, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split()
        if len(fields) < 2:
            raise ParseError(f"expected 'u v [w]', got {line!r}", line_no)
        try:
            u_raw, v_raw = int(fields[0]), int(fields[1])
            w = int(fields[2]) if len(fields) >= 3 else 1
        except ValueError:
            raise ParseError(f"non-integer token in {line!r}", line_no) from None
        if u_raw < 0 or v_raw < 0:
            raise ParseError(f"negative vertex id in {line!r}", line_no)
        if w < 0 or w >= INF:
            raise ParseError(
                f"weight {w} outside the representable range [0, {INF})", line_no
            )
        u, v = vertex(u_raw), vertex(v_raw)
        if u == v:
            continue
        pairs = [(u, v), (v, u)] if not directed else [(u, v)]
        for key in pairs:
            prev = best.get(key)
            if prev is None or w < prev:
                best[key] = w

    edges = np.array(
        [(u, v, w) for (u, v), w in best.items()], dtype=np.uint32
    ).reshape(-1, 3)
    return EdgeList(num_vertices=len(index), edges=edges)


def load_edge_list(path, directed: bool = True) -> EdgeList:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_edge_list(fh, directed=directed)


def gen_synthetic(n: int, density: float, weight_range=(1, 100), seed: int = 0) -> EdgeList:
    """Generate a random digraph: each ordered pair (u, v), u != v, is included
    independently with probability `density`, weight uniform in [lo, hi].

    Deterministic for a fixed seed (numpy PCG64 stream).
    """
    lo, hi = weight_range
    if not (0.0 < density <= 1.0):
        raise ConfigError(f"density must be in (0, 1], got {density}")
    if not (1 <= lo <= hi < INF):
        raise ConfigError(f"weight range must satisfy 1 <= lo <= hi < INF, got {weight_range}")
    if n < 0:
        raise ConfigError("n must be non-negative")

    rng = np.random.default_rng(seed)
    mask = rng.random((n, n)) < density
    np.fill_diagonal(mask, False)
    weights = rng.integers(lo, hi + 1, size=(n, n), dtype=np.int64).astype(np.uint32)
    src, dst = np.nonzero(mask)
    edges = np.column_stack([src, dst, weights[mask]]).astype(np.uint32)
    return EdgeList(num_vertices=n, edges=edges)


def build_distance_matrix(e: EdgeList) -> np.ndarray:
    """Dense n x n uint32 matrix: edge weights, 0 diagonal, INF elsewhere."""
    n = e.num_vertices
    d = np.full((n, n), INF, dtype=np.uint32)
    np.fill_diagonal(d, 0)
    if len(e.edges):
        np.minimum.at(d, (e.edges[:, 0], e.edges[:, 1]), e.edges[:, 2])
        np.fill_diagonal(d, 0)
    return d


@dataclass(frozen=True, eq=False)
class TiledMatrix:
    """A distance matrix in tile-major layout.

    tiles has shape (m, m, b, b); n = m * b is the padded dimension. Padded
    rows/columns are INF off-diagonal and 0 on-diagonal, so padding never
    changes any original shortest path.
    """

    n: int
    b: int
    m: int
    tiles: np.ndarray

    def __post_init__(self):
        if self.n != self.m * self.b:
            raise ConfigError("padded dimension must equal m * b")
        if self.tiles.shape != (self.m, self.m, self.b, self.b):
            raise ConfigError("tile grid shape mismatch")

    def __eq__(self, other):
        if not isinstance(other, TiledMatrix):
            return NotImplemented
        return (
            (self.n, self.b, self.m) == (other.n, other.b, other.m)
            and np.array_equal(self.tiles, other.tiles)
        )


def to_tile_major(d: np.ndarray, block_size: int) -> TiledMatrix:
    """Re-layout a square matrix into b x b tiles, padding n up to a multiple
    of b with path-neutral rows/columns (INF off-diagonal, 0 on-diagonal)."""
    if block_size < 1:
        raise ConfigError("block size must be >= 1")
    n0 = d.shape[0]
    if d.shape != (n0, n0):
        raise ConfigError("distance matrix must be square")
    m = max(1, -(-n0 // block_size))
    n = m * block_size
    padded = np.full((n, n), INF, dtype=np.uint32)
    np.fill_diagonal(padded, 0)
    padded[:n0, :n0] = d
    tiles = padded.reshape(m, block_size, m, block_size).swapaxes(1, 2).copy()
    return TiledMatrix(n=n, b=block_size, m=m, tiles=tiles)


def from_tile_major(t: TiledMatrix, original_n: int) -> np.ndarray:
    """Exact inverse of to_tile_major restricted to the original n x n region."""
    if original_n > t.n:
        raise ConfigError(
            f"original_n {original_n} exceeds the tiled dimension {t.n}"
        )
    flat = t.tiles.swapaxes(1, 2).reshape(t.n, t.n)
    return flat[:original_n, :original_n].copy()


def write_matrix_csv(d: np.ndarray, stream) -> None:
    """Debug dump: one row per line, 'INF' literal for the sentinel."""
    close = False
    if isinstance(stream, (str, bytes)):
        stream = open(stream, "w", encoding="utf-8")
        close = True
    try:
        for row in d:
            stream.write(
                ",".join("INF" if v == INF else str(int(v)) for v in row) + "\n"
            )
    finally:
        if close:
            stream.close()


def read_matrix_csv(stream) -> np.ndarray:
    """Inverse of write_matrix_csv."""
    close = False
    if isinstance(stream, (str, bytes)):
        stream = open(stream, "r", encoding="utf-8")
        close = True
    try:
        rows = []
        for line in stream:
            line = line.strip()
            if not line:
                continue
            rows.append([INF if f == "INF" else int(f) for f in line.split(",")])
        return np.array(rows, dtype=np.uint32)
    finally:
        if close:
            stream.close()
