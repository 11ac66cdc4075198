"""Simple undirected graphs with adjacency, modified-adjacency and distance views.

Vertices are dense integer ids ``0..n-1``.  A :class:`Graph` is immutable after
construction and stores adjacency twice: a canonical edge array, and one packed
bit row per vertex for O(1) membership probes and fast level-synchronous BFS.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from typing import Iterable, Sequence, Union

import numpy as np

from .errors import MalformedInputError


class _Unreachable:
    """Sentinel for vertex pairs with no connecting path.

    Deliberately supports no arithmetic: using it in a numeric expression
    raises TypeError instead of silently corrupting a resolvability check.
    """

    _instance = None

    def __new__(cls) -> "_Unreachable":
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "UNREACHABLE"

    def __reduce__(self):
        return (_Unreachable, ())


UNREACHABLE = _Unreachable()

Distance = Union[int, _Unreachable]


@dataclass(frozen=True)
class EdgeListReport:
    """Counters from normalizing a raw edge list into a simple graph."""

    loops_dropped: int = 0
    duplicates_dropped: int = 0


class Graph:
    """Immutable simple undirected graph.

    ``edges`` must already be canonical: an ``(m, 2)`` int array with
    ``u < v`` and no duplicate rows.  Use :func:`build_graph` to normalize
    arbitrary input edge lists.
    """

    __slots__ = ("n", "edges", "bits", "report", "_degrees")

    def __init__(self, n: int, edges: np.ndarray, report: EdgeListReport | None = None):
        if n < 0:
            raise MalformedInputError("vertex count must be non-negative")
        edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        self.n = int(n)
        self.edges = edges
        self.report = report if report is not None else EdgeListReport()
        self._degrees = np.bincount(edges.ravel(), minlength=n) if n else np.zeros(0, dtype=np.int64)
        self.bits = _pack_adjacency(n, edges)
        self.edges.setflags(write=False)
        self._degrees.setflags(write=False)
        self.bits.setflags(write=False)

    @property
    def edge_count(self) -> int:
        return int(self.edges.shape[0])

    @property
    def degrees(self) -> np.ndarray:
        return self._degrees

    def degree(self, u: int) -> int:
        return int(self._degrees[u])

    def has_edge(self, u: int, v: int) -> bool:
        self._check_vertex(u)
        self._check_vertex(v)
        return bool(self.bits[u, v >> 3] & (128 >> (v & 7)))

    def neighbors(self, u: int) -> np.ndarray:
        """Neighbor ids of ``u`` in ascending order."""
        self._check_vertex(u)
        row = np.unpackbits(self.bits[u], count=self.n)
        return np.flatnonzero(row)

    def adjacency_row(self, u: int) -> np.ndarray:
        """Row ``u`` of the 0/1 adjacency matrix, length ``n``."""
        self._check_vertex(u)
        return np.unpackbits(self.bits[u], count=self.n)

    def modified_adjacency_row(self, u: int) -> np.ndarray:
        """Row ``u`` of the adjacency matrix with 2 in the diagonal slot."""
        row = self.adjacency_row(u)
        row[u] = 2
        return row

    def to_adjacency(self) -> np.ndarray:
        """Dense ``n x n`` 0/1 adjacency matrix (uint8)."""
        if self.n == 0:
            return np.zeros((0, 0), dtype=np.uint8)
        return np.unpackbits(self.bits, axis=1, count=self.n)

    def _check_vertex(self, u: int) -> None:
        if not 0 <= u < self.n:
            raise MalformedInputError(f"vertex id {u} out of range [0, {self.n})")

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, edges={self.edge_count})"


def _pack_adjacency(n: int, edges: np.ndarray) -> np.ndarray:
    """Packed bit rows; row u has bit v set iff {u,v} is an edge."""
    rowbytes = (n + 7) // 8
    bits = np.zeros((n, rowbytes), dtype=np.uint8)
    if edges.shape[0] == 0 or n == 0:
        return bits
    src = np.concatenate([edges[:, 0], edges[:, 1]])
    dst = np.concatenate([edges[:, 1], edges[:, 0]])
    order = np.argsort(src, kind="stable")
    src = src[order]
    dst = dst[order]
    # chunk rows so the transient dense block stays small even for n ~ 1e5
    chunk = max(1, min(n, (1 << 24) // max(n, 1) + 1))
    starts = np.searchsorted(src, np.arange(0, n + 1))
    for a in range(0, n, chunk):
        b = min(a + chunk, n)
        lo, hi = starts[a], starts[b]
        if lo == hi:
            continue
        block = np.zeros((b - a, n), dtype=np.uint8)
        block[src[lo:hi] - a, dst[lo:hi]] = 1
        bits[a:b] = np.packbits(block, axis=1)
    return bits


def build_graph(n: int, edge_list: Iterable[Sequence[int]]) -> Graph:
    """Normalize an arbitrary edge list into a simple graph.

    Self-loops are dropped and duplicate edges (in either orientation)
    collapsed; the counts are recorded on ``graph.report``.  Ids outside
    ``[0, n)`` raise :class:`MalformedInputError`.
    """
    if isinstance(edge_list, np.ndarray):
        raw = edge_list.astype(np.int64).reshape(-1, 2)
    else:
        pairs = [(int(u), int(v)) for u, v in edge_list]
        raw = np.array(pairs, dtype=np.int64).reshape(-1, 2)
    if raw.size and (raw.min() < 0 or raw.max() >= n):
        bad = raw[(raw < 0).any(axis=1) | (raw >= n).any(axis=1)][0]
        raise MalformedInputError(
            f"edge ({bad[0]}, {bad[1]}) references a vertex outside [0, {n})"
        )
    loops = raw[:, 0] == raw[:, 1]
    loops_dropped = int(loops.sum())
    kept = raw[~loops]
    u = np.minimum(kept[:, 0], kept[:, 1])
    v = np.maximum(kept[:, 0], kept[:, 1])
    if kept.shape[0]:
        keys = np.unique(u * n + v)
        edges = np.column_stack([keys // n, keys % n])
    else:
        edges = np.zeros((0, 2), dtype=np.int64)
    duplicates = int(kept.shape[0] - edges.shape[0])
    report = EdgeListReport(loops_dropped=loops_dropped, duplicates_dropped=duplicates)
    return Graph(n, edges, report)


class ModifiedAdjacency:
    """Adjacency matrix with 2s along the diagonal; entries in {0, 1, 2}."""

    __slots__ = ("graph",)

    def __init__(self, graph: Graph):
        self.graph = graph

    @property
    def n(self) -> int:
        return self.graph.n

    def entry(self, u: int, v: int) -> int:
        if u == v:
            self.graph._check_vertex(u)
            return 2
        return 1 if self.graph.has_edge(u, v) else 0

    def row(self, u: int) -> np.ndarray:
        return self.graph.modified_adjacency_row(u)

    def dense(self) -> np.ndarray:
        out = self.graph.to_adjacency()
        np.fill_diagonal(out, 2)
        return out


def modified_adjacency(g: Graph) -> ModifiedAdjacency:
    return ModifiedAdjacency(g)


class DistanceMatrix:
    """All-pairs hop counts.

    The raw integer array uses -1 where no path exists; the accessor
    translates that to the :data:`UNREACHABLE` sentinel so the value can
    never leak into arithmetic as a number.
    """

    __slots__ = ("raw",)

    def __init__(self, raw: np.ndarray):
        raw = np.asarray(raw)
        raw.setflags(write=False)
        self.raw = raw

    @property
    def n(self) -> int:
        return int(self.raw.shape[0])

    def get(self, u: int, v: int) -> Distance:
        d = int(self.raw[u, v])
        return UNREACHABLE if d < 0 else d

    def row(self, u: int) -> np.ndarray:
        return self.raw[u]

    def __repr__(self) -> str:
        return f"DistanceMatrix(n={self.n})"


def all_pairs_distances(g: Graph) -> DistanceMatrix:
    """Exact hop counts from every vertex via level-synchronous BFS.

    Frontiers are expanded by OR-ing packed adjacency rows, so each source
    costs O(n^2 / 8) byte operations; -1 marks unreachable pairs.
    """
    n = g.n
    dtype = np.int16 if n < np.iinfo(np.int16).max else np.int32
    dist = np.full((n, n), -1, dtype=dtype)
    if n == 0:
        return DistanceMatrix(dist)
    rowbytes = g.bits.shape[1]
    for s in range(n):
        dist[s, s] = 0
        visited = np.zeros(rowbytes, dtype=np.uint8)
        visited[s >> 3] = 128 >> (s & 7)
        frontier = np.array([s])
        level = 0
        while frontier.size:
            level += 1
            nxt = np.bitwise_or.reduce(g.bits[frontier], axis=0)
            nxt &= ~visited
            if not nxt.any():
                break
            idx = np.flatnonzero(np.unpackbits(nxt, count=n))
            dist[s, idx] = level
            visited |= nxt
            frontier = idx
    return DistanceMatrix(dist)


def diameter(d: DistanceMatrix) -> Distance:
    """Largest hop count, or UNREACHABLE if any pair is disconnected."""
    n = d.n
    if n <= 1:
        return 0
    if (d.raw < 0).any():
        return UNREACHABLE
    return int(d.raw.max())


def count_pairs_distance_gt2(g: Graph) -> int:
    """Number of unordered pairs at hop distance > 2 (disconnected pairs count).

    Uses the characterization d(u,v) > 2 iff u != v, u and v are
    non-adjacent and share no common neighbor; costs one dense n x n
    product, so keep n at desk scale (~5000).
    """
    n = g.n
    if n <= 1:
        return 0
    adj = g.to_adjacency().astype(np.float32)
    common = adj @ adj
    far = (adj == 0) & (common == 0)
    np.fill_diagonal(far, False)
    return int(far.sum()) // 2


def read_edge_list(source, n: int | None = None) -> Graph:
    """Parse the plain text edge-list format.

    One ``u v`` pair per line, whitespace separated, 0-based decimal ids;
    lines starting with ``#`` and blank lines are ignored.  When ``n`` is
    omitted it is inferred as ``max id + 1``.
    """
    if hasattr(source, "read"):
        lines = source.read().splitlines()
    else:
        with open(source, "r", encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    pairs = []
    for lineno, line in enumerate(lines, start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        tokens = stripped.split()
        if len(tokens) != 2:
            raise MalformedInputError(f"line {lineno}: expected 'u v', got {line!r}")
        try:
            pairs.append((int(tokens[0]), int(tokens[1])))
        except ValueError as exc:
            raise MalformedInputError(f"line {lineno}: non-integer id in {line!r}") from exc
    if pairs:
        arr = np.array(pairs, dtype=np.int64)
        if arr.min() < 0:
            raise MalformedInputError("negative vertex id in edge list")
        inferred = int(arr.max()) + 1
    else:
        arr = np.zeros((0, 2), dtype=np.int64)
        inferred = 0
    if n is None:
        n = inferred
    return build_graph(n, arr)


def write_edge_list(target, g: Graph) -> None:
    """Write the edge-list format accepted by :func:`read_edge_list`."""
    own = not hasattr(target, "write")
    fh = open(target, "w", encoding="utf-8") if own else target
    try:
        buf = io.StringIO()
        for u, v in g.edges:
            buf.write(f"{u} {v}\n")
        fh.write(buf.getvalue())
    finally:
        if own:
            fh.close()
