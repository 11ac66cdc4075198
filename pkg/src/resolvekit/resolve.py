"""Resolving-set verification and construction.

A set of vertices resolves a matrix when restricting the rows to those
columns leaves every row unique.  This module verifies candidate sets,
computes exact metric dimension by subset enumeration on small instances,
and provides four constructive strategies: the entropy-greedy heuristic,
two community-aware selectors driven by the collision bound, and uniform
random growth.  It also builds the landmark embedding that maps each
vertex to its distance vector.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from itertools import combinations
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import (
    MalformedInputError,
    NoResolvingSetError,
    SizeCapError,
    UnreachableDistanceError,
)
from .graph import DistanceMatrix, Graph, all_pairs_distances
from .sbm import CollisionBound, SbmParams

BRUTE_FORCE_CAP = 16


class TargetKind(Enum):
    ADJACENCY = "A"
    MODIFIED_ADJACENCY = "A*"
    DISTANCE = "D"


class ResolvingTarget:
    """One of the three matrices whose rows a vertex set may resolve.

    Columns are materialized on demand from the graph's packed adjacency
    where possible, so verifying a small set against a large graph never
    builds the full matrix.
    """

    __slots__ = ("kind", "_graph", "_matrix")

    def __init__(
        self,
        kind: TargetKind,
        graph: Optional[Graph] = None,
        matrix: Optional[np.ndarray] = None,
    ):
        if (graph is None) == (matrix is None):
            raise MalformedInputError("provide exactly one of graph or matrix")
        self.kind = kind
        self._graph = graph
        self._matrix = matrix

    @property
    def n(self) -> int:
        if self._graph is not None:
            return self._graph.n
        return int(self._matrix.shape[0])

    def column(self, v: int) -> np.ndarray:
        if self._matrix is not None:
            return np.asarray(self._matrix[:, v])
        if self.kind is TargetKind.ADJACENCY:
            return self._graph.adjacency_row(v)
        return self._graph.modified_adjacency_row(v)

    def dense(self) -> np.ndarray:
        if self._matrix is not None:
            return np.asarray(self._matrix)
        out = self._graph.to_adjacency()
        if self.kind is TargetKind.MODIFIED_ADJACENCY:
            out = out.copy()
            np.fill_diagonal(out, 2)
        return out


def adjacency_target(g: Graph) -> ResolvingTarget:
    return ResolvingTarget(TargetKind.ADJACENCY, graph=g)


def modified_adjacency_target(g: Graph) -> ResolvingTarget:
    return ResolvingTarget(TargetKind.MODIFIED_ADJACENCY, graph=g)


def distance_target(source) -> ResolvingTarget:
    """Distance-matrix target from a Graph or a precomputed DistanceMatrix."""
    if isinstance(source, Graph):
        source = all_pairs_distances(source)
    if not isinstance(source, DistanceMatrix):
        raise MalformedInputError("expected a Graph or DistanceMatrix")
    return ResolvingTarget(TargetKind.DISTANCE, matrix=source.raw)


def _normalize_nodes(n: int, nodes: Iterable[int]) -> tuple:
    out = sorted({int(v) for v in nodes})
    for v in out:
        if not 0 <= v < n:
            raise MalformedInputError(f"vertex id {v} out of range [0, {n})")
    return tuple(out)


def is_resolving(target: ResolvingTarget, nodes: Iterable[int]) -> bool:
    """True iff rows restricted to the given columns are pairwise distinct.

    Refines a row partition one column at a time (signature grouping), so
    the cost is O(n log n) per column with early exit once all groups are
    singletons.
    """
    n = target.n
    ids = _normalize_nodes(n, nodes)
    if n <= 1:
        return True
    if not ids:
        return False
    labels = np.zeros(n, dtype=np.int64)
    for v in ids:
        col = target.column(v).astype(np.int64)
        lo = col.min()
        if lo:
            col = col - lo
        key = labels * (col.max() + 1) + col
        _, labels = np.unique(key, return_inverse=True)
        groups = int(labels.max()) + 1
        if groups == n:
            return True
    return False


@dataclass(frozen=True)
class BruteForceResult:
    size: int
    nodes: tuple


def _pair_difference_masks(M: np.ndarray) -> np.ndarray:
    """Bitmask per unordered row pair marking the columns where they differ."""
    n = M.shape[0]
    weights = (1 << np.arange(n, dtype=np.int64))[None, None, :]
    diff = M[:, None, :] != M[None, :, :]
    masks = (diff * weights).sum(axis=2)
    iu = np.triu_indices(n, k=1)
    return masks[iu]


def brute_force_beta(target: ResolvingTarget, cap: int = BRUTE_FORCE_CAP) -> BruteForceResult:
    """Exact metric dimension by enumerating subsets in increasing size.

    Returns the lexicographically first minimum witness.  Refuses above the
    size cap (subset enumeration is exponential), and raises when the full
    column set itself does not resolve the matrix.
    """
    n = target.n
    if n > cap:
        raise SizeCapError(f"brute force refused: n = {n} exceeds cap {cap}")
    if n <= 1:
        return BruteForceResult(0, ())
    masks = _pair_difference_masks(target.dense())
    if (masks == 0).any():
        raise NoResolvingSetError("two rows are identical over the full column set")
    for size in range(1, n + 1):
        for combo in combinations(range(n), size):
            sub = 0
            for v in combo:
                sub |= 1 << v
            if (masks & sub).all():
                return BruteForceResult(size, combo)
    raise NoResolvingSetError("unreachable: the full column set resolves the matrix")


def ich(target: ResolvingTarget) -> tuple:
    """Entropy-greedy resolving set.

    Repeatedly adds the column whose inclusion maximizes the Shannon
    entropy of the induced row partition (ties broken by lowest vertex id)
    until the partition is discrete.  The returned set is verified before
    being handed back.
    """
    n = target.n
    if n <= 1:
        return ()
    M = target.dense().astype(np.int64)
    lo = M.min()
    if lo:
        M = M - lo
    K = int(M.max()) + 1
    if np.unique(M, axis=0).shape[0] < n:
        raise NoResolvingSetError("duplicate rows: no column subset can resolve this matrix")
    labels = np.zeros(n, dtype=np.int64)
    chosen: list = []
    taken = np.zeros(n, dtype=bool)
    log_n = np.log(n)
    while True:
        counts = np.bincount(labels)
        if (counts <= 1).all():
            break
        active = counts[labels] > 1
        act_rows = np.flatnonzero(active)
        singles = n - act_rows.size
        base_h = singles / n * log_n
        act_labels = np.unique(labels[act_rows], return_inverse=True)[1]
        sub = M[act_rows]
        best_v = -1
        best_h = -1.0
        for v in range(n):
            if taken[v]:
                continue
            key = act_labels * K + sub[:, v]
            cnt = np.bincount(key, minlength=0)
            cnt = cnt[cnt > 0]
            h = base_h + float((cnt / n * (log_n - np.log(cnt))).sum())
            if h > best_h:
                best_h = h
                best_v = v
        chosen.append(best_v)
        taken[best_v] = True
        key = labels * K + M[:, best_v]
        _, labels = np.unique(key, return_inverse=True)
    result = tuple(chosen)
    assert is_resolving(target, result)
    return result


class _PartitionRefiner:
    """Incremental row-signature refinement over modified-adjacency columns."""

    def __init__(self, g: Graph):
        self.g = g
        self.labels = np.zeros(g.n, dtype=np.int64)
        self.groups = 1 if g.n else 0

    @property
    def resolved(self) -> bool:
        return self.groups >= self.g.n

    def add(self, v: int) -> None:
        col = self.g.modified_adjacency_row(v).astype(np.int64)
        key = self.labels * 3 + col
        _, self.labels = np.unique(key, return_inverse=True)
        self.groups = int(self.labels.max()) + 1


def _check_membership(g: Graph, params: SbmParams) -> None:
    if g.n != params.n:
        raise MalformedInputError(
            f"graph has {g.n} vertices but params describe {params.n}"
        )


def _community_schedule_step(bound: CollisionBound, counts: np.ndarray) -> list:
    """Community indices ranked by the bound after one more pick, ties by index."""
    c = counts.shape[0]
    scored = []
    for i in range(c):
        cand = counts.copy()
        cand[i] += 1
        scored.append((bound(cand), i))
    scored.sort()
    return [i for _, i in scored]


def greedy_baseline(g: Graph, params: SbmParams, seed: int) -> tuple:
    """Bound-guided random growth.

    Each step asks which community would lower the collision bound the
    most, draws an unused vertex uniformly from it (falling back to the
    next-ranked community when one runs dry), and stops as soon as the set
    resolves the modified adjacency matrix.
    """
    _check_membership(g, params)
    rng = np.random.Generator(np.random.Philox(key=int(seed)))
    offs = params.offsets()
    sizes = params.community_sizes
    order = [offs[i] + rng.permutation(sizes[i]) for i in range(params.c)]
    used = [0] * params.c
    bound = CollisionBound(params)
    counts = np.zeros(params.c, dtype=np.int64)
    ref = _PartitionRefiner(g)
    chosen: list = []
    if ref.resolved:
        return ()
    while True:
        picked = None
        for i in _community_schedule_step(bound, counts):
            if used[i] < sizes[i]:
                picked = i
                break
        if picked is None:
            raise NoResolvingSetError("all communities exhausted without resolving")
        v = int(order[picked][used[picked]])
        used[picked] += 1
        counts[picked] += 1
        chosen.append(v)
        ref.add(v)
        if ref.resolved:
            return tuple(chosen)


def _node_discrimination_scores(g: Graph, params: SbmParams) -> np.ndarray:
    """Collision-bound score per vertex from its empirical adjacency frequencies.

    Vertex w gets the bound value computed as if w alone were the selected
    column, with the block probabilities toward each community replaced by
    w's observed neighbor fractions; lower means w separates more pairs.
    """
    labels = params.labels()
    c = params.c
    n = g.n
    sizes = np.array(params.community_sizes, dtype=np.float64)
    cnt = np.zeros(n * c, dtype=np.int64)
    edges = g.edges
    if edges.shape[0]:
        cnt += np.bincount(edges[:, 0] * c + labels[edges[:, 1]], minlength=n * c)
        cnt += np.bincount(edges[:, 1] * c + labels[edges[:, 0]], minlength=n * c)
    q = cnt.reshape(n, c) / sizes[None, :]
    scores = np.zeros(n, dtype=np.float64)
    for i in range(c):
        for j in range(i, c):
            s = params.pair_count(i, j)
            qa = q[:, i]
            qb = q[:, j]
            scores += s * (qa * qb + (1.0 - qa) * (1.0 - qb))
    return scores


def preorder_baseline(g: Graph, params: SbmParams) -> tuple:
    """Deterministic variant of the greedy selector.

    Vertices inside each community are pre-sorted by their discrimination
    score (ascending, ties by id); the community consumed at each step
    follows the same bound-guided schedule as :func:`greedy_baseline`.
    """
    _check_membership(g, params)
    offs = params.offsets()
    sizes = params.community_sizes
    scores = _node_discrimination_scores(g, params)
    order = []
    for i in range(params.c):
        ids = np.arange(offs[i], offs[i] + sizes[i])
        ranked = ids[np.lexsort((ids, scores[ids]))]
        order.append(ranked)
    used = [0] * params.c
    bound = CollisionBound(params)
    counts = np.zeros(params.c, dtype=np.int64)
    ref = _PartitionRefiner(g)
    chosen: list = []
    if ref.resolved:
        return ()
    while True:
        picked = None
        for i in _community_schedule_step(bound, counts):
            if used[i] < sizes[i]:
                picked = i
                break
        if picked is None:
            raise NoResolvingSetError("all communities exhausted without resolving")
        v = int(order[picked][used[picked]])
        used[picked] += 1
        counts[picked] += 1
        chosen.append(v)
        ref.add(v)
        if ref.resolved:
            return tuple(chosen)


def random_baseline(g: Graph, seed: int) -> tuple:
    """Uniform draws without replacement until the set resolves."""
    rng = np.random.Generator(np.random.Philox(key=int(seed)))
    ref = _PartitionRefiner(g)
    if ref.resolved:
        return ()
    chosen: list = []
    for v in rng.permutation(g.n):
        chosen.append(int(v))
        ref.add(int(v))
        if ref.resolved:
            return tuple(chosen)
    raise NoResolvingSetError("exhausted all vertices without resolving")


@dataclass(frozen=True)
class Embedding:
    """Per-vertex distance vectors toward a fixed landmark set."""

    matrix: np.ndarray  # (n, len(landmarks)) float64
    landmarks: tuple


def embed(d: DistanceMatrix, nodes: Iterable[int], *, unreachable: float | None = None) -> Embedding:
    """Map each vertex to its distances toward the given landmarks.

    Landmark columns appear in ascending id order.  UNREACHABLE entries
    raise unless a substitute value is supplied.
    """
    ids = _normalize_nodes(d.n, nodes)
    cols = d.raw[:, list(ids)].astype(np.float64) if ids else np.zeros((d.n, 0))
    if ids and (cols < 0).any():
        if unreachable is None:
            raise UnreachableDistanceError(
                "embedding touches disconnected pairs; pass unreachable=<float> to substitute"
            )
        cols = cols.copy()
        cols[cols < 0] = float(unreachable)
    cols.setflags(write=False)
    return Embedding(matrix=cols, landmarks=ids)
