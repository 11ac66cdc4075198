"""Stochastic block model parameters, sampling, estimation and pair statistics.

Everything here is a closed-form function of the community sizes and the
block probability matrix, plus the seeded sampler that turns those
parameters into concrete graphs with community-contiguous vertex labels.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DegenerateCommunityError, MalformedInputError
from .graph import Graph

# Rows drawn per RNG block in the sampler.  Fixed so that a given seed
# always consumes the Philox stream identically.
_SAMPLE_CHUNK = 1024


@dataclass(frozen=True, eq=False)
class SbmParams:
    """Community sizes ``(n_1..n_c)`` and symmetric block probability matrix."""

    community_sizes: tuple
    P: np.ndarray

    def __post_init__(self):
        sizes = tuple(int(s) for s in self.community_sizes)
        if len(sizes) < 1:
            raise MalformedInputError("at least one community is required")
        if any(s < 1 for s in sizes):
            raise MalformedInputError("community sizes must be >= 1")
        P = np.array(self.P, dtype=np.float64)
        c = len(sizes)
        if P.shape != (c, c):
            raise MalformedInputError(
                f"P must be {c}x{c} to match {c} communities, got {P.shape}"
            )
        for i in range(c):
            for j in range(c):
                if not 0.0 <= P[i, j] <= 1.0:
                    raise MalformedInputError(
                        f"P[{i}][{j}] = {P[i, j]} is outside [0, 1]"
                    )
                if P[i, j] != P[j, i]:
                    raise MalformedInputError(
                        f"P is not symmetric: P[{i}][{j}] = {P[i, j]} "
                        f"!= P[{j}][{i}] = {P[j, i]}"
                    )
        P.setflags(write=False)
        object.__setattr__(self, "community_sizes", sizes)
        object.__setattr__(self, "P", P)

    def __eq__(self, other) -> bool:
        if not isinstance(other, SbmParams):
            return NotImplemented
        return self.community_sizes == other.community_sizes and np.array_equal(
            self.P, other.P
        )

    @property
    def c(self) -> int:
        return len(self.community_sizes)

    @property
    def n(self) -> int:
        return sum(self.community_sizes)

    def offsets(self) -> tuple:
        """Start id of each community under contiguous labeling."""
        out = [0]
        for s in self.community_sizes[:-1]:
            out.append(out[-1] + s)
        return tuple(out)

    def labels(self) -> np.ndarray:
        """Community label per vertex id (contiguous blocks)."""
        return np.repeat(np.arange(self.c), self.community_sizes)

    def pair_count(self, i: int, j: int) -> int:
        """Number of unordered vertex pairs spanning communities i and j."""
        if i == j:
            s = self.community_sizes[i]
            return s * (s - 1) // 2
        return self.community_sizes[i] * self.community_sizes[j]

    def pair_counts(self) -> np.ndarray:
        c = self.c
        out = np.zeros((c, c), dtype=np.float64)
        for i in range(c):
            for j in range(c):
                out[i, j] = self.pair_count(i, j)
        return out

    def to_dict(self) -> dict:
        return {
            "community_sizes": list(self.community_sizes),
            "P": [[float(x) for x in row] for row in self.P],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SbmParams":
        try:
            sizes = data["community_sizes"]
            P = data["P"]
        except (KeyError, TypeError) as exc:
            raise MalformedInputError(
                "params must contain 'community_sizes' and 'P'"
            ) from exc
        return cls(tuple(sizes), np.array(P, dtype=np.float64))

    def __repr__(self) -> str:
        return f"SbmParams(sizes={self.community_sizes}, c={self.c})"


@dataclass(frozen=True)
class LabeledGraph:
    """A graph together with a community label per vertex."""

    graph: Graph
    labels: np.ndarray

    def __post_init__(self):
        labels = np.asarray(self.labels, dtype=np.int64)
        if labels.shape != (self.graph.n,):
            raise MalformedInputError(
                f"expected {self.graph.n} labels, got {labels.shape}"
            )
        if labels.size:
            c = int(labels.max()) + 1
            if labels.min() < 0:
                raise MalformedInputError("community labels must be >= 0")
            present = np.bincount(labels, minlength=c)
            if (present == 0).any():
                missing = int(np.flatnonzero(present == 0)[0])
                raise MalformedInputError(f"community {missing} has no members")
        labels.setflags(write=False)
        object.__setattr__(self, "labels", labels)

    @property
    def c(self) -> int:
        return int(self.labels.max()) + 1 if self.labels.size else 0


def sample(params: SbmParams, seed: int) -> Graph:
    """Draw one graph: each pair {u,v} is an edge independently with P[i,j].

    Vertices are labeled contiguously by community (community 0 occupies ids
    0..n_1-1 and so on).  The Philox counter-based generator plus a fixed
    chunk layout make the output bit-identical for a given (params, seed).
    """
    rng = np.random.Generator(np.random.Philox(key=int(seed)))
    offs = params.offsets()
    sizes = params.community_sizes
    chunks = []
    for i in range(params.c):
        for j in range(i, params.c):
            p = float(params.P[i, j])
            if p <= 0.0:
                continue
            ni, nj = sizes[i], sizes[j]
            for r0 in range(0, ni, _SAMPLE_CHUNK):
                r1 = min(r0 + _SAMPLE_CHUNK, ni)
                draws = rng.random((r1 - r0, nj))
                mask = draws < p
                if i == j:
                    # keep only the upper triangle u < v
                    rows = np.arange(r0, r1)[:, None]
                    mask &= np.arange(nj)[None, :] > rows
                ru, rv = np.nonzero(mask)
                if ru.size:
                    chunks.append(
                        np.column_stack([ru + r0 + offs[i], rv + offs[j]]).astype(np.int64)
                    )
    if chunks:
        edges = np.concatenate(chunks, axis=0)
    else:
        edges = np.zeros((0, 2), dtype=np.int64)
    return Graph(params.n, edges)


def estimate_params(lg: LabeledGraph) -> SbmParams:
    """Maximum-likelihood block densities: edges observed / pairs possible.

    A single-member community has no within pairs; its diagonal density is
    defined as 0 and a warning is emitted.
    """
    labels = lg.labels
    if labels.size == 0:
        raise MalformedInputError("cannot estimate parameters of an empty graph")
    c = lg.c
    sizes = np.bincount(labels, minlength=c)
    counts = np.zeros((c, c), dtype=np.float64)
    edges = lg.graph.edges
    if edges.shape[0]:
        eu = labels[edges[:, 0]]
        ev = labels[edges[:, 1]]
        lo = np.minimum(eu, ev)
        hi = np.maximum(eu, ev)
        np.add.at(counts, (lo, hi), 1.0)
    P = np.zeros((c, c), dtype=np.float64)
    for i in range(c):
        for j in range(i, c):
            if i == j:
                pairs = sizes[i] * (sizes[i] - 1) / 2
            else:
                pairs = sizes[i] * sizes[j]
            if pairs == 0:
                warnings.warn(
                    f"community {i} has a single member; P[{i}][{i}] set to 0",
                    stacklevel=2,
                )
                P[i, j] = 0.0
            else:
                P[i, j] = counts[i, j] / pairs
            P[j, i] = P[i, j]
    return SbmParams(tuple(int(s) for s in sizes), P)


def scale_communities(params: SbmParams, n_target: int) -> SbmParams:
    """Rescale community sizes to a new total, keeping proportions.

    Each size becomes ``round(n_target * n_i / n)``; if rounding misses the
    target total, the largest community absorbs the (possibly negative)
    difference so downstream pair counts stay exact.
    """
    if n_target < params.c:
        raise MalformedInputError(
            f"target size {n_target} is below the community count {params.c}"
        )
    n = params.n
    scaled = [math.floor(n_target * s / n + 0.5) for s in params.community_sizes]
    deficit = n_target - sum(scaled)
    if deficit:
        largest = max(range(params.c), key=lambda i: (scaled[i], -i))
        scaled[largest] += deficit
    if any(s <= 0 for s in scaled):
        bad = next(i for i, s in enumerate(scaled) if s <= 0)
        raise DegenerateCommunityError(
            f"community {bad} scales to {scaled[bad]} members at n={n_target}"
        )
    return SbmParams(tuple(scaled), params.P.copy())


def pair_agreement_prob(params: SbmParams, i: int, j: int, l: int) -> float:
    """Probability that a witness in community l sees communities i and j alike.

    Two fixed distinct vertices u in V_i and v in V_j get the same
    adjacency bit from a third vertex w in V_l with probability
    ``P[i,l] P[j,l] + (1 - P[i,l])(1 - P[j,l])``.
    """
    c = params.c
    for name, idx in (("i", i), ("j", j), ("l", l)):
        if not 0 <= idx < c:
            raise MalformedInputError(f"community index {name}={idx} out of range [0, {c})")
    a = float(params.P[i, l])
    b = float(params.P[j, l])
    return a * b + (1.0 - a) * (1.0 - b)


class CollisionBound:
    """Upper bound on the expected number of indistinguishable vertex pairs.

    For an allocation k (k[l] columns drawn from community l), the bound is
    the sum over unordered community pairs (i, j) of
    ``s(i,j) * prod_l r(i,j,l) ** k[l]``, where s counts vertex pairs and r
    is :func:`pair_agreement_prob`.  Terms are evaluated in log space so
    allocations in the hundreds cannot underflow, with an exact zero
    short-circuit when some r = 0 gets a positive exponent.
    """

    def __init__(self, params: SbmParams):
        c = params.c
        pairs = [(i, j) for i in range(c) for j in range(i, c)]
        s = np.array([params.pair_count(i, j) for i, j in pairs], dtype=np.float64)
        R = np.empty((len(pairs), c), dtype=np.float64)
        for t, (i, j) in enumerate(pairs):
            for l in range(c):
                R[t, l] = pair_agreement_prob(params, i, j, l)
        self.params = params
        self.pairs = pairs
        with np.errstate(divide="ignore"):
            self._log_s = np.log(s)
            self._log_r = np.where(R > 0.0, np.log(np.maximum(R, 1e-300)), 0.0)
        self._zero_r = (R == 0.0).astype(np.float64)

    def __call__(self, allocation: Sequence[int]) -> float:
        k = np.asarray(allocation, dtype=np.float64).reshape(1, -1)
        return float(self.batch(k)[0])

    def batch(self, allocations: np.ndarray) -> np.ndarray:
        """Evaluate the bound for each row of an (m, c) allocation array."""
        K = np.asarray(allocations, dtype=np.float64)
        if K.ndim != 2 or K.shape[1] != len(self.params.community_sizes):
            raise MalformedInputError(
                f"allocations must have {self.params.c} columns, got {K.shape}"
            )
        if (K < 0).any():
            raise MalformedInputError("allocation entries must be non-negative")
        log_terms = self._log_s[None, :] + K @ self._log_r.T
        killed = (K > 0).astype(np.float64) @ self._zero_r.T > 0.0
        with np.errstate(over="ignore"):
            terms = np.exp(log_terms)
        terms[killed] = 0.0
        return terms.sum(axis=1)


def expected_collisions(params: SbmParams, allocation: Sequence[int]) -> float:
    """One-shot evaluation of :class:`CollisionBound` at a single allocation."""
    return CollisionBound(params)(allocation)


@dataclass(frozen=True)
class LongPairsResult:
    """Expected counts of vertex pairs at hop distance > 2, per block pair."""

    per_pair: np.ndarray  # (c, c), upper triangle incl. diagonal, zeros below
    total: float
    fraction: float  # total / C(n, 2)


def expected_long_pairs(params: SbmParams) -> LongPairsResult:
    """Expected number of pairs that are non-adjacent with no common neighbor.

    For u in V_i, v in V_j the event has probability
    ``(1 - P[i,j]) * prod_k (1 - P[i,k] P[k,j]) ** (n_k - [i==k] - [j==k])``,
    and expectations add over the s(i,j) pairs of each block.
    """
    c = params.c
    sizes = np.array(params.community_sizes, dtype=np.float64)
    P = params.P
    out = np.zeros((c, c), dtype=np.float64)
    for i in range(c):
        for j in range(i, c):
            s = params.pair_count(i, j)
            if s == 0 or P[i, j] >= 1.0:
                continue
            log_val = math.log(s) + math.log1p(-P[i, j])
            dead = False
            for k in range(c):
                expo = sizes[k] - (i == k) - (j == k)
                q = float(P[i, k] * P[k, j])
                if q >= 1.0:
                    if expo > 0:
                        dead = True
                        break
                    continue
                log_val += expo * math.log1p(-q)
            if not dead:
                out[i, j] = math.exp(log_val)
    total = float(out.sum())
    npairs = params.n * (params.n - 1) // 2
    fraction = total / npairs if npairs else 0.0
    return LongPairsResult(per_pair=out, total=total, fraction=fraction)


@dataclass(frozen=True)
class PairCondition:
    """One block pair's side-by-side inequality evaluation."""

    i: int
    j: int
    in_scope: bool
    lhs: float
    rhs: float
    holds: bool


@dataclass(frozen=True)
class Diam2Report:
    """Per-pair check of the two-hop reachability condition."""

    c_const: float
    pairs: tuple
    all_hold: bool
    note: str

    def to_dict(self) -> dict:
        return {
            "c_const": self.c_const,
            "all_hold": self.all_hold,
            "note": self.note,
            "pairs": [
                {
                    "i": p.i,
                    "j": p.j,
                    "in_scope": p.in_scope,
                    "lhs": p.lhs,
                    "rhs": p.rhs,
                    "holds": p.holds,
                }
                for p in self.pairs
            ],
        }


_K_NOTE = (
    "scope approximated at finite n: a block pair participates when "
    "s(i,j) * (1 - P[i,j]) > 0"
)


def diam2_condition(params: SbmParams, c_const: float) -> Diam2Report:
    """Check, per block pair, whether the common-neighbor mass dominates log n.

    The pair (i, j) passes when ``sum_k n_k P[i,k] P[k,j] >= c_const *
    ln(n_i n_j)``.  Only pairs that can actually hold a long pair (positive
    pair count and P[i,j] < 1) are in scope; with every in-scope pair
    passing, sampled graphs have diameter <= 2 with high probability.
    """
    if not c_const > 1.0:
        raise MalformedInputError(f"c_const must be > 1, got {c_const}")
    sizes = np.array(params.community_sizes, dtype=np.float64)
    P = params.P
    rows = []
    all_hold = True
    for i in range(params.c):
        for j in range(i, params.c):
            in_scope = bool(params.pair_count(i, j) * (1.0 - P[i, j]) > 0.0)
            lhs = float((sizes * P[i] * P[:, j]).sum())
            rhs = float(c_const * math.log(sizes[i] * sizes[j]))
            holds = bool(lhs >= rhs)
            if in_scope and not holds:
                all_hold = False
            rows.append(PairCondition(i, j, in_scope, lhs, rhs, holds))
    return Diam2Report(
        c_const=float(c_const), pairs=tuple(rows), all_hold=all_hold, note=_K_NOTE
    )


@dataclass(frozen=True)
class DiamGt2Report:
    """Outcome of the sparse-regime check for diameter exceeding 2."""

    c_const: float
    holds: bool
    witness: tuple | None
    via: str | None

    def to_dict(self) -> dict:
        return {
            "c_const": self.c_const,
            "holds": self.holds,
            "witness": list(self.witness) if self.witness else None,
            "via": self.via,
        }


def diam_gt2_condition(params: SbmParams, c_const: float) -> DiamGt2Report:
    """Check whether some block pair certifies diameter > 2 with high probability.

    Either a row i with ``sum_k n_k P[i,k]^2 <= c_const * ln(n^2)``, or an
    ordered pair (i, j) with ``sum_k n_k P[i,k] P[k,j] <= c_const * ln(n^2)
    + ln(1 - P[i,j])`` and every entry of column j at most 1/2.
    """
    if not 0.0 < c_const < 1.0:
        raise MalformedInputError(f"c_const must lie in (0, 1), got {c_const}")
    sizes = np.array(params.community_sizes, dtype=np.float64)
    P = params.P
    log_n2 = math.log(float(params.n) ** 2)
    for i in range(params.c):
        lhs = float((sizes * P[i] ** 2).sum())
        if lhs <= c_const * log_n2:
            return DiamGt2Report(float(c_const), True, (i, i), "sparse-row")
    for i in range(params.c):
        for j in range(params.c):
            if P[:, j].max() > 0.5:
                continue
            if P[i, j] >= 1.0:
                continue
            lhs = float((sizes * P[i] * P[:, j]).sum())
            rhs = c_const * log_n2 + math.log1p(-P[i, j])
            if lhs <= rhs:
                return DiamGt2Report(float(c_const), True, (i, j), "sparse-pair")
    return DiamGt2Report(float(c_const), False, None, None)


def _agreement_rate(p: float) -> float:
    if not 0.0 < p < 1.0:
        raise MalformedInputError(f"edge probability must lie strictly in (0, 1), got {p}")
    return p * p + (1.0 - p) * (1.0 - p)


def er_beta_upper(n: int, p: float) -> int:
    """High-probability upper bound on the metric dimension of G(n, p).

    ``ceil(-2 ln n / ln(p^2 + (1-p)^2))``; symmetric in p vs 1-p.
    """
    if n < 1:
        raise MalformedInputError(f"n must be >= 1, got {n}")
    r = _agreement_rate(p)
    return math.ceil(-2.0 * math.log(n) / math.log(r))


def er_any_set_size(n: int, p: float) -> int:
    """Size at which *any* vertex subset resolves G(n, p) w.p. >= 1 - 1/(2n).

    ``ceil(-3 ln n / ln(p^2 + (1-p)^2))``.
    """
    if n < 1:
        raise MalformedInputError(f"n must be >= 1, got {n}")
    r = _agreement_rate(p)
    return math.ceil(-3.0 * math.log(n) / math.log(r))


def load_params(source) -> SbmParams:
    """Load ``{"community_sizes": [...], "P": [[...]]}`` JSON.

    The symmetry check is exact (tolerance 0), matching what
    :class:`SbmParams` enforces.
    """
    if hasattr(source, "read"):
        text = source.read()
    else:
        with open(source, "r", encoding="utf-8") as fh:
            text = fh.read()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedInputError(f"invalid params JSON: {exc}") from exc
    return SbmParams.from_dict(data)


def dump_params(params: SbmParams, target) -> None:
    payload = json.dumps(params.to_dict(), indent=2) + "\n"
    if hasattr(target, "write"):
        target.write(payload)
    else:
        with open(target, "w", encoding="utf-8") as fh:
            fh.write(payload)


def read_labels(source) -> np.ndarray:
    """Community-label file: one integer per line, line index = vertex id."""
    if hasattr(source, "read"):
        lines = source.read().splitlines()
    else:
        with open(source, "r", encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    labels = []
    for lineno, line in enumerate(lines, start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        try:
            labels.append(int(stripped))
        except ValueError as exc:
            raise MalformedInputError(f"line {lineno}: non-integer label {line!r}") from exc
    return np.array(labels, dtype=np.int64)


def write_labels(target, labels: np.ndarray) -> None:
    payload = "".join(f"{int(l)}\n" for l in labels)
    if hasattr(target, "write"):
        target.write(payload)
    else:
        with open(target, "w", encoding="utf-8") as fh:
            fh.write(payload)
