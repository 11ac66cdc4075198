"""Minimal allocation search: smallest coordinate sum with collision bound <= alpha.

The solver walks the allocation lattice level by level.  Greedy passes
produce a feasible starting point; the descent then scans each lower level
in reverse-lex order, which is sound because the bound is decreasing with
respect to the coordinatewise order: once a point is feasible, everything
before its downward projection in the next level is provably infeasible.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import InfeasibleError, MalformedInputError, OracleExhaustedError
from .lattice import Allocation, as_allocation, downward, level_points, level_size, next_point
from .sbm import CollisionBound, SbmParams


@dataclass(frozen=True)
class MineSolution:
    """Result of an allocation search."""

    allocation: Allocation
    f_value: float
    evaluations: int
    feasible: bool
    alpha: float

    @property
    def total(self) -> int:
        return sum(self.allocation)

    def to_dict(self) -> dict:
        return {
            "allocation": list(self.allocation),
            "total": self.total,
            "f_value": self.f_value,
            "alpha": self.alpha,
            "evaluations": self.evaluations,
            "feasible": self.feasible,
        }


class _CountingBound:
    """Memoized bound evaluator; ``evaluations`` counts distinct allocations."""

    def __init__(self, bound: CollisionBound):
        self._bound = bound
        self._cache: dict = {}
        self.evaluations = 0

    def __call__(self, allocation: Sequence[int]) -> float:
        key = tuple(int(v) for v in allocation)
        hit = self._cache.get(key)
        if hit is None:
            hit = self._bound(key)
            self._cache[key] = hit
            self.evaluations += 1
        return hit


def _check_feasible(bound, params: SbmParams, alpha: float) -> None:
    cap = params.community_sizes
    if not bound(cap) <= alpha:
        raise InfeasibleError(
            f"no allocation can reach the threshold: even selecting every vertex "
            f"leaves the bound at {bound(cap):.6g} > alpha = {alpha:.6g}"
        )


def forward_greedy(
    params: SbmParams, alpha: float, *, _bound: Optional[_CountingBound] = None
) -> Allocation:
    """Grow an allocation one unit at a time until the bound drops to alpha.

    Each step adds the unit vector giving the strictly smallest bound value
    (ties keep the lowest community index).  Coordinates are capped at the
    community sizes, which also makes infeasibility detectable up front.
    """
    bound = _bound if _bound is not None else _CountingBound(CollisionBound(params))
    _check_feasible(bound, params, alpha)
    sizes = params.community_sizes
    c = params.c
    x = (0,) * c
    while bound(x) > alpha:
        best = None
        best_val = bound(x)
        for i in range(c):
            if x[i] >= sizes[i]:
                continue
            cand = x[:i] + (x[i] + 1,) + x[i + 1 :]
            val = bound(cand)
            if val < best_val:
                best = cand
                best_val = val
        if best is None:
            # flat plateau (possible only through underflow); force progress
            i = next(i for i in range(c) if x[i] < sizes[i])
            best = x[:i] + (x[i] + 1,) + x[i + 1 :]
        x = best
    return x


def backward_greedy(
    params: SbmParams,
    alpha: float,
    x: Sequence[int],
    *,
    _bound: Optional[_CountingBound] = None,
) -> Allocation:
    """Shrink a feasible allocation while feasibility survives.

    Each pass removes the unit whose removal keeps the bound within alpha
    while leaving it as large as possible; stops when every decrement would
    overshoot alpha or hit a zero coordinate.
    """
    bound = _bound if _bound is not None else _CountingBound(CollisionBound(params))
    x = as_allocation(x)
    if len(x) != params.c:
        raise MalformedInputError(f"allocation must have {params.c} coordinates")
    if not bound(x) <= alpha:
        raise InfeasibleError("backward search requires a feasible starting point")
    moved = True
    while moved:
        moved = False
        y = x
        for i in range(params.c):
            if x[i] == 0:
                continue
            cand = x[:i] + (x[i] - 1,) + x[i + 1 :]
            val = bound(cand)
            if bound(y) < val <= alpha:
                y = cand
                moved = True
        x = y
    return x


def mine(params: SbmParams, alpha: float) -> MineSolution:
    """Globally minimal allocation subject to the collision bound.

    Seeds with the forward and backward greedy passes, then repeatedly
    tries to go one level lower: starting from (h-1, 0, ..., 0), each
    infeasible point is replaced by its reverse-lex successor, and each
    feasible point restarts the scan at its downward projection one level
    below.  The walk ends when a level has no successor left, at which
    point the last feasible point is optimal.
    """
    alpha = float(alpha)
    bound = _CountingBound(CollisionBound(params))
    c = params.c
    zeros = (0,) * c
    if bound(zeros) <= alpha:
        return MineSolution(zeros, bound(zeros), bound.evaluations, True, alpha)
    _check_feasible(bound, params, alpha)
    x = forward_greedy(params, alpha, _bound=bound)
    x = backward_greedy(params, alpha, x, _bound=bound)
    h = sum(x)
    y: Optional[Allocation] = (h - 1,) + (0,) * (c - 1)
    while y is not None:
        if bound(y) <= alpha:
            x = y
            y = downward(y) if sum(y) > 0 else None
        else:
            y = next_point(y)
    return MineSolution(x, bound(x), bound.evaluations, True, alpha)


def exhaustive_min(
    params: SbmParams,
    alpha: float,
    level_cap: int,
    *,
    max_points: int = 10_000_000,
) -> MineSolution:
    """Brute-force oracle: enumerate whole levels until a feasible point shows.

    Levels are scanned in reverse-lex order, so the returned allocation is
    the reverse-lex-first feasible point of the minimal feasible level.
    Refuses upfront when the total enumeration would exceed ``max_points``.
    """
    alpha = float(alpha)
    c = params.c
    total_points = sum(level_size(c, h) for h in range(level_cap + 1))
    if total_points > max_points:
        raise MalformedInputError(
            f"enumeration of {total_points} points exceeds the {max_points} guard"
        )
    bound = CollisionBound(params)
    evaluations = 0
    for h in range(level_cap + 1):
        pts = np.array(list(level_points(c, h)), dtype=np.int64)
        vals = bound.batch(pts)
        evaluations += pts.shape[0]
        feasible = np.flatnonzero(vals <= alpha)
        if feasible.size:
            idx = int(feasible[0])
            return MineSolution(
                tuple(int(v) for v in pts[idx]),
                float(vals[idx]),
                evaluations,
                True,
                alpha,
            )
    raise OracleExhaustedError(
        f"no feasible allocation up to level {level_cap} (alpha = {alpha:.6g})"
    )
