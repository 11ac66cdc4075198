"""Allocation lattice: levels of N_0^c, reverse-lexicographic order, successors.

An allocation is a tuple of c non-negative integers; its level is the
coordinate sum.  Within one level, allocations are totally ordered by the
reverse-lexicographic order: x precedes y iff x == y or x has the larger
value at the first index where they differ.
"""

from __future__ import annotations

from math import comb
from typing import Iterator, Optional, Sequence, Tuple

from .errors import MalformedInputError

Allocation = Tuple[int, ...]


def as_allocation(values: Sequence[int]) -> Allocation:
    out = tuple(int(v) for v in values)
    if not out:
        raise MalformedInputError("allocation must have at least one coordinate")
    if any(v < 0 for v in out):
        raise MalformedInputError(f"allocation entries must be >= 0, got {out}")
    return out


def level(k: Sequence[int]) -> int:
    return sum(int(v) for v in k)


def downward(k: Sequence[int]) -> Allocation:
    """Subtract 1 from the leftmost strictly positive coordinate."""
    k = as_allocation(k)
    for i, v in enumerate(k):
        if v > 0:
            return k[:i] + (v - 1,) + k[i + 1 :]
    raise MalformedInputError("downward is undefined on the all-zero allocation")


def upward(k: Sequence[int]) -> Allocation:
    """Add 1 to the first coordinate."""
    k = as_allocation(k)
    return (k[0] + 1,) + k[1:]


def revlex_key(k: Sequence[int]) -> Tuple[int, ...]:
    """Sort key under which ascending order equals the reverse-lex order."""
    return tuple(-int(v) for v in k)


def precedes(a: Sequence[int], b: Sequence[int]) -> bool:
    """True iff a comes no later than b in reverse-lexicographic order."""
    return revlex_key(a) <= revlex_key(b)


def next_point(k: Sequence[int]) -> Optional[Allocation]:
    """Immediate reverse-lex successor of k within its own level.

    Returns None for the level's last element (0, ..., 0, h); with a single
    coordinate every allocation is its level's only element.
    """
    k = as_allocation(k)
    c = len(k)
    if all(v == 0 for v in k[: c - 1]):
        return None
    i = c - 2
    while k[i] == 0:
        i -= 1
    out = list(k)
    out[i] -= 1
    if k[c - 1] == 0:
        out[i + 1] = k[i + 1] + 1
    else:
        out[i + 1] = k[c - 1] + 1
    for j in range(i + 2, c):
        out[j] = 0
    return tuple(out)


def level_size(c: int, h: int) -> int:
    """Number of allocations of c coordinates summing to h."""
    return comb(h + c - 1, c - 1)


def level_points(c: int, h: int) -> Iterator[Allocation]:
    """All allocations of one level, yielded in reverse-lex order."""
    if c < 1:
        raise MalformedInputError("c must be >= 1")
    if c == 1:
        yield (h,)
        return
    for first in range(h, -1, -1):
        for rest in level_points(c - 1, h - first):
            yield (first,) + rest
