"""Shared graph builders and independent oracles used across the test suite."""

from __future__ import annotations

import numpy as np
import pytest

from resolvekit import build_graph


def path_graph(n):
    return build_graph(n, [(i, i + 1) for i in range(n - 1)])


def cycle_graph(n):
    edges = [(i, (i + 1) % n) for i in range(n)]
    return build_graph(n, edges)


def complete_graph(n):
    return build_graph(n, [(i, j) for i in range(n) for j in range(i + 1, n)])


def empty_graph(n):
    return build_graph(n, [])


def random_graph(rng, n, p):
    mask = rng.random((n, n)) < p
    iu = np.triu_indices(n, k=1)
    keep = mask[iu]
    edges = np.column_stack([iu[0][keep], iu[1][keep]])
    return build_graph(n, edges)


def power_distance_oracle(g):
    """Distances via boolean adjacency powers: d(u,v) = min k with (A^k)[u,v] > 0.

    Independent of the library's BFS; -1 where unreachable.
    """
    n = g.n
    A = g.to_adjacency().astype(bool)
    dist = np.full((n, n), -1, dtype=np.int64)
    np.fill_diagonal(dist, 0)
    reach = np.eye(n, dtype=bool)
    power = np.eye(n, dtype=bool)
    for k in range(1, n):
        power = power @ A
        newly = power & ~reach
        dist[newly] = k
        reach |= newly
        if reach.all():
            break
    return dist


def pair_masks_oracle(M):
    """Per unordered row pair, a bitmask of the columns where the rows differ."""
    n = M.shape[0]
    weights = (1 << np.arange(n, dtype=np.int64))[None, None, :]
    diff = M[:, None, :] != M[None, :, :]
    masks = (diff * weights).sum(axis=2)
    iu = np.triu_indices(n, k=1)
    return masks[iu]


def resolving_subsets_oracle(M):
    """Boolean vector over all 2^n column subsets: does the subset resolve M?

    Subset s is encoded by its bitmask; entry s is True iff every pair of
    rows differs inside s.
    """
    n = M.shape[0]
    masks = pair_masks_oracle(M)
    subsets = np.arange(1 << n, dtype=np.int64)
    if masks.size == 0:
        return np.ones(1 << n, dtype=bool)
    return ((masks[None, :] & subsets[:, None]) != 0).all(axis=1)


@pytest.fixture
def rng():
    return np.random.default_rng(20260810)
