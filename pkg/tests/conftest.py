"""Shared independent oracles for the test suite.

These deliberately use plain Python loops and their own enumeration logic
so they stay independent of the library code paths they check.
"""

import itertools
import math

import numpy as np
import pytest


def brute_force_star(points: np.ndarray) -> float:
    """Star discrepancy by explicit enumeration of the critical grid.

    Independent of the library: pure loops, no shared helpers.
    """
    n, d = points.shape
    grids = [sorted(set(points[:, j]) | {1.0}) for j in range(d)]
    best = 0.0
    for y in itertools.product(*grids):
        closed = sum(
            1 for p in points if all(p[j] <= y[j] for j in range(d))
        )
        opened = sum(
            1 for p in points if all(p[j] < y[j] for j in range(d))
        )
        vol = math.prod(y)
        best = max(best, closed / n - vol, vol - opened / n)
    return best


def dense_scan_star(points: np.ndarray, resolution: int) -> float:
    """Approximate star discrepancy on a uniform anchor lattice."""
    n, d = points.shape
    axes = [np.arange(1, resolution + 1) / resolution] * d
    best = 0.0
    for y in itertools.product(*axes):
        closed = sum(
            1 for p in points if all(p[j] <= y[j] for j in range(d))
        )
        vol = math.prod(y)
        best = max(best, abs(closed / n - vol))
    return best


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
