"""Point-set generators: uniform, regular grid, jittered, partition-jittered
and Hammersley.

All seeded generators are pure functions of (parameters, seed).  Jittered
constructions draw the point of cell ``k`` from the substream keyed by
``(seed, k)``, so the output is reproducible regardless of iteration order
or parallel schedule, and a grid partition fed through
:func:`gen_partition_jittered` reproduces :func:`gen_jittered` bit for bit.
"""

from __future__ import annotations

import numpy as np

from .core import PointSet
from .partition import Partition, sample_cell
from .seeding import substream

__all__ = [
    "gen_uniform",
    "gen_grid",
    "gen_jittered",
    "gen_partition_jittered",
    "radical_inverse",
    "gen_hammersley",
    "first_primes",
]

_MAX_POINTS = 2**31 - 1


def _guard_count(m: int, d: int) -> int:
    n = m**d
    if n > _MAX_POINTS:
        raise ValueError(f"m^d = {n} exceeds the addressable point count")
    return n


def gen_uniform(n: int, d: int, seed: int) -> PointSet:
    """``n`` i.i.d. uniform points in ``[0,1]^d``."""
    if n < 1 or d < 1:
        raise ValueError("n and d must be positive")
    pts = np.random.default_rng(seed).random((n, d))
    return PointSet(pts, provenance={"generator": "uniform", "seed": int(seed), "n": n, "dim": d})


def gen_grid(m: int, d: int, mode: str = "center") -> PointSet:
    """Regular grid of ``m^d`` points, one per grid cell.

    ``mode="center"`` places points at cell centers ``(k - 1/2)/m`` (the
    canonical choice with 1-d discrepancy ``1/(2m)``); ``mode="corner"``
    places them at the lower corners ``(k - 1)/m``.
    """
    if m < 1 or d < 1:
        raise ValueError("m and d must be positive")
    if mode not in ("center", "corner"):
        raise ValueError(f"unknown grid mode {mode!r}")
    n = _guard_count(m, d)
    offset = 0.5 if mode == "center" else 0.0
    axes = (np.arange(m) + offset) / m
    pts = np.empty((n, d))
    for k, kv in enumerate(np.ndindex(*(m,) * d)):
        pts[k] = axes[list(kv)]
    return PointSet(
        pts, provenance={"generator": "grid", "seed": None, "m": m, "dim": d, "mode": mode}
    )


def gen_jittered(m: int, d: int, seed: int) -> PointSet:
    """One uniform point in each of the ``m^d`` grid cells of side ``1/m``.

    Point order is lexicographic in the cell index; the point of cell ``k``
    comes from the substream keyed by ``(seed, k)``.
    """
    if m < 1 or d < 1:
        raise ValueError("m and d must be positive")
    n = _guard_count(m, d)
    pts = np.empty((n, d))
    for k, kv in enumerate(np.ndindex(*(m,) * d)):
        kvf = np.asarray(kv, dtype=float)
        lower = kvf / m
        upper = (kvf + 1.0) / m
        pts[k] = lower + substream(seed, k).random(d) * (upper - lower)
    return PointSet(
        pts, provenance={"generator": "jittered", "seed": int(seed), "m": m, "dim": d}
    )


def gen_partition_jittered(part: Partition, seed: int) -> PointSet:
    """One uniform point per cell of an equal-measure partition.

    Cell ``i`` consumes the substream keyed by ``(seed, i)``, so for a grid
    partition the output coincides exactly with :func:`gen_jittered`.
    """
    pts = np.empty((part.n_cells, part.dim))
    for i, cell in enumerate(part.cells):
        pts[i] = sample_cell(cell, substream(seed, i))
    return PointSet(
        pts,
        provenance={
            "generator": "partition_jittered",
            "seed": int(seed),
            "n": part.n_cells,
            "dim": part.dim,
        },
    )


def radical_inverse(k: int, base: int) -> float:
    """Base-``b`` digit reversal of ``k`` placed after the radix point."""
    if base < 2:
        raise ValueError("base must be >= 2")
    if k < 0:
        raise ValueError("k must be nonnegative")
    inv = 0.0
    scale = 1.0 / base
    while k > 0:
        inv += (k % base) * scale
        k //= base
        scale /= base
    return inv


def first_primes(count: int) -> list:
    """The first ``count`` prime numbers."""
    primes: list = []
    candidate = 2
    while len(primes) < count:
        if all(candidate % p for p in primes if p * p <= candidate):
            primes.append(candidate)
        candidate += 1
    return primes


def gen_hammersley(n: int, d: int) -> PointSet:
    """Hammersley set: point ``k`` is ``(k/n, phi_2(k), phi_3(k), ...)``.

    The trailing coordinates are radical inverses in the first ``d-1``
    primes.  Deterministic; no seed.
    """
    if n < 1 or d < 1:
        raise ValueError("n and d must be positive")
    primes = first_primes(d - 1)
    pts = np.empty((n, d))
    pts[:, 0] = np.arange(n) / n
    for j, p in enumerate(primes, start=1):
        pts[:, j] = [radical_inverse(k, p) for k in range(n)]
    return PointSet(
        pts, provenance={"generator": "hammersley", "seed": None, "n": n, "dim": d}
    )
