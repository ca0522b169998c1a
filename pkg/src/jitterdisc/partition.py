"""Equal-measure partitions of the unit cube built from axis-aligned boxes.

A cell is a finite union of interior-disjoint boxes; a partition is N cells
of measure exactly 1/N.  Boxes give closed forms for both the anchored
overlap ``|cell ∩ [0,x]|`` and its squared integral, which is everything the
discrepancy layer needs, while still covering grids, composite cells and
randomized fine-grid constructions.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import as_point

__all__ = [
    "EQUAL_MEASURE_TOL",
    "PartitionError",
    "MeasureMismatchError",
    "OverlapError",
    "CoverageGapError",
    "Box",
    "Cell",
    "Partition",
    "grid_partition",
    "box_partition_from_spec",
    "randomized_fine_grid_partition",
    "random_box_partition",
    "cell_anchored_overlap",
    "sample_cell",
    "write_partition",
    "read_partition",
]

# All supported constructions produce dyadic/rational measures representable
# near machine precision, so the equal-measure tolerance can sit at 1e-12.
EQUAL_MEASURE_TOL = 1e-12
_OVERLAP_VOL_TOL = 1e-12
_MAX_CELLS = 2**31 - 1


class PartitionError(ValueError):
    """Base class for partition validation failures."""


class MeasureMismatchError(PartitionError):
    """A cell's measure differs from 1/N beyond tolerance."""


class OverlapError(PartitionError):
    """Two boxes overlap with positive volume."""


class CoverageGapError(PartitionError):
    """The cells do not cover the unit cube."""


@dataclass(frozen=True)
class Box:
    """Axis-aligned box ``[lower, upper]`` inside the unit cube."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lo = as_point(self.lower)
        up = as_point(self.upper)
        if lo.shape != up.shape:
            raise ValueError("lower and upper must have the same dimension")
        if np.any(lo > up):
            raise ValueError(f"box has lower > upper: {lo!r}, {up!r}")
        lo.flags.writeable = False
        up.flags.writeable = False
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", up)

    @property
    def dim(self) -> int:
        return self.lower.shape[0]

    @property
    def volume(self) -> float:
        return float(np.prod(self.upper - self.lower))

    def anchored_overlap(self, x: np.ndarray) -> float:
        """Volume of ``box ∩ [0, x]``."""
        return float(np.prod(np.clip(x - self.lower, 0.0, self.upper - self.lower)))


@dataclass(frozen=True)
class Cell:
    """Union of pairwise interior-disjoint boxes."""

    boxes: tuple

    def __post_init__(self):
        boxes = tuple(self.boxes)
        if not boxes:
            raise ValueError("a cell needs at least one box")
        d = boxes[0].dim
        if any(b.dim != d for b in boxes):
            raise ValueError("all boxes of a cell must share one dimension")
        object.__setattr__(self, "boxes", boxes)

    @property
    def dim(self) -> int:
        return self.boxes[0].dim

    @property
    def measure(self) -> float:
        return math.fsum(b.volume for b in self.boxes)


@dataclass(frozen=True)
class Partition:
    """N interior-disjoint cells of measure 1/N covering the unit cube.

    Cell order is part of the partition identity (it keys the per-cell RNG
    substreams of jittered sampling) and is preserved by serialization.
    Instances are immutable after validation; overlap queries are pure.
    """

    dim: int
    cells: tuple

    def __post_init__(self):
        cells = tuple(self.cells)
        if not cells:
            raise ValueError("a partition needs at least one cell")
        if any(c.dim != self.dim for c in cells):
            raise ValueError("cell dimension mismatch")
        object.__setattr__(self, "cells", cells)

    @property
    def n_cells(self) -> int:
        return len(self.cells)

    def validate(self) -> "Partition":
        """Check box disjointness, coverage and equal measure; return self.

        Boxes are confined to the unit cube by construction, so disjoint
        cells whose measures sum to 1 necessarily cover it; the coverage
        check is therefore the total-measure identity.
        """
        n = self.n_cells
        self._check_disjoint()
        measures = [cell.measure for cell in self.cells]
        total = math.fsum(measures)
        if abs(total - 1.0) > n * EQUAL_MEASURE_TOL:
            raise CoverageGapError(
                f"cells cover measure {total!r} instead of 1 (defect {abs(total - 1.0):.3e})"
            )
        target = 1.0 / n
        for i, m in enumerate(measures):
            defect = abs(m - target)
            if defect > EQUAL_MEASURE_TOL:
                raise MeasureMismatchError(
                    f"cell {i}: measure {m!r} deviates from 1/{n} by {defect:.3e}"
                )
        return self

    def _check_disjoint(self) -> None:
        owner = []
        lowers = []
        uppers = []
        for i, cell in enumerate(self.cells):
            for b in cell.boxes:
                owner.append(i)
                lowers.append(b.lower)
                uppers.append(b.upper)
        lo = np.array(lowers)
        up = np.array(uppers)
        m = lo.shape[0]
        step = max(1, 2_000_000 // max(1, m))
        for a in range(0, m, step):
            b = min(m, a + step)
            width = np.minimum(up[a:b, None, :], up[None, :, :]) - np.maximum(
                lo[a:b, None, :], lo[None, :, :]
            )
            vol = np.prod(np.clip(width, 0.0, None), axis=2)
            # keep strictly-upper-triangular pairs only
            rows = np.arange(a, b)[:, None]
            vol[rows >= np.arange(m)[None, :]] = 0.0
            bad = np.argwhere(vol > _OVERLAP_VOL_TOL)
            if bad.size:
                i, j = int(bad[0, 0]) + a, int(bad[0, 1])
                raise OverlapError(
                    f"boxes of cells {owner[i]} and {owner[j]} overlap with "
                    f"volume {vol[i - a, j]:.3e}"
                )


def cell_anchored_overlap(cell: Cell, x) -> float:
    """Volume of ``cell ∩ [0, x]``, summed over the cell's boxes."""
    q = as_point(x)
    if q.shape[0] != cell.dim:
        raise ValueError(
            f"query dimension {q.shape[0]} != cell dimension {cell.dim}"
        )
    return math.fsum(b.anchored_overlap(q) for b in cell.boxes)


def sample_cell(cell: Cell, rng: np.random.Generator) -> np.ndarray:
    """Draw a point uniformly from the union of the cell's boxes.

    Selects a box with probability proportional to its volume (no draw is
    consumed when the cell has a single box), then samples each coordinate
    uniformly inside it.  Deterministic given the rng state.
    """
    boxes = cell.boxes
    if len(boxes) == 1:
        b = boxes[0]
    else:
        vols = np.array([b.volume for b in boxes])
        total = vols.sum()
        if total <= 0.0:
            raise ValueError("cannot sample from a zero-measure cell")
        cum = np.cumsum(vols)
        k = int(np.searchsorted(cum, rng.random() * total, side="right"))
        b = boxes[min(k, len(boxes) - 1)]
    width = b.upper - b.lower
    if float(np.prod(width)) <= 0.0 and len(boxes) == 1:
        raise ValueError("cannot sample from a zero-measure cell")
    return b.lower + rng.random(b.dim) * width


# ---------------------------------------------------------------------------
# constructors


def _guard_cell_count(n: int) -> None:
    if n > _MAX_CELLS:
        raise ValueError(f"partition with {n} cells exceeds the addressable limit")


def grid_partition(m: int, d: int) -> Partition:
    """Partition ``[0,1]^d`` into ``m^d`` congruent axis-aligned cubes.

    Cell k is ``prod_i [(k_i-1)/m, k_i/m]``; enumeration order is
    lexicographic in the index vector.
    """
    if m < 1 or d < 1:
        raise ValueError("m and d must be positive integers")
    _guard_cell_count(m**d)
    cells = []
    for kv in np.ndindex(*(m,) * d):
        kvf = np.asarray(kv, dtype=float)
        cells.append(Cell(boxes=(Box(kvf / m, (kvf + 1.0) / m),)))
    return Partition(dim=d, cells=tuple(cells)).validate()


def box_partition_from_spec(spec: dict) -> Partition:
    """Build and validate a partition from its dict description.

    Expected shape: ``{"dim": d, "cells": [{"boxes": [{"lower": [...],
    "upper": [...]}, ...]}, ...]}``.  Raises :class:`MeasureMismatchError`,
    :class:`OverlapError` or :class:`CoverageGapError` with the offending
    cell index and the measured defect.
    """
    d = int(spec["dim"])
    cells = []
    for entry in spec["cells"]:
        boxes = tuple(
            Box(np.asarray(b["lower"], float), np.asarray(b["upper"], float))
            for b in entry["boxes"]
        )
        cells.append(Cell(boxes=boxes))
    declared = spec.get("n_cells")
    if declared is not None and int(declared) != len(cells):
        raise PartitionError(
            f"spec declares n_cells={declared} but lists {len(cells)} cells"
        )
    return Partition(dim=d, cells=tuple(cells)).validate()


def randomized_fine_grid_partition(
    m_fine: int, n_cells: int, d: int, seed: int
) -> Partition:
    """Deal the ``m_fine^d`` subcubes of a fine grid randomly into N cells.

    The subcubes are permuted with a seeded RNG and assigned in equal blocks
    of ``m_fine^d / N``; requires divisibility.  Fixed seed gives an
    identical partition.
    """
    if m_fine < 1 or n_cells < 1 or d < 1:
        raise ValueError("m_fine, n_cells and d must be positive")
    m_total = m_fine**d
    if m_total % n_cells != 0:
        raise ValueError(
            f"m_fine^d = {m_total} is not divisible by n_cells = {n_cells}"
        )
    _guard_cell_count(m_total)
    rng = np.random.default_rng(seed)
    perm = rng.permutation(m_total)
    block = m_total // n_cells
    shape = (m_fine,) * d
    cells = []
    for i in range(n_cells):
        boxes = []
        for flat in perm[i * block : (i + 1) * block]:
            kvf = np.asarray(np.unravel_index(int(flat), shape), dtype=float)
            boxes.append(Box(kvf / m_fine, (kvf + 1.0) / m_fine))
        cells.append(Cell(boxes=tuple(boxes)))
    return Partition(dim=d, cells=tuple(cells)).validate()


def random_box_partition(
    n_cells: int, d: int, seed: int, boxes_per_cell: int = 1
) -> Partition:
    """Random equal-measure partition into N cells of axis-aligned boxes.

    Recursive random splits produce ``N * boxes_per_cell`` boxes, each of
    measure ``1/(N * boxes_per_cell)``; with ``boxes_per_cell > 1`` the boxes
    are shuffled and grouped, so cells are generally disconnected.
    """
    if n_cells < 1 or d < 1 or boxes_per_cell < 1:
        raise ValueError("n_cells, d and boxes_per_cell must be positive")
    rng = np.random.default_rng(seed)
    boxes: list[Box] = []

    def split(lower: np.ndarray, upper: np.ndarray, n: int) -> None:
        if n == 1:
            boxes.append(Box(lower, upper))
            return
        k = int(rng.integers(1, n))
        axis = int(rng.integers(d))
        cut = lower[axis] + (upper[axis] - lower[axis]) * (k / n)
        left_up = upper.copy()
        left_up[axis] = cut
        right_lo = lower.copy()
        right_lo[axis] = cut
        split(lower, left_up, k)
        split(right_lo, upper, n - k)

    split(np.zeros(d), np.ones(d), n_cells * boxes_per_cell)
    order = rng.permutation(len(boxes)) if boxes_per_cell > 1 else np.arange(len(boxes))
    cells = []
    for i in range(n_cells):
        picked = [boxes[int(j)] for j in order[i * boxes_per_cell : (i + 1) * boxes_per_cell]]
        cells.append(Cell(boxes=tuple(picked)))
    return Partition(dim=d, cells=tuple(cells)).validate()


# ---------------------------------------------------------------------------
# JSON spec files


def write_partition(part: Partition, path) -> None:
    """Serialize a partition (cells in order) to its JSON spec file."""
    doc = {
        "dim": part.dim,
        "n_cells": part.n_cells,
        "cells": [
            {
                "boxes": [
                    {"lower": b.lower.tolist(), "upper": b.upper.tolist()}
                    for b in cell.boxes
                ]
            }
            for cell in part.cells
        ],
    }
    Path(path).write_text(json.dumps(doc, indent=1) + "\n")


def read_partition(path) -> Partition:
    """Load and validate a partition from its JSON spec file."""
    return box_partition_from_spec(json.loads(Path(path).read_text()))
