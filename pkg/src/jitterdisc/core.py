"""Geometry and counting primitives shared by the whole library.

A point is a plain 1-d numpy array with coordinates in the closed unit
cube; a :class:`PointSet` wraps an immutable ``(N, d)`` coordinate array
together with a provenance record describing how it was generated.
Counting uses exact floating-point comparisons with an explicit
closed/open pair of conventions, which is what the exact discrepancy
engines need.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

__all__ = [
    "DimensionMismatchError",
    "PointSet",
    "AnchoredBox",
    "as_point",
    "volume_anchored",
    "count_closed",
    "count_open",
    "bracket",
    "write_pointset",
    "read_pointset",
]


class DimensionMismatchError(ValueError):
    """A query point's dimension does not match the point set's."""


def as_point(x) -> np.ndarray:
    """Coerce ``x`` to a 1-d float array and check it lies in [0,1]^d."""
    p = np.atleast_1d(np.asarray(x, dtype=float))
    if p.ndim != 1 or p.size < 1:
        raise ValueError("a point must be a 1-d coordinate vector")
    if np.any(p < 0.0) or np.any(p > 1.0):
        raise ValueError(f"coordinates outside [0,1]: {p!r}")
    return p


@dataclass(frozen=True)
class PointSet:
    """``N`` points in ``[0,1]^d`` plus generation provenance.

    ``points`` is an ``(N, d)`` array, one point per row, made read-only at
    construction; instances are safe to share across concurrent readers.
    ``provenance`` is a free-form record (generator name, seed, parameters).
    """

    points: np.ndarray
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        pts = np.ascontiguousarray(np.asarray(self.points, dtype=float))
        if pts.ndim != 2:
            raise ValueError("points must form a 2-d (N, d) array")
        n, d = pts.shape
        if n < 1 or d < 1:
            raise ValueError("need N >= 1 points of dimension d >= 1")
        if np.any(pts < 0.0) or np.any(pts > 1.0):
            raise ValueError("points must lie in the closed unit cube")
        pts.flags.writeable = False
        object.__setattr__(self, "points", pts)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def check_dim(self, x: np.ndarray) -> None:
        if x.shape[-1] != self.dim:
            raise DimensionMismatchError(
                f"query dimension {x.shape[-1]} != point set dimension {self.dim}"
            )


@dataclass(frozen=True)
class AnchoredBox:
    """Axis-aligned box anchored at the origin, ``[0, upper]``."""

    upper: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "upper", as_point(self.upper))

    @property
    def volume(self) -> float:
        return float(np.prod(self.upper))


def volume_anchored(x) -> float:
    """Volume of the anchored box ``[0, x]``, i.e. the product of coordinates."""
    return float(np.prod(as_point(x)))


def count_closed(ps: PointSet, x) -> int:
    """Number of points ``p`` with ``p_i <= x_i`` in every coordinate."""
    q = as_point(x)
    ps.check_dim(q)
    return int(np.all(ps.points <= q, axis=1).sum())


def count_open(ps: PointSet, x) -> int:
    """Number of points ``p`` with ``p_i < x_i`` in every coordinate."""
    q = as_point(x)
    ps.check_dim(q)
    return int(np.all(ps.points < q, axis=1).sum())


def bracket(x, m: int) -> np.ndarray:
    """Index vector of the grid cell of side ``1/m`` containing ``x``.

    Component-wise ``floor(m * x_i) + 1`` in ``{1, ..., m}``; the coordinate
    1.0 is clamped into cell ``m`` so every point has exactly one cell.
    """
    if m < 1:
        raise ValueError("m must be a positive integer")
    p = as_point(x)
    idx = np.floor(m * p).astype(np.int64) + 1
    np.clip(idx, 1, m, out=idx)
    return idx


# ---------------------------------------------------------------------------
# point-set file format: header line then one point per line, coordinates as
# decimal text separated by single spaces.  Values round-trip exactly.

_HEADER_RE = re.compile(
    r"^#\s*dim=(\d+)\s+n=(\d+)\s+generator=(\S+)\s+seed=(\d+)\s*$"
)


def write_pointset(ps: PointSet, path) -> None:
    """Write ``ps`` in the plain-text point-set format.

    Header: ``# dim=<d> n=<N> generator=<name> seed=<u64>``; a seed of 0 is
    written for deterministic generators.  Coordinates are printed with 17
    significant digits so reads reproduce the exact doubles.
    """
    name = str(ps.provenance.get("generator", "unknown"))
    seed = ps.provenance.get("seed", 0)
    seed = 0 if seed is None else int(seed)
    lines = [f"# dim={ps.dim} n={ps.n} generator={name} seed={seed}"]
    for row in ps.points:
        lines.append(" ".join(f"{v:.17g}" for v in row))
    Path(path).write_text("\n".join(lines) + "\n")


def read_pointset(path) -> PointSet:
    """Read a point set written by :func:`write_pointset`."""
    text = Path(path).read_text().strip().splitlines()
    if not text:
        raise ValueError(f"{path}: empty point-set file")
    m = _HEADER_RE.match(text[0])
    if m is None:
        raise ValueError(f"{path}: malformed header line {text[0]!r}")
    dim, n, name, seed = int(m.group(1)), int(m.group(2)), m.group(3), int(m.group(4))
    rows = [line.split() for line in text[1:] if line.strip()]
    if len(rows) != n:
        raise ValueError(f"{path}: header says n={n} but found {len(rows)} points")
    pts = np.array([[float(v) for v in row] for row in rows], dtype=float)
    if pts.shape != (n, dim):
        raise ValueError(f"{path}: expected shape {(n, dim)}, got {pts.shape}")
    return PointSet(pts, provenance={"generator": name, "seed": seed})
