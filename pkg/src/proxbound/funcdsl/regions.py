"""Region cells and partitions used by indicators and piecewise functions.

Cells come in three flavors: exact 1-D intervals, 2-D convex polytopes given
by halfspaces, and opaque membership predicates (numeric-only). Partition
validity (cover plus interior disjointness) is checked on sample grids at
construction time rather than proved symbolically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Union

import numpy as np

INF = math.inf

# sample grid used by partition validation: per-dimension resolution and box
VALIDATION_GRID_POINTS = 1000
VALIDATION_BOX = 100.0
_BOUNDARY_OFFSETS = (1e-9, 1e-3, 1.0)


class PartitionError(ValueError):
    """A region partition failed its cover or disjointness check."""


@dataclass(frozen=True)
class Interval1D:
    """An interval of the real line with individually open or closed ends."""

    lo: float = -INF
    hi: float = INF
    lo_closed: bool = False
    hi_closed: bool = False

    def __post_init__(self):
        if math.isnan(self.lo) or math.isnan(self.hi):
            raise ValueError("interval bounds must not be NaN")
        if self.lo > self.hi:
            raise ValueError(f"empty interval: lo={self.lo} > hi={self.hi}")
        object.__setattr__(self, "lo", self.lo + 0.0)  # no negative zero
        object.__setattr__(self, "hi", self.hi + 0.0)
        # infinite endpoints are necessarily open
        if math.isinf(self.lo) and self.lo_closed:
            object.__setattr__(self, "lo_closed", False)
        if math.isinf(self.hi) and self.hi_closed:
            object.__setattr__(self, "hi_closed", False)

    @property
    def dim(self) -> int:
        return 1

    def is_empty(self) -> bool:
        return self.lo == self.hi and not (self.lo_closed and self.hi_closed)

    def is_bounded(self) -> bool:
        return not math.isinf(self.lo) and not math.isinf(self.hi)

    def is_whole_space(self) -> bool:
        return math.isinf(self.lo) and math.isinf(self.hi)

    def reaches_neg_inf(self) -> bool:
        return math.isinf(self.lo)

    def reaches_pos_inf(self) -> bool:
        return math.isinf(self.hi)

    def contains(self, pts: np.ndarray) -> np.ndarray:
        x = np.asarray(pts, dtype=float).reshape(-1, 1)[:, 0]
        lo_ok = x >= self.lo if self.lo_closed else x > self.lo
        hi_ok = x <= self.hi if self.hi_closed else x < self.hi
        return lo_ok & hi_ok

    def interior_contains(self, pts: np.ndarray) -> np.ndarray:
        x = np.asarray(pts, dtype=float).reshape(-1, 1)[:, 0]
        return (x > self.lo) & (x < self.hi)

    def finite_bounds(self) -> list[float]:
        return [b for b in (self.lo, self.hi) if not math.isinf(b)]

    def intersect(self, other: "Interval1D") -> Optional["Interval1D"]:
        """Exact intersection; None when provably empty."""
        if self.lo > other.lo:
            lo, lo_closed = self.lo, self.lo_closed
        elif other.lo > self.lo:
            lo, lo_closed = other.lo, other.lo_closed
        else:
            lo, lo_closed = self.lo, self.lo_closed and other.lo_closed
        if self.hi < other.hi:
            hi, hi_closed = self.hi, self.hi_closed
        elif other.hi < self.hi:
            hi, hi_closed = other.hi, other.hi_closed
        else:
            hi, hi_closed = self.hi, self.hi_closed and other.hi_closed
        if lo > hi:
            return None
        if lo == hi and not (lo_closed and hi_closed):
            return None
        return Interval1D(lo, hi, lo_closed, hi_closed)


@dataclass(frozen=True)
class Halfspace:
    """The set {x : a.x <= c}, or strict {x : a.x < c}."""

    coeffs: tuple[float, ...]
    bound: float
    strict: bool = False

    def __post_init__(self):
        if all(a == 0.0 for a in self.coeffs):
            raise ValueError("halfspace needs a nonzero normal")
        object.__setattr__(self, "coeffs",
                           tuple(a + 0.0 for a in self.coeffs))
        object.__setattr__(self, "bound", self.bound + 0.0)


@dataclass(frozen=True)
class Polytope:
    """Intersection of halfspaces in R^dim; empty halfspace tuple means all of R^dim."""

    halfspaces: tuple[Halfspace, ...]
    dim: int = 2

    def __post_init__(self):
        for h in self.halfspaces:
            if len(h.coeffs) != self.dim:
                raise ValueError("halfspace dimension mismatch")

    def is_whole_space(self) -> bool:
        return not self.halfspaces

    def contains(self, pts: np.ndarray) -> np.ndarray:
        p = np.asarray(pts, dtype=float).reshape(-1, self.dim)
        ok = np.ones(p.shape[0], dtype=bool)
        for h in self.halfspaces:
            v = p @ np.asarray(h.coeffs)
            ok &= (v < h.bound) if h.strict else (v <= h.bound)
        return ok

    def interior_contains(self, pts: np.ndarray) -> np.ndarray:
        p = np.asarray(pts, dtype=float).reshape(-1, self.dim)
        ok = np.ones(p.shape[0], dtype=bool)
        for h in self.halfspaces:
            ok &= (p @ np.asarray(h.coeffs)) < h.bound
        return ok

    def _vertex_candidates(self) -> list[np.ndarray]:
        out = []
        hs = self.halfspaces
        for i in range(len(hs)):
            for j in range(i + 1, len(hs)):
                a = np.array([hs[i].coeffs, hs[j].coeffs], dtype=float)
                b = np.array([hs[i].bound, hs[j].bound], dtype=float)
                if abs(np.linalg.det(a)) > 1e-12:
                    out.append(np.linalg.solve(a, b))
        return out

    def find_point(self) -> Optional[np.ndarray]:
        """Some point of the polytope, or None when none was found.

        Candidate-based: constraint-pair vertices nudged inward, plus a coarse
        grid. Exact for generic polytopes; borderline-degenerate cases may be
        misjudged, consistent with the sample-checked design of this module.
        """
        if self.is_whole_space():
            return np.zeros(self.dim)
        cands = [np.zeros(self.dim)]
        verts = self._vertex_candidates()
        cands.extend(verts)
        inward = -sum((np.asarray(h.coeffs) / np.linalg.norm(h.coeffs)
                       for h in self.halfspaces), np.zeros(self.dim))
        for v in list(verts) + [np.zeros(self.dim)]:
            for eps in (1e-6, 1e-3, 1.0, 1e3):
                cands.append(v + eps * inward)
        grid = np.linspace(-VALIDATION_BOX, VALIDATION_BOX, 41)
        mesh = np.stack(np.meshgrid(*([grid] * self.dim)), axis=-1).reshape(-1, self.dim)
        allpts = np.vstack([np.asarray(cands).reshape(-1, self.dim), mesh])
        ok = self.contains(allpts)
        if ok.any():
            return allpts[int(np.argmax(ok))]
        return None

    def is_empty(self) -> bool:
        return self.find_point() is None

    def recession_directions(self) -> list[np.ndarray]:
        """Unit directions along which the polytope is unbounded.

        Returns candidate extreme rays of the recession cone {d : a.d <= 0}
        plus dense samples inside it; empty list means the polytope is bounded.
        """
        if self.is_whole_space():
            angles = np.linspace(0, 2 * math.pi, 720, endpoint=False)
            return [np.array([math.cos(t), math.sin(t)]) for t in angles]
        normals = [np.asarray(h.coeffs, dtype=float) for h in self.halfspaces]

        def in_cone(d):
            return all(float(n @ d) <= 1e-12 for n in normals)

        dirs = []
        for n in normals:
            n = n / np.linalg.norm(n)
            for rot in (np.array([-n[1], n[0]]), np.array([n[1], -n[0]])):
                if in_cone(rot):
                    dirs.append(rot)
        angles = np.linspace(0, 2 * math.pi, 720, endpoint=False)
        for t in angles:
            d = np.array([math.cos(t), math.sin(t)])
            if in_cone(d):
                dirs.append(d)
        return dirs

    def is_bounded(self) -> bool:
        return not self.recession_directions()

    def finite_bounds(self) -> list[float]:
        # vertex coordinates stand in for boundary probe locations
        out = []
        for v in self._vertex_candidates():
            out.extend(float(c) for c in v)
        return out


@dataclass(frozen=True, eq=False)
class PredicateCell:
    """Opaque membership cell; numeric-only, compared by identity."""

    fn: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    dim: int = 1
    label: str = "predicate"

    def contains(self, pts: np.ndarray) -> np.ndarray:
        p = np.asarray(pts, dtype=float).reshape(-1, self.dim)
        return np.asarray(self.fn(p), dtype=bool).reshape(-1)

    def interior_contains(self, pts: np.ndarray) -> np.ndarray:
        return self.contains(pts)

    def is_whole_space(self) -> bool:
        return False

    def finite_bounds(self) -> list[float]:
        return []


Cell = Union[Interval1D, Polytope, PredicateCell]


def cell_dim(cell: Cell) -> int:
    return cell.dim if not isinstance(cell, Interval1D) else 1


def whole_space(dim: int) -> Cell:
    if dim == 1:
        return Interval1D()
    return Polytope((), dim)


def interval_to_polytope(iv: Interval1D, dim: int = 2) -> Polytope:
    """Embed an x-axis interval as a polytope constraining coordinate 0."""
    hs = []
    if not math.isinf(iv.lo):
        coeffs = tuple(-1.0 if k == 0 else 0.0 for k in range(dim))
        hs.append(Halfspace(coeffs, -iv.lo, strict=not iv.lo_closed))
    if not math.isinf(iv.hi):
        coeffs = tuple(1.0 if k == 0 else 0.0 for k in range(dim))
        hs.append(Halfspace(coeffs, iv.hi, strict=not iv.hi_closed))
    return Polytope(tuple(hs), dim)


def intersect_cells(a: Cell, b: Cell) -> Optional[Cell]:
    """Intersection of two cells; None when provably empty.

    1-D interval algebra is exact. Polytope emptiness uses find_point.
    Predicate cells combine into a conjunction predicate.
    """
    if isinstance(a, Interval1D) and isinstance(b, Interval1D):
        return a.intersect(b)
    da, db = cell_dim(a), cell_dim(b)
    if da != db:
        raise ValueError("cell dimension mismatch")
    if isinstance(a, PredicateCell) or isinstance(b, PredicateCell):
        fa, fb = a.contains, b.contains
        return PredicateCell(lambda p: fa(p) & fb(p), dim=da, label="conjunction")
    pa = a if isinstance(a, Polytope) else interval_to_polytope(a, da)
    pb = b if isinstance(b, Polytope) else interval_to_polytope(b, da)
    merged = Polytope(pa.halfspaces + pb.halfspaces, da)
    if merged.is_empty():
        return None
    return merged


def _sample_points(dim: int, bounds: list[float]) -> np.ndarray:
    axis = np.linspace(-VALIDATION_BOX, VALIDATION_BOX, VALIDATION_GRID_POINTS)
    probes = [0.0]
    for b in bounds:
        if abs(b) <= 10 * VALIDATION_BOX:
            probes.append(b)
            for eps in _BOUNDARY_OFFSETS:
                probes.extend((b - eps, b + eps))
    if dim == 1:
        pts = np.concatenate([axis, np.asarray(probes)])
        return pts.reshape(-1, 1)
    ax = np.concatenate([axis, np.asarray(probes)])
    xs, ys = np.meshgrid(ax, ax)
    return np.stack([xs.ravel(), ys.ravel()], axis=1)


@dataclass(frozen=True)
class RegionPartition:
    """A finite family of cells expected to cover R^n with disjoint interiors."""

    cells: tuple[Cell, ...]

    def __post_init__(self):
        if not self.cells:
            raise PartitionError("partition needs at least one cell")
        dims = {cell_dim(c) for c in self.cells}
        if len(dims) != 1:
            raise PartitionError("partition cells disagree on dimension")

    @property
    def dim(self) -> int:
        return cell_dim(self.cells[0])

    def membership(self, pts: np.ndarray) -> np.ndarray:
        """Lowest-index cell containing each point; -1 when uncovered."""
        p = np.asarray(pts, dtype=float).reshape(-1, self.dim)
        out = np.full(p.shape[0], -1, dtype=int)
        for i, cell in enumerate(self.cells):
            mask = (out < 0) & cell.contains(p)
            out[mask] = i
        return out

    def validate(self) -> None:
        """Sample-based cover and interior-disjointness check; raises PartitionError."""
        bounds = []
        for c in self.cells:
            bounds.extend(c.finite_bounds())
        pts = _sample_points(self.dim, bounds)
        member = [c.contains(pts) for c in self.cells]
        covered = np.zeros(pts.shape[0], dtype=bool)
        for m in member:
            covered |= m
        if not covered.all():
            witness = pts[int(np.argmin(covered))]
            raise PartitionError(
                f"partition does not cover the space near {tuple(float(v) for v in witness)}")
        for j, cell in enumerate(self.cells):
            interior = cell.interior_contains(pts)
            if not interior.any():
                continue
            for i, m in enumerate(member):
                if i == j:
                    continue
                overlap = interior & m
                if overlap.any():
                    witness = pts[int(np.argmax(overlap))]
                    raise PartitionError(
                        f"cells {i} and {j} overlap on an interior point near "
                        f"{tuple(float(v) for v in witness)}")
