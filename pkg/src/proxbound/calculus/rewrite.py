"""Rewriting a finite max as a piecewise function over active-set cells.

A max of finitely many functions equals the piecewise function whose cells
are the active sets {x : f_i(x) = max_j f_j(x)}. The rewrite is exact for
1-D polynomial children (active sets are unions of intervals bounded by the
real roots of pairwise differences) and for affine children in any supported
dimension (active sets are polytopes). Other shapes return None and the
caller falls back to attribute rules.
"""

from __future__ import annotations

import math
from typing import Optional

from ..funcdsl.nodes import (
    Affine, Constant, FuncExpr, MaxOf, Piecewise, Quadratic, dim_of,
)
from ..funcdsl.regions import (
    Halfspace, Interval1D, PartitionError, Polytope, RegionPartition,
)

INF = math.inf


def _poly1(f: FuncExpr) -> Optional[tuple[float, float, float]]:
    """1-D polynomial coefficients (c0, c1, c2) of f, or None."""
    if dim_of(f) != 1:
        return None
    if isinstance(f, Constant):
        return (f.value, 0.0, 0.0)
    if isinstance(f, Affine):
        return (f.offset, f.coeffs[0], 0.0)
    if isinstance(f, Quadratic):
        return (f.const, f.lin[0], f.quad[0][0] / 2.0)
    return None


def _poly_at(p: tuple[float, float, float], t: float) -> float:
    return p[0] + p[1] * t + p[2] * t * t


def _diff_roots(a, b) -> list[float]:
    d0, d1, d2 = a[0] - b[0], a[1] - b[1], a[2] - b[2]
    if d2 != 0.0:
        disc = d1 * d1 - 4.0 * d2 * d0
        if disc < 0.0:
            return []
        s = math.sqrt(disc)
        r1, r2 = (-d1 - s) / (2.0 * d2), (-d1 + s) / (2.0 * d2)
        return [r1] if r1 == r2 else [r1, r2]
    if d1 != 0.0:
        return [-d0 / d1]
    return []


def _dedupe(points: list[float]) -> list[float]:
    out: list[float] = []
    for b in sorted(points):
        if not out or b - out[-1] > 1e-9 * max(1.0, abs(b)):
            out.append(b)
    return out


def _max_1d_polys(f: MaxOf) -> Optional[Piecewise]:
    polys = [_poly1(c) for c in f.children]
    if any(p is None for p in polys):
        return None
    breaks: list[float] = []
    for i in range(len(polys)):
        for j in range(i + 1, len(polys)):
            breaks += _diff_roots(polys[i], polys[j])
    breaks = _dedupe(breaks)
    edges = [-INF] + breaks + [INF]
    segments: list[tuple[float, float, int]] = []  # (lo, hi, active child)
    for lo, hi in zip(edges[:-1], edges[1:]):
        if math.isinf(lo) and math.isinf(hi):
            mid = 0.0
        elif math.isinf(lo):
            mid = hi - 1.0
        elif math.isinf(hi):
            mid = lo + 1.0
        else:
            mid = (lo + hi) / 2.0
        values = [_poly_at(p, mid) for p in polys]
        active = values.index(max(values))
        if segments and segments[-1][2] == active and segments[-1][1] == lo:
            segments[-1] = (segments[-1][0], hi, active)
        else:
            segments.append((lo, hi, active))
    # child-major ordering: all of child 1's cells first, then child 2's, ...
    segments.sort(key=lambda s: (s[2], s[0]))
    cells = tuple(Interval1D(lo, hi, not math.isinf(lo), not math.isinf(hi))
                  for lo, hi, _ in segments)
    pieces = tuple(f.children[active] for _, _, active in segments)
    return Piecewise(RegionPartition(cells), pieces)


def _max_affine(f: MaxOf) -> Optional[Piecewise]:
    dim = dim_of(f)
    if dim != 2:
        return None
    params: list[tuple[tuple[float, ...], float]] = []
    for c in f.children:
        if isinstance(c, Affine):
            params.append((c.coeffs, c.offset))
        elif isinstance(c, Constant):
            params.append(((0.0,) * dim, c.value))
        else:
            return None
    cells: list[Polytope] = []
    keep: list[int] = []
    for i, (ai, bi) in enumerate(params):
        halfspaces: Optional[list[Halfspace]] = []
        for j, (aj, bj) in enumerate(params):
            if j == i:
                continue
            normal = tuple(x - y for x, y in zip(aj, ai))
            if all(v == 0.0 for v in normal):
                if bj > bi or (bj == bi and j < i):
                    halfspaces = None  # child j dominates (or preempts) i
                    break
                continue
            halfspaces.append(Halfspace(normal, bi - bj))
        if halfspaces is None:
            continue
        cell = Polytope(tuple(halfspaces), dim=dim)
        if not cell.is_empty():
            cells.append(cell)
            keep.append(i)
    pieces = tuple(f.children[i] for i in keep)
    return Piecewise(RegionPartition(tuple(cells)), pieces)


def max_to_piecewise(f: MaxOf) -> Optional[Piecewise]:
    """Exact piecewise form of a finite max, or None when out of scope."""
    try:
        pw = _max_1d_polys(f) if dim_of(f) == 1 else _max_affine(f)
        if pw is None:
            return None
        pw.partition.validate()
        return pw
    except (PartitionError, ValueError):
        return None
