"""Deterministic multi-start minimization over expanding grids.

The scan engine underpins every numeric operation: expanding balls around a
center, a dense grid per radius level, landmark seeds from the expression's
cells, local refinement of candidate minima, and a divergence certificate
when any probed value falls below -divergence_bound. Everything is plain
vectorized numpy with lowest-index tie breaking, so repeated runs are
bit-identical regardless of thread count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from ..funcdsl import FuncExpr, dim_of, eval_points, feasible_seeds
from .config import DEFAULT_CONFIG, SolverConfig

INF = math.inf

_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0
_INVPHI2 = 1.0 - _INVPHI


class ImproperFunctionError(ValueError):
    """Raised when a function evaluates to +inf at every probed point."""


def _eval(f: FuncExpr, pts: np.ndarray) -> np.ndarray:
    """eval_points with overflow silenced and nan mapped to +inf.

    Large powers overflow to inf legitimately during wide scans; nan (only
    reachable through inf - inf arithmetic inside sums) is treated as
    infeasible rather than as evidence of divergence.
    """
    with np.errstate(over="ignore", invalid="ignore"):
        vals = eval_points(f, pts)
    return np.where(np.isnan(vals), INF, vals)


@dataclass(frozen=True)
class ScanResult:
    """Outcome of one minimization scan.

    kind is "finite" (stabilized minimum), "neg_inf" (a probe crossed the
    divergence bound; witness holds the point), or "inconclusive" (the value
    kept dropping through every radius level without crossing the bound).
    """

    kind: str
    value: float
    minimizers: tuple[tuple[float, ...], ...]
    witness: Optional[tuple[float, ...]]
    stabilized: bool
    evaluations: int

    @property
    def diverged(self) -> bool:
        return self.kind == "neg_inf"


def _radius_schedule(cfg: SolverConfig) -> list[float]:
    radii: list[float] = []
    r = 1.0
    while r < cfg.max_radius:
        radii.append(r)
        r *= cfg.radius_growth
    radii.append(cfg.max_radius)
    return radii


def _seed_coords(f: FuncExpr, center: np.ndarray, cfg: SolverConfig) -> list[float]:
    coords = sorted(set(feasible_seeds(f)))
    if len(coords) > cfg.seed_cap:
        # keep the landmarks closest to the origin, deterministically
        coords = sorted(sorted(coords, key=lambda v: (abs(v), v))[: cfg.seed_cap])
    extra = [0.0] + [float(c) for c in center]
    return sorted(set(coords + extra))


def _seed_points(f: FuncExpr, center: np.ndarray, cfg: SolverConfig) -> np.ndarray:
    coords = _seed_coords(f, center, cfg)
    dim = center.shape[0]
    if dim == 1:
        return np.asarray(coords, dtype=float).reshape(-1, 1)
    xs, ys = np.meshgrid(coords, coords, indexing="ij")
    return np.column_stack([xs.ravel(), ys.ravel()])


def _level_points(center: np.ndarray, radius: float, n: int) -> np.ndarray:
    dim = center.shape[0]
    if dim == 1:
        return np.linspace(center[0] - radius, center[0] + radius, n).reshape(-1, 1)
    ax0 = np.linspace(center[0] - radius, center[0] + radius, n)
    ax1 = np.linspace(center[1] - radius, center[1] + radius, n)
    xs, ys = np.meshgrid(ax0, ax1, indexing="ij")
    return np.column_stack([xs.ravel(), ys.ravel()])


def _ring_points(center: np.ndarray, radius: float, cfg: SolverConfig) -> np.ndarray:
    dim = center.shape[0]
    if dim == 1:
        return np.asarray([[center[0] - radius], [center[0] + radius]])
    m = cfg.sphere_samples(2)
    theta = 2.0 * math.pi * np.arange(m) / m
    return center[None, :] + radius * np.column_stack([np.cos(theta), np.sin(theta)])


def _local_min_indices_1d(vals: np.ndarray) -> np.ndarray:
    padded = np.concatenate([[INF], vals, [INF]])
    ok = np.isfinite(vals) & (vals <= padded[:-2]) & (vals <= padded[2:])
    return np.nonzero(ok)[0]


def _local_min_indices_2d(vals: np.ndarray, n: int) -> np.ndarray:
    grid = vals.reshape(n, n)
    padded = np.full((n + 2, n + 2), INF)
    padded[1:-1, 1:-1] = grid
    ok = (
        np.isfinite(grid)
        & (grid <= padded[:-2, 1:-1])
        & (grid <= padded[2:, 1:-1])
        & (grid <= padded[1:-1, :-2])
        & (grid <= padded[1:-1, 2:])
    )
    return np.nonzero(ok.ravel())[0]


@dataclass
class _Candidate:
    value: float
    point: np.ndarray
    halfwidth: float


def _collect_candidates(pts: np.ndarray, vals: np.ndarray, idx: np.ndarray,
                        halfwidth: float, cap: int) -> list[_Candidate]:
    if idx.size == 0:
        return []
    order = np.argsort(vals[idx], kind="stable")[:cap]
    chosen = idx[order]
    return [_Candidate(float(vals[i]), pts[i].copy(), halfwidth) for i in chosen]


def _stabilized(cumulative: list[float], cfg: SolverConfig) -> bool:
    if len(cumulative) < 2:
        return True
    final = cumulative[-1]
    if not math.isfinite(final):
        return False
    steps = max(2, len(cumulative) // 4)
    steps = min(steps, len(cumulative) - 1)
    allowance = cfg.stabilization_rel * (1.0 + abs(final))
    for j in range(len(cumulative) - steps, len(cumulative)):
        if cumulative[j - 1] - cumulative[j] > allowance:
            return False
    return True


def _golden_lockstep(line_eval: Callable[[np.ndarray], np.ndarray],
                     lo: np.ndarray, hi: np.ndarray,
                     best_c: np.ndarray, best_v: np.ndarray,
                     cfg: SolverConfig) -> tuple[np.ndarray, np.ndarray, int]:
    """Golden-section search run in lockstep over a batch of brackets.

    line_eval maps a coordinate array (one entry per bracket) to objective
    values. Returns the best evaluated coordinate and value per bracket,
    never worse than the incoming (best_c, best_v). One vectorized eval per
    iteration keeps the per-call overhead flat in the batch size.
    """
    a = lo.copy()
    b = hi.copy()
    x1 = a + _INVPHI2 * (b - a)
    x2 = a + _INVPHI * (b - a)
    f1 = line_eval(x1)
    f2 = line_eval(x2)
    evals = 2 * a.size
    best_c = best_c.copy()
    best_v = best_v.copy()

    def absorb(cs: np.ndarray, vs: np.ndarray):
        nonlocal best_c, best_v
        better = vs < best_v
        best_c = np.where(better, cs, best_c)
        best_v = np.where(better, vs, best_v)

    absorb(x1, f1)
    absorb(x2, f2)
    for _ in range(cfg.refine_max_iter):
        if float(np.max(b - a)) <= cfg.refine_tol:
            break
        left = f1 <= f2
        old_x1, old_f1 = x1, f1
        old_x2, old_f2 = x2, f2
        a = np.where(left, a, old_x1)
        b = np.where(left, old_x2, b)
        probe = np.where(left, a + _INVPHI2 * (b - a), a + _INVPHI * (b - a))
        vals = line_eval(probe)
        evals += probe.size
        x1 = np.where(left, probe, old_x2)
        f1 = np.where(left, vals, old_f2)
        x2 = np.where(left, old_x1, probe)
        f2 = np.where(left, old_f1, vals)
        absorb(probe, vals)
    return best_c, best_v, evals


def _refine_1d(f: FuncExpr, cands: list[_Candidate],
               cfg: SolverConfig) -> tuple[np.ndarray, np.ndarray, int]:
    pts = np.asarray([c.point[0] for c in cands])
    vals = np.asarray([c.value for c in cands])
    h = np.asarray([c.halfwidth for c in cands])

    def line_eval(cs: np.ndarray) -> np.ndarray:
        return _eval(f, cs.reshape(-1, 1))

    best_c, best_v, evals = _golden_lockstep(line_eval, pts - h, pts + h, pts, vals, cfg)
    return best_c.reshape(-1, 1), best_v, evals


def _refine_2d(f: FuncExpr, cands: list[_Candidate],
               cfg: SolverConfig) -> tuple[np.ndarray, np.ndarray, int]:
    pts = np.stack([c.point for c in cands])
    vals = np.asarray([c.value for c in cands])
    h = np.asarray([c.halfwidth for c in cands])
    evals = 0
    for _ in range(cfg.coord_sweeps):
        for axis in (0, 1):
            def line_eval(cs: np.ndarray) -> np.ndarray:
                probe = pts.copy()
                probe[:, axis] = cs
                return _eval(f, probe)

            coords = pts[:, axis]
            best_c, vals, used = _golden_lockstep(
                line_eval, coords - h, coords + h, coords, vals, cfg)
            pts[:, axis] = best_c
            evals += used
    return pts, vals, evals


def _dedupe_minimizers(pts: np.ndarray, vals: np.ndarray, best: float,
                       cfg: SolverConfig) -> tuple[tuple[float, ...], ...]:
    window = cfg.value_tol * (1.0 + abs(best))
    keep = vals <= best + window
    pts = pts[keep]
    vals = vals[keep]
    order = sorted(range(pts.shape[0]),
                   key=lambda i: (vals[i], tuple(pts[i])))
    chosen: list[np.ndarray] = []
    for i in order:
        p = pts[i]
        tol = cfg.dedup_tol * (1.0 + float(np.linalg.norm(p)))
        if all(float(np.linalg.norm(p - q)) > tol for q in chosen):
            chosen.append(p)
        if len(chosen) >= cfg.max_candidates:
            break
    chosen.sort(key=lambda p: tuple(p))
    return tuple(tuple(float(v) for v in p) for p in chosen)


def minimize(f: FuncExpr, center, cfg: SolverConfig = DEFAULT_CONFIG,
             refine: bool = True, extend: bool = True) -> ScanResult:
    """Estimate inf f with expanding grid scans around `center`.

    Returns a finite minimum with its minimizer set, a -inf certificate with
    a witness point, or an inconclusive verdict when the scan keeps finding
    lower values without ever crossing the divergence bound. Raises
    ImproperFunctionError when no probed point is finite.
    """
    dim = dim_of(f)
    c = np.asarray(center, dtype=float).reshape(-1)
    if c.shape[0] != dim:
        raise ValueError(f"center of length {c.shape[0]} for dimension {dim}")

    evals = 0
    best_val = INF
    best_pt: Optional[np.ndarray] = None
    pool: list[_Candidate] = []

    def note_best(pts: np.ndarray, vals: np.ndarray):
        nonlocal best_val, best_pt
        i = int(np.argmin(vals))
        if vals[i] < best_val:
            best_val = float(vals[i])
            best_pt = pts[i].copy()

    seeds = _seed_points(f, c, cfg)
    seed_vals = _eval(f, seeds)
    evals += seeds.shape[0]
    low = seed_vals < -cfg.divergence_bound
    if low.any():
        i = int(np.argmax(low))
        return ScanResult("neg_inf", -INF, (), tuple(float(v) for v in seeds[i]),
                          False, evals)
    note_best(seeds, seed_vals)
    finite = np.nonzero(np.isfinite(seed_vals))[0]
    pool.extend(_collect_candidates(seeds, seed_vals, finite, 1.0, cfg.max_candidates))

    cumulative: list[float] = []
    for radius in _radius_schedule(cfg):
        pts = _level_points(c, radius, cfg.grid_points)
        vals = _eval(f, pts)
        evals += pts.shape[0]
        low = vals < -cfg.divergence_bound
        if low.any():
            i = int(np.argmax(low))
            return ScanResult("neg_inf", -INF, (),
                              tuple(float(v) for v in pts[i]), False, evals)
        if dim == 1:
            idx = _local_min_indices_1d(vals)
        else:
            idx = _local_min_indices_2d(vals, cfg.grid_points)
        spacing = 2.0 * radius / (cfg.grid_points - 1)
        pool.extend(_collect_candidates(pts, vals, idx, spacing, cfg.max_candidates))
        note_best(pts, vals)
        cumulative.append(best_val)

    if not math.isfinite(best_val):
        raise ImproperFunctionError(
            "function is +inf at every probed point; no finite value to work with")

    if not _stabilized(cumulative, cfg):
        if extend:
            radius = cfg.max_radius * cfg.radius_growth
            while radius <= cfg.extension_radius_cap:
                pts = _ring_points(c, radius, cfg)
                vals = _eval(f, pts)
                evals += pts.shape[0]
                low = vals < -cfg.divergence_bound
                if low.any():
                    i = int(np.argmax(low))
                    return ScanResult("neg_inf", -INF, (),
                                      tuple(float(v) for v in pts[i]), False, evals)
                note_best(pts, vals)
                radius *= cfg.radius_growth
        witness = tuple(float(v) for v in best_pt) if best_pt is not None else None
        return ScanResult("inconclusive", best_val, (), witness, False, evals)

    if not refine or not pool:
        minimizers = ()
        if best_pt is not None:
            minimizers = (tuple(float(v) for v in best_pt),)
        return ScanResult("finite", best_val, minimizers, None, True, evals)

    pool.sort(key=lambda cand: (cand.value, tuple(cand.point)))
    # refinement only helps near-ties, and each basin should be represented
    # once, by its finest-level candidate (those sort first on value); coarse
    # duplicates would stretch every lockstep bracket to their spacing
    window = best_val + max(10.0, 0.1 * (1.0 + abs(best_val)))
    cands = []
    for cand in pool:
        if cand.value > window:
            continue
        dup = any(
            float(np.linalg.norm(cand.point - kept.point))
            <= max(cand.halfwidth, kept.halfwidth)
            for kept in cands
        )
        if not dup:
            cands.append(cand)
        if len(cands) == cfg.max_candidates:
            break
    if not cands:
        cands = pool[:1]
    if dim == 1:
        ref_pts, ref_vals, used = _refine_1d(f, cands, cfg)
    else:
        ref_pts, ref_vals, used = _refine_2d(f, cands, cfg)
    evals += used
    overall = min(best_val, float(np.min(ref_vals)))
    minimizers = _dedupe_minimizers(ref_pts, ref_vals, overall, cfg)
    return ScanResult("finite", overall, minimizers, None, True, evals)
