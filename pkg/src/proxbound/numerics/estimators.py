"""Numeric threshold estimators and boundedness probes.

Two independent estimates of the prox-boundedness threshold: the ratio
sequence min f/|x|^2 over growing spheres (anchored on the liminf
characterization), and bisection on r over a bounded-below probe of
f + (r/2)|.|^2. Both return ThresholdResult intervals so they compose with
the symbolic calculus, tagged with the statement id they lean on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..calculus import ThresholdResult, entry
from ..funcdsl import FuncExpr, Sum, dim_of, scaled_identity_quadratic
from .config import DEFAULT_CONFIG, SolverConfig
from .engine import _eval, minimize

INF = math.inf


@dataclass(frozen=True)
class ProbeResult:
    """Boundedness verdict; false answers carry the lowest point found."""

    bounded: bool
    witness: Optional[tuple[float, ...]]
    evaluations: int

    def __bool__(self) -> bool:
        return self.bounded


def bounded_below_probe(f: FuncExpr,
                        config: SolverConfig = DEFAULT_CONFIG) -> ProbeResult:
    """Heuristic check that inf f > -inf.

    True when the expanding scan stays above -divergence_bound and its
    running minimum stabilizes over the last quarter of the radius schedule;
    False otherwise, with the offending point as witness.
    """
    dim = dim_of(f)
    scan = minimize(f, np.zeros(dim), config, refine=False, extend=False)
    if scan.kind == "finite":
        return ProbeResult(True, None, scan.evaluations)
    return ProbeResult(False, scan.witness, scan.evaluations)


def _sphere_directions(dim: int, cfg: SolverConfig) -> np.ndarray:
    if dim == 1:
        return np.asarray([[-1.0], [1.0]])
    m = cfg.sphere_samples(2)
    theta = 2.0 * math.pi * np.arange(m) / m
    return np.column_stack([np.cos(theta), np.sin(theta)])


def estimate_threshold_liminf(f: FuncExpr,
                              config: SolverConfig = DEFAULT_CONFIG) -> ThresholdResult:
    """Threshold from the ratio sequence m_k = min f/|x|^2 on spheres |x| = 2^k.

    The liminf of f/|x|^2 equals -r/2 at threshold r, so the estimate is
    max(0, -2L) with L the smallest tail ratio. NotProxBounded when the
    ratios keep falling by at least 1% per doubling through the tail and end
    below -1, or when any ratio crosses -divergence_bound outright.
    """
    cfg = config
    dirs = _sphere_directions(dim_of(f), cfg)
    ratios: list[float] = []
    evals = 0
    for k in range(1, cfg.liminf_levels + 1):
        radius = 2.0 ** k
        vals = _eval(f, radius * dirs)
        evals += dirs.shape[0]
        m_k = float(np.min(vals)) / (radius * radius)
        if m_k < -cfg.divergence_bound:
            return ThresholdResult.not_prox_bounded(trace=(
                entry("liminf-estimate", "Fact4.3",
                      f"ratio {m_k:.3g} at |x| = 2^{k}", "diverges"),))
        ratios.append(m_k)

    tail = max(2, cfg.liminf_levels // 4)
    window = ratios[-tail:]
    prev = ratios[-tail - 1:-1]
    falling = all(
        p < 0 and c <= p * (1.0 + cfg.stabilization_rel)
        for p, c in zip(prev, window)
    )
    if falling and window[-1] <= -1.0:
        return ThresholdResult.not_prox_bounded(trace=(
            entry("liminf-estimate", "Fact4.3",
                  "ratio sequence decreasing through the tail", "diverges"),))

    low = min(window)
    est = max(0.0, -2.0 * low)
    tol = 0.05 * (1.0 + est)
    lo = max(0.0, est - tol)
    hi = est + tol
    return ThresholdResult.interval(lo, hi, trace=(
        entry("liminf-estimate", "Fact4.3",
              f"tail ratio {low:.6g} over {cfg.liminf_levels} doublings",
              f"[{lo:.6g}, {hi:.6g}]"),))


def estimate_threshold_bisection(f: FuncExpr,
                                 config: SolverConfig = DEFAULT_CONFIG) -> ThresholdResult:
    """Threshold by bisection on r with a bounded-below probe of f + (r/2)|.|^2.

    Brackets the flip point by doubling r, then bisects to relative width
    bisection_tol. NotProxBounded when no r up to bisection_max_r certifies
    boundedness.
    """
    cfg = config
    dim = dim_of(f)

    def probe(r: float) -> ProbeResult:
        g: FuncExpr = f if r == 0 else Sum((f, scaled_identity_quadratic(r, dim)))
        return bounded_below_probe(g, cfg)

    tol = cfg.bisection_tol
    if probe(0.0):
        return ThresholdResult.interval(0.0, tol, trace=(
            entry("bisection-estimate", "Fact4.3", "f bounded below at r = 0",
                  f"[0, {tol:g}]"),))

    lo, hi = 0.0, 1.0
    while hi <= cfg.bisection_max_r and not probe(hi):
        lo, hi = hi, hi * 2.0
    if hi > cfg.bisection_max_r:
        return ThresholdResult.not_prox_bounded(trace=(
            entry("bisection-estimate", "Fact4.3",
                  f"no r <= {cfg.bisection_max_r:g} certified bounded below",
                  "diverges"),))

    while hi - lo > tol * max(1.0, hi):
        mid = 0.5 * (lo + hi)
        if probe(mid):
            hi = mid
        else:
            lo = mid
    return ThresholdResult.interval(lo, hi, trace=(
        entry("bisection-estimate", "Fact4.3",
              "probe flip bracketed by bisection on r", f"[{lo:.6g}, {hi:.6g}]"),))


@dataclass(frozen=True)
class MinorantCheck:
    """Largest m with f >= -(r/2)|.|^2 + m on the probed region, if any."""

    holds: bool
    bound: Optional[float]
    witness: Optional[tuple[float, ...]]
    evaluations: int

    def __bool__(self) -> bool:
        return self.holds


def check_quadratic_minorant(f: FuncExpr, r: float,
                             config: SolverConfig = DEFAULT_CONFIG) -> MinorantCheck:
    """Search for the best quadratic minorant of curvature r.

    The minorant -(r/2)|.|^2 + m sits below f exactly when
    m <= inf(f + (r/2)|.|^2), so the scan's stabilized minimum is the best
    m. A diverging or non-stabilizing scan refutes the minorant; the witness
    is the point driving the objective down.
    """
    if r < 0:
        raise ValueError("minorant curvature r must be nonnegative")
    dim = dim_of(f)
    g: FuncExpr = f if r == 0 else Sum((f, scaled_identity_quadratic(r, dim)))
    scan = minimize(g, np.zeros(dim), config)
    if scan.kind == "finite":
        return MinorantCheck(True, scan.value, None, scan.evaluations)
    return MinorantCheck(False, None, scan.witness, scan.evaluations)


def point_estimate(result: ThresholdResult) -> float:
    """Collapse an estimator's ThresholdResult to a single representative r."""
    if result.is_npb:
        return INF
    if result.is_unknown:
        return math.nan
    if result.is_exact:
        return result.value
    if math.isinf(result.hi):
        return result.lo
    return 0.5 * (result.lo + result.hi)


__all__ = [
    "MinorantCheck",
    "ProbeResult",
    "bounded_below_probe",
    "check_quadratic_minorant",
    "estimate_threshold_bisection",
    "estimate_threshold_liminf",
    "point_estimate",
]
