"""Symbolic threshold rules and the structural driver.

Every rule returns a ThresholdResult claim about the same quantity; the
driver fires all applicable rules and intersects the claims. Trace entries
carry the statement id each bound rests on.
"""

from __future__ import annotations

import functools
import math
from typing import Optional

import numpy as np

from ..funcdsl.attributes import attributes
from ..funcdsl.nodes import (
    AbsNorm, Affine, BoundedAtom, Compose, Constant, FuncExpr, Indicator,
    MaxOf, Piecewise, Power, Quadratic, Scale, Sum, dim_of,
)
from ..funcdsl.regions import (
    Cell, Halfspace, Interval1D, Polytope, PredicateCell, intersect_cells,
)
from ..funcdsl.serialize import serialize
from .result import (
    INF, ResultKind, SoundnessError, ThresholdResult, TraceEntry, entry,
    intersect_all,
)
from .rewrite import max_to_piecewise

_ATOMS = (Constant, Affine, Quadratic, Power, AbsNorm, BoundedAtom, Indicator)


def _desc(f: FuncExpr, limit: int = 60) -> str:
    try:
        text = serialize(f)
    except (ValueError, TypeError):
        text = type(f).__name__
    return text if len(text) <= limit else text[:limit - 3] + "..."


def _exact0(rule: str, paper_id: str, f: FuncExpr, why: str) -> ThresholdResult:
    return ThresholdResult.exact(
        0.0, [entry(rule, paper_id, f"{why}: {_desc(f)}", "threshold = 0")])


# ---------------------------------------------------------------------------
# attribute-driven rules (apply to any node)

def _attribute_claims(f: FuncExpr) -> list[ThresholdResult]:
    rec = attributes(f)
    claims: list[ThresholdResult] = []
    if rec.bounded_below is True:
        claims.append(_exact0("bounded_below", "Fact2.7", f, "bounded below"))
    if rec.convex is True:
        claims.append(_exact0("convexity", "Fact2.10", f, "proper lsc convex"))
    if rec.lipschitz_k is not None:
        claims.append(ThresholdResult.exact(0.0, [entry(
            "lipschitz", "Prop3.1",
            f"K = {rec.lipschitz_k:g} for {_desc(f)}", "threshold = 0")]))
    if rec.linear_lower_growth is True:
        claims.append(_exact0("linear_lower_growth", "Fact2.9",
                              f, "linear lower growth"))
    return claims


# ---------------------------------------------------------------------------
# atoms

def atom_threshold(f: FuncExpr) -> ThresholdResult:
    """Threshold of a single atom, with its canonical justification."""
    if not isinstance(f, _ATOMS):
        raise ValueError(f"atom_threshold needs an atom, got {type(f).__name__}")
    match f:
        case Constant() | BoundedAtom():
            return _exact0("bounded_below", "Fact2.7", f, "bounded below")
        case Affine() | AbsNorm():
            return _exact0("convexity", "Fact2.10", f, "convex")
        case Indicator():
            return _exact0("bounded_below", "Fact2.7", f,
                           "indicator is bounded below by 0")
        case Quadratic():
            lam, _ = f.eigenvalues()
            v = max(0.0, -lam)
            return ThresholdResult.exact(v, [entry(
                "quadratic_curvature", "Fact4.3",
                f"min curvature {lam:g} of {_desc(f)}", f"threshold = {v:g}")])
        case Power():
            p = f.exponent
            if f.odd_symmetric:
                return ThresholdResult.not_prox_bounded([entry(
                    "power_growth", "Fact4.3",
                    f"odd power {_desc(f)} falls faster than any quadratic",
                    "not prox-bounded")])
            if f.sign > 0:
                return _exact0("bounded_below", "Fact2.7", f, "bounded below")
            if p == 1.0:
                return _exact0("linear_lower_growth", "Fact2.9", f,
                               "linear lower growth")
            if p < 2.0:
                return ThresholdResult.exact(0.0, [entry(
                    "power_growth", "Fact4.3",
                    f"{_desc(f)} is subquadratic", "threshold = 0")])
            return ThresholdResult.not_prox_bounded([entry(
                "power_growth", "Fact4.3",
                f"{_desc(f)} falls faster than any quadratic",
                "not prox-bounded")])
    raise AssertionError("unreachable")


# ---------------------------------------------------------------------------
# sums

def _sum_pair(e1: FuncExpr, r1: ThresholdResult,
              e2: FuncExpr, r2: ThresholdResult) -> ThresholdResult:
    if not (r1.is_resolved() and r2.is_resolved()):
        # a not-prox-bounded addend decides nothing: the two cubics sum to 0
        return ThresholdResult.unknown()
    claims = [ThresholdResult.interval(0.0, r1.hi + r2.hi, [entry(
        "sum_upper", "Prop4.9",
        f"{_desc(e1)} (hi {r1.hi:g}) + {_desc(e2)} (hi {r2.hi:g})",
        f"threshold <= {r1.hi + r2.hi:g}")])]

    def upgrades(ea, ra, eb, rb):
        # conditions on addend b that pin the sum's threshold to a's
        rec = attributes(eb)
        out = []
        if rec.bounded_below is True and rec.bounded_above is True:
            out.append((("sum_bounded_addend", "Prop4.9"),
                        f"{_desc(eb)} is bounded"))
        if rec.affine_params is not None:
            out.append((("sum_affine_addend", "Prop4.10"),
                        f"{_desc(eb)} is affine"))
        if rb.is_exact and rb.value == 0.0:
            if rec.bounded_above is True:
                out.append((("sum_bounded_above_addend", "Cor4.9b"),
                            f"{_desc(eb)} has threshold 0 and is bounded above"))
            if rec.affine_majorant is True:
                out.append((("sum_affine_majorant_addend", "Cor4.10b"),
                            f"{_desc(eb)} has threshold 0 with an affine majorant"))
        return [ThresholdResult.interval(ra.lo, ra.hi, [entry(
            rule, pid, why, f"threshold in [{ra.lo:g}, "
            + ("inf" if ra.hi == INF else f"{ra.hi:g}") + "]")])
            for (rule, pid), why in out]

    claims += upgrades(e1, r1, e2, r2)
    claims += upgrades(e2, r2, e1, r1)
    if (r1.is_exact and r1.value == 0.0 and r2.is_exact and r2.value == 0.0):
        claims.append(ThresholdResult.exact(0.0, [entry(
            "sum_zero_thresholds", "Cor4.9a",
            f"{_desc(e1)} and {_desc(e2)} both have threshold 0",
            "threshold = 0")]))
    return intersect_all(claims)


def rule_sum(f: Sum) -> ThresholdResult:
    """Sum rules; n-ary sums fold pairwise left to right."""
    acc_expr: FuncExpr = f.children[0]
    acc = compute_threshold(acc_expr)
    for child in f.children[1:]:
        acc = _sum_pair(acc_expr, acc, child, compute_threshold(child))
        acc_expr = Sum((acc_expr, child)) if not isinstance(
            acc_expr, Sum) else Sum(acc_expr.children + (child,))
    return acc


# ---------------------------------------------------------------------------
# scaling, composition

def rule_scale(f: Scale) -> ThresholdResult:
    inner = compute_threshold(f.child)
    note = entry("scaling", "Fact4.13",
                 f"factor {f.factor:g} applied to {_desc(f.child)}",
                 f"threshold scales by {f.factor:g}")
    return inner.scaled(f.factor, [note])


def rule_composition(f: Compose) -> ThresholdResult:
    outer_rec, inner_rec = attributes(f.outer), attributes(f.inner)
    claims: list[ThresholdResult] = []
    if outer_rec.lipschitz_k is not None and inner_rec.lipschitz_k is not None:
        claims.append(ThresholdResult.exact(0.0, [entry(
            "composition_lipschitz", "CompProp.i",
            f"K = {outer_rec.lipschitz_k:g} * {inner_rec.lipschitz_k:g}",
            "threshold = 0")]))
    if outer_rec.affine_params is not None:
        a = outer_rec.affine_params[0][0]
        if a >= 0:
            r_in = compute_threshold(f.inner)
            claims.append(r_in.scaled(a, [entry(
                "composition_outer_affine", "CompProp.ii",
                f"outer slope {a:g} over {_desc(f.inner)}",
                f"threshold = {a:g} * inner threshold")]))
        # a < 0 is outside the stated rule; other rules may still apply
    if inner_rec.affine_params is not None:
        coeffs = np.asarray(inner_rec.affine_params[0])
        a2 = float(coeffs @ coeffs)
        r_out = compute_threshold(f.outer)
        claims.append(r_out.scaled(a2, [entry(
            "composition_inner_affine", "CompProp.iii",
            f"inner slope norm^2 = {a2:g} under {_desc(f.outer)}",
            f"threshold = {a2:g} * outer threshold")]))
    return intersect_all(claims)


# ---------------------------------------------------------------------------
# restricted analysis: threshold of g + indicator(cell)

def _cone_min_curvature(q: Quadratic, cell: Polytope) -> Optional[float]:
    """Exact min of d'Qd over unit recession directions of the cell.

    Candidates: rotated halfspace normals (cone boundary rays) and
    eigendirections of Q inside the cone; a quadratic form on a circular arc
    attains its minimum at an arc endpoint or an interior critical point.
    Returns None when the recession cone is only the origin.
    """
    qm = q.q_matrix()
    normals = [np.asarray(h.coeffs, dtype=float) for h in cell.halfspaces]
    if not normals:
        return float(np.linalg.eigvalsh(qm)[0])
    candidates: list[np.ndarray] = []
    for n in normals:
        r = np.array([-n[1], n[0]])
        for d in (r, -r):
            if all(float(n2 @ d) <= 1e-12 for n2 in normals):
                candidates.append(d / np.linalg.norm(d))
    _, eigvecs = np.linalg.eigh(qm)
    for k in range(eigvecs.shape[1]):
        for d in (eigvecs[:, k], -eigvecs[:, k]):
            if all(float(n @ d) <= 1e-12 for n in normals):
                candidates.append(d)
    if not candidates:
        return None
    return min(float(d @ qm @ d) for d in candidates)


def _restricted_structural(g: FuncExpr, cell: Cell) -> list[ThresholdResult]:
    claims: list[ThresholdResult] = []
    if isinstance(g, Quadratic) and isinstance(cell, Interval1D):
        lam = g.quad[0][0]
        v = max(0.0, -lam)
        claims.append(ThresholdResult.exact(v, [entry(
            "restricted_quadratic", "Fact4.3",
            f"{_desc(g)} along an unbounded interval", f"threshold = {v:g}")]))
    elif isinstance(g, Quadratic) and isinstance(cell, Polytope):
        m = _cone_min_curvature(g, cell)
        if m is not None:
            v = max(0.0, -m)
            claims.append(ThresholdResult.exact(v, [entry(
                "restricted_quadratic", "Fact4.3",
                f"min recession curvature {m:g} of {_desc(g)}",
                f"threshold = {v:g}")]))
    elif isinstance(g, Power) and isinstance(cell, Interval1D):
        if g.odd_symmetric:
            goes_down = (g.sign > 0 and cell.reaches_neg_inf()) or \
                        (g.sign < 0 and cell.reaches_pos_inf())
        else:
            goes_down = g.sign < 0  # the cell is unbounded in some direction
        if not goes_down:
            claims.append(_exact0("restricted_bounded_below", "Fact2.7", g,
                                  "bounded below on the cell"))
        elif g.exponent > 2.0:
            claims.append(ThresholdResult.not_prox_bounded([entry(
                "restricted_power_growth", "Fact4.3",
                f"{_desc(g)} falls faster than any quadratic along the cell",
                "not prox-bounded")]))
        elif g.exponent < 2.0:
            claims.append(ThresholdResult.exact(0.0, [entry(
                "restricted_power_growth", "Fact4.3",
                f"{_desc(g)} is subquadratic", "threshold = 0")]))
    elif isinstance(g, Scale):
        inner = threshold_on_region(g.child, cell)
        claims.append(inner.scaled(g.factor, [entry(
            "scaling", "Fact4.13",
            f"factor {g.factor:g} on the restricted {_desc(g.child)}",
            f"threshold scales by {g.factor:g}")]))
    elif isinstance(g, Sum) and not any(
            isinstance(c, Indicator) for c in g.children):
        acc_expr: FuncExpr = g.children[0]
        acc = threshold_on_region(acc_expr, cell)
        for child in g.children[1:]:
            acc = _sum_pair(acc_expr, acc, child,
                            threshold_on_region(child, cell))
            acc_expr = Sum((acc_expr, child)) if not isinstance(
                acc_expr, Sum) else Sum(acc_expr.children + (child,))
        claims.append(acc)
    elif isinstance(g, (Piecewise, MaxOf)):
        pw = g if isinstance(g, Piecewise) else max_to_piecewise(g)
        if pw is not None:
            # restricting a piecewise function intersects every piece's cell
            parts: list[ThresholdResult] = []
            for sub_cell, piece in zip(pw.partition.cells, pw.pieces):
                inter = intersect_cells(sub_cell, cell)
                if inter is None:
                    continue
                parts.append(threshold_on_region(piece, inter))
            npb = [r for r in parts if r.is_npb]
            if npb:
                claims.append(ThresholdResult.not_prox_bounded([entry(
                    "piecewise_infeasible", "Prop3.2",
                    f"a constrained piece of the restricted {_desc(g)} "
                    "is not prox-bounded", "not prox-bounded")]))
            elif parts and all(r.is_resolved() for r in parts):
                lo = max(r.lo for r in parts)
                hi = max(r.hi for r in parts)
                bound = (f"threshold = {lo:g}" if lo == hi
                         else f"threshold in [{lo:g}, {hi:g}]")
                claims.append(ThresholdResult.interval(lo, hi, [entry(
                    "piecewise_max", "Thm3.3",
                    "max over pieces surviving the restriction "
                    + str([r.describe() for r in parts]), bound)]))
    return claims


def threshold_on_region(g: FuncExpr, cell: Cell) -> ThresholdResult:
    """Threshold of g + indicator(cell): analysis restricted to the cell."""
    if isinstance(cell, Interval1D) and cell.is_whole_space():
        return compute_threshold(g)
    if isinstance(cell, Polytope) and cell.is_whole_space():
        return compute_threshold(g)
    claims: list[ThresholdResult] = []
    if isinstance(cell, (Interval1D, Polytope)) and cell.is_bounded():
        claims.append(_exact0("restricted_bounded_cell", "Fact2.7", g,
                              "any function on a bounded cell is bounded below"))
        return intersect_all(claims)
    rec = attributes(g)
    if rec.bounded_below is True:
        claims.append(_exact0("bounded_below", "Fact2.7", g, "bounded below"))
    if rec.linear_lower_growth is True:
        claims.append(_exact0("linear_lower_growth", "Fact2.9", g,
                              "linear lower growth"))
    if rec.lipschitz_k is not None:
        claims.append(_exact0("lipschitz", "Prop3.1", g, "Lipschitz"))
    if rec.convex is True and isinstance(cell, (Interval1D, Polytope)):
        claims.append(_exact0("convexity", "Fact2.10", g,
                              "convex over a convex cell"))
    unrestricted = compute_threshold(g)
    if unrestricted.is_resolved():
        claims.append(ThresholdResult.interval(0.0, unrestricted.hi, [entry(
            "restriction_ordering", "Cor4.7",
            f"{_desc(g)} restricted can only raise the function",
            "threshold <= " + ("inf" if unrestricted.hi == INF
                               else f"{unrestricted.hi:g}"))]))
    claims += _restricted_structural(g, cell)
    return intersect_all(claims)


# ---------------------------------------------------------------------------
# piecewise

def constrained_piece(f: FuncExpr, i: int) -> FuncExpr:
    """Piece i (1-based) with its cell's indicator added: f_i + ind(S_i)."""
    if isinstance(f, MaxOf):
        pw = max_to_piecewise(f)
        if pw is None:
            raise ValueError("cannot determine active-set cells for this max")
        f = pw
    if not isinstance(f, Piecewise):
        raise ValueError("constrained_piece needs a piecewise (or max) function")
    if not 1 <= i <= len(f.pieces):
        raise IndexError(f"piece index {i} out of range 1..{len(f.pieces)}")
    return Sum((f.pieces[i - 1], Indicator(f.partition.cells[i - 1])))


def rule_piecewise(f: Piecewise) -> ThresholdResult:
    constrained = [compute_threshold(constrained_piece(f, i + 1))
                   for i in range(len(f.pieces))]
    claims: list[ThresholdResult] = []
    npb = [i for i, r in enumerate(constrained) if r.is_npb]
    if npb:
        claims.append(ThresholdResult.not_prox_bounded([entry(
            "piecewise_infeasible", "Prop3.2",
            f"constrained piece {npb[0] + 1} is not prox-bounded",
            "not prox-bounded")]))
        return intersect_all(claims)
    if all(r.is_resolved() for r in constrained):
        lo = max(r.lo for r in constrained)
        hi = max(r.hi for r in constrained)
        bound = (f"threshold = {lo:g}" if lo == hi
                 else f"threshold in [{lo:g}, {hi:g}]")
        claims.append(ThresholdResult.interval(lo, hi, [entry(
            "piecewise_max", "Thm3.3",
            "max over constrained pieces "
            + str([r.describe() for r in constrained]), bound)]))
    else:
        known_lo = [r.lo for r in constrained if r.is_resolved()]
        if known_lo and max(known_lo) > 0.0:
            claims.append(ThresholdResult.interval(max(known_lo), INF, [entry(
                "piecewise_max", "Thm3.3",
                "lower bound from resolved constrained pieces",
                f"threshold >= {max(known_lo):g}")]))
    unconstrained = [compute_threshold(p) for p in f.pieces]
    if all(r.is_resolved() for r in unconstrained):
        hi = max(r.hi for r in unconstrained)
        claims.append(ThresholdResult.interval(0.0, hi, [entry(
            "piecewise_upper", "Thm3.4",
            "max over unconstrained pieces "
            + str([r.describe() for r in unconstrained]),
            "threshold <= " + ("inf" if hi == INF else f"{hi:g}"))]))
    return intersect_all(claims)


# ---------------------------------------------------------------------------
# driver

@functools.cache
def compute_threshold(f: FuncExpr) -> ThresholdResult:
    """All applicable rules, intersected. Contradictions abort loudly."""
    claims = _attribute_claims(f)
    match f:
        case Constant() | Affine() | Quadratic() | Power() | AbsNorm() | \
                BoundedAtom() | Indicator():
            claims.append(atom_threshold(f))
        case Sum():
            claims.append(rule_sum(f))
            indicators = [c for c in f.children if isinstance(c, Indicator)]
            if indicators:
                cores = [c for c in f.children
                         if not isinstance(c, Indicator)]
                cell: Optional[Cell] = indicators[0].cell
                for ind in indicators[1:]:
                    cell = intersect_cells(cell, ind.cell)
                    if cell is None:
                        break
                if cell is None or not cores:
                    claims.append(_exact0(
                        "bounded_below", "Fact2.7", f,
                        "indicator-only sum is bounded below"))
                else:
                    core = cores[0] if len(cores) == 1 else Sum(tuple(cores))
                    claims.append(threshold_on_region(core, cell))
        case Scale():
            claims.append(rule_scale(f))
        case MaxOf():
            pw = max_to_piecewise(f)
            if pw is not None:
                claims.append(rule_piecewise(pw))
        case Piecewise():
            claims.append(rule_piecewise(f))
        case Compose():
            claims.append(rule_composition(f))
        case _:
            raise TypeError(f"not a FuncExpr: {f!r}")
    return intersect_all(claims)


# ---------------------------------------------------------------------------
# consequences of a resolved threshold

def minorant_curvature(f: FuncExpr) -> float:
    """Smallest curvature of a quadratic minorant of f, which is half the
    threshold. Only defined for Exact positive thresholds; the threshold-0
    case admits no such statement (-abs(x) has no affine minorant at all).
    """
    res = compute_threshold(f)
    if not res.is_exact:
        raise ValueError(f"need an Exact threshold, have {res.describe()}")
    if res.value == 0.0:
        raise ValueError("threshold 0 does not determine a minimal curvature")
    return res.value / 2.0


def certifies_full_domain(res: ThresholdResult, r: float) -> bool:
    """Whether the envelope at parameter r provably has domain R^n: true
    when r exceeds a finite certified upper bound on the threshold.
    """
    return res.is_resolved() and res.hi != INF and r > res.hi
