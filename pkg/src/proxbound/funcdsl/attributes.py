"""Conservative attribute propagation over expression trees.

Attributes are three-valued: True and False are proven claims, None means
unknown. Propagation never guesses True; when a rule cannot conclude anything
sound it leaves None.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .nodes import (
    AbsNorm, Affine, BoundedAtom, Compose, Constant, FuncExpr, Indicator,
    MaxOf, Piecewise, Power, Quadratic, Scale, Sum, dim_of,
)
from .regions import Interval1D, Polytope


@dataclass(frozen=True)
class AttributeRecord:
    """Sound structural facts about a function.

    lipschitz_k is a global Lipschitz constant when known. affine_params is
    (coeffs, offset) when the function is affine (or constant). The curvature
    field is the least eigenvalue of Q for quadratic functions.
    """

    convex: Optional[bool] = None
    bounded_below: Optional[bool] = None
    bounded_above: Optional[bool] = None
    lipschitz_k: Optional[float] = None
    affine_params: Optional[tuple[tuple[float, ...], float]] = None
    quadratic_min_curvature: Optional[float] = None
    linear_lower_growth: Optional[bool] = None
    affine_majorant: Optional[bool] = None
    finite_everywhere: Optional[bool] = None

    def as_dict(self) -> dict:
        return {
            "convex": self.convex,
            "bounded_below": self.bounded_below,
            "bounded_above": self.bounded_above,
            "lipschitz_K": self.lipschitz_k,
            "affine_params": list(self.affine_params[0]) + [self.affine_params[1]]
            if self.affine_params is not None else None,
            "quadratic_min_curvature": self.quadratic_min_curvature,
            "linear_lower_growth": self.linear_lower_growth,
            "affine_majorant": self.affine_majorant,
            "finite_everywhere": self.finite_everywhere,
        }


def _finish(rec: AttributeRecord) -> AttributeRecord:
    # derived implications that hold regardless of node kind
    if rec.affine_params is not None and rec.convex is None:
        rec = replace(rec, convex=True)
    if rec.lipschitz_k is not None and rec.linear_lower_growth is not True:
        rec = replace(rec, linear_lower_growth=True)
    if rec.bounded_below is True and rec.linear_lower_growth is not True:
        rec = replace(rec, linear_lower_growth=True)
    if rec.bounded_above is True and rec.affine_majorant is not True:
        rec = replace(rec, affine_majorant=True)
    if rec.affine_params is not None and rec.affine_majorant is not True:
        rec = replace(rec, affine_majorant=True)
    return rec


def _all_true(vals) -> Optional[bool]:
    vals = list(vals)
    if all(v is True for v in vals):
        return True
    return None


def _quadratic_bounded_below(f: Quadratic) -> bool:
    lo, _ = f.eigenvalues()
    if lo > 0:
        return True
    if lo < 0:
        return False
    # PSD with a flat direction: bounded below iff lin is in range(Q)
    q = f.q_matrix()
    b = np.asarray(f.lin)
    sol, residuals, *_ = np.linalg.lstsq(q, b, rcond=None)
    return bool(np.allclose(q @ sol, b, atol=1e-9))


@functools.cache
def attributes(f: FuncExpr) -> AttributeRecord:
    """Compute the attribute record for f. Results are cached per node."""
    match f:
        case Constant():
            return _finish(AttributeRecord(
                convex=True, bounded_below=True, bounded_above=True,
                lipschitz_k=0.0, affine_params=((0.0,) * f.dim, f.value),
                linear_lower_growth=True, finite_everywhere=True))
        case Affine():
            return _finish(AttributeRecord(
                convex=True, bounded_below=False, bounded_above=False,
                lipschitz_k=float(np.linalg.norm(f.coeffs)),
                affine_params=(f.coeffs, f.offset),
                linear_lower_growth=True, finite_everywhere=True))
        case Quadratic():
            lo, hi = f.eigenvalues()
            bb = _quadratic_bounded_below(f)
            ba = _quadratic_bounded_below(
                Quadratic(tuple(tuple(-v for v in row) for row in f.quad),
                          tuple(-v for v in f.lin), 0.0))
            return _finish(AttributeRecord(
                convex=lo >= 0, bounded_below=bb, bounded_above=ba,
                quadratic_min_curvature=lo,
                linear_lower_growth=True if lo >= 0 else False,
                affine_majorant=True if hi <= 0 else False,
                finite_everywhere=True))
        case Power():
            p = f.exponent
            if f.odd_symmetric:
                return _finish(AttributeRecord(
                    convex=False, bounded_below=False, bounded_above=False,
                    linear_lower_growth=False, affine_majorant=False,
                    finite_everywhere=True))
            if f.sign > 0:
                return _finish(AttributeRecord(
                    convex=True if p >= 1 else None, bounded_below=True,
                    bounded_above=False,
                    lipschitz_k=1.0 if p == 1 else None,
                    linear_lower_growth=True, finite_everywhere=True))
            return _finish(AttributeRecord(
                convex=False, bounded_below=False, bounded_above=True,
                lipschitz_k=1.0 if p == 1 else None,
                linear_lower_growth=True if p == 1 else False,
                finite_everywhere=True))
        case AbsNorm():
            return _finish(AttributeRecord(
                convex=True, bounded_below=True, bounded_above=False,
                lipschitz_k=1.0, linear_lower_growth=True, finite_everywhere=True))
        case BoundedAtom():
            lo, hi, k = f.declared()
            return _finish(AttributeRecord(
                convex=False, bounded_below=True, bounded_above=True,
                lipschitz_k=k, linear_lower_growth=True, finite_everywhere=True))
        case Indicator():
            whole = f.cell.is_whole_space()
            cvx = True if isinstance(f.cell, (Interval1D, Polytope)) else None
            return _finish(AttributeRecord(
                convex=cvx, bounded_below=True, bounded_above=whole,
                lipschitz_k=0.0 if whole else None,
                linear_lower_growth=True, finite_everywhere=whole))
        case Sum():
            recs = [attributes(c) for c in f.children]
            bb = _all_true(r.bounded_below for r in recs)
            if bb is None:
                # one child dives while every other stays below a ceiling
                for i, r in enumerate(recs):
                    if r.bounded_below is False and all(
                            recs[j].bounded_above is True
                            for j in range(len(recs)) if j != i):
                        bb = False
                        break
            ba = _all_true(r.bounded_above for r in recs)
            if ba is None:
                for i, r in enumerate(recs):
                    if r.bounded_above is False and all(
                            recs[j].bounded_below is True
                            for j in range(len(recs)) if j != i):
                        ba = False
                        break
            ks = [r.lipschitz_k for r in recs]
            k = float(sum(ks)) if all(v is not None for v in ks) else None
            aff = None
            if all(r.affine_params is not None for r in recs):
                coeffs = tuple(sum(r.affine_params[0][i] for r in recs)
                               for i in range(dim_of(f)))
                aff = (coeffs, sum(r.affine_params[1] for r in recs))
            return _finish(AttributeRecord(
                convex=_all_true(r.convex for r in recs),
                bounded_below=bb, bounded_above=ba, lipschitz_k=k,
                affine_params=aff,
                linear_lower_growth=_all_true(r.linear_lower_growth for r in recs),
                affine_majorant=_all_true(r.affine_majorant for r in recs),
                finite_everywhere=_all_true(r.finite_everywhere for r in recs)))
        case Scale():
            r = attributes(f.child)
            if f.factor == 0.0:
                return _finish(AttributeRecord(
                    convex=r.convex if r.convex is not None else None,
                    bounded_below=True,
                    bounded_above=r.finite_everywhere,
                    lipschitz_k=0.0 if r.finite_everywhere else None,
                    linear_lower_growth=True,
                    finite_everywhere=r.finite_everywhere))
            aff = None
            if r.affine_params is not None:
                aff = (tuple(f.factor * c for c in r.affine_params[0]),
                       f.factor * r.affine_params[1])
            return _finish(AttributeRecord(
                convex=r.convex, bounded_below=r.bounded_below,
                bounded_above=r.bounded_above,
                lipschitz_k=None if r.lipschitz_k is None else f.factor * r.lipschitz_k,
                affine_params=aff,
                quadratic_min_curvature=None if r.quadratic_min_curvature is None
                else f.factor * r.quadratic_min_curvature,
                linear_lower_growth=r.linear_lower_growth,
                affine_majorant=r.affine_majorant,
                finite_everywhere=r.finite_everywhere))
        case MaxOf():
            recs = [attributes(c) for c in f.children]
            ks = [r.lipschitz_k for r in recs]
            bb = True if any(r.bounded_below is True for r in recs) else \
                _all_true(r.bounded_below for r in recs)
            growth = True if any(r.linear_lower_growth is True for r in recs) else None
            return _finish(AttributeRecord(
                convex=_all_true(r.convex for r in recs),
                bounded_below=bb,
                bounded_above=_all_true(r.bounded_above for r in recs),
                lipschitz_k=float(max(ks)) if all(v is not None for v in ks) else None,
                linear_lower_growth=growth,
                finite_everywhere=_all_true(r.finite_everywhere for r in recs)))
        case Piecewise():
            recs = [attributes(p) for p in f.pieces]
            return _finish(AttributeRecord(
                convex=None,
                bounded_below=_all_true(r.bounded_below for r in recs),
                bounded_above=_all_true(r.bounded_above for r in recs),
                linear_lower_growth=_all_true(r.linear_lower_growth for r in recs),
                finite_everywhere=_all_true(r.finite_everywhere for r in recs)))
        case Compose():
            ro, ri = attributes(f.outer), attributes(f.inner)
            bb = True if ro.bounded_below is True else None
            ba = None
            if ro.bounded_above is True and ri.finite_everywhere is True:
                ba = True
            if ro.affine_params is not None:
                a = ro.affine_params[0][0]
                if a == 0.0:
                    bb = True
                    ba = True if ri.finite_everywhere is True else ba
                elif a > 0:
                    bb = True if ri.bounded_below is True else bb
                    ba = True if (ri.bounded_above is True
                                  and ri.finite_everywhere is True) else ba
                else:
                    bb = True if (ri.bounded_above is True
                                  and ri.finite_everywhere is True) else bb
                    ba = True if ri.bounded_below is True and \
                        ri.finite_everywhere is True else ba
            k = None
            if ro.lipschitz_k is not None and ri.lipschitz_k is not None:
                k = ro.lipschitz_k * ri.lipschitz_k
            cv = True if (ro.convex is True
                          and ri.affine_params is not None) else None
            return _finish(AttributeRecord(
                convex=cv, bounded_below=bb, bounded_above=ba, lipschitz_k=k,
                linear_lower_growth=True if (bb is True or k is not None) else None,
                finite_everywhere=_all_true([ro.finite_everywhere,
                                             ri.finite_everywhere])))
    raise TypeError(f"not a FuncExpr: {f!r}")
