"""Canonical DSL text and JSON tree forms for expression trees.

serialize(f) emits text the parser maps back to a structurally equal tree for
any parser-normalized expression. to_json_tree(f) emits a plain-dict tree with
node kinds, parameters, children, and attribute tags.
"""

from __future__ import annotations

import math
from typing import Optional

from .attributes import attributes
from .nodes import (
    AbsNorm, Affine, BoundedAtom, Compose, Constant, FuncExpr, Indicator,
    MaxOf, Piecewise, Power, Quadratic, Scale, Sum, dim_of,
)
from .regions import Cell, Halfspace, Interval1D, Polytope, PredicateCell


def _fmt(v: float) -> str:
    if v == math.inf:
        return "inf"
    if v == -math.inf:
        return "-inf"
    return repr(float(v))


def _fmt_exp(p: float) -> str:
    return str(int(p)) if p == int(p) else repr(float(p))


def _join_signed(terms: list[str]) -> str:
    out = terms[0]
    for t in terms[1:]:
        if t.startswith("-"):
            out += " - " + t[1:]
        else:
            out += " + " + t
    return out


def _linear_term(coeff: float, var: str) -> Optional[str]:
    if coeff == 0.0:
        return None
    if coeff == 1.0:
        return var
    if coeff == -1.0:
        return f"-{var}"
    return f"{_fmt(coeff)}*{var}"


def _poly_text(sq: list[tuple[float, str]], lin: list[tuple[float, str]],
               const: float, always_const: bool = False) -> str:
    terms: list[str] = []
    for c, v in sq + lin:
        t = _linear_term(c, v)
        if t is not None:
            terms.append(t)
    if const != 0.0 or always_const or not terms:
        terms.append(_fmt(const))
    return _join_signed(terms)


def _vars(dim: int, var: str) -> list[str]:
    return [var] if dim == 1 else ["x", "y"]


def _interval_conds(iv: Interval1D, var: str) -> str:
    if iv.is_whole_space():
        return "all"
    if iv.lo == iv.hi:
        return f"{var} = {_fmt(iv.lo)}"
    conds = []
    if iv.lo != -math.inf:
        conds.append(f"{var} {'>=' if iv.lo_closed else '>'} {_fmt(iv.lo)}")
    if iv.hi != math.inf:
        conds.append(f"{var} {'<=' if iv.hi_closed else '<'} {_fmt(iv.hi)}")
    return ", ".join(conds)


def _halfspace_cond(h: Halfspace) -> str:
    lhs = _poly_text([], list(zip(h.coeffs, ["x", "y"])), 0.0)
    return f"{lhs} {'<' if h.strict else '<='} {_fmt(h.bound)}"


def _cell_conds(cell: Cell, var: str) -> str:
    if isinstance(cell, Interval1D):
        return _interval_conds(cell, var)
    if isinstance(cell, Polytope):
        if cell.is_whole_space():
            return "all"
        return ", ".join(_halfspace_cond(h) for h in cell.halfspaces)
    raise ValueError("cannot serialize an opaque predicate region")


def _interval_literal(iv: Interval1D) -> str:
    lo = "[" if iv.lo_closed else "("
    hi = "]" if iv.hi_closed else ")"
    return f"{lo}{_fmt(iv.lo)}, {_fmt(iv.hi)}{hi}"


def serialize(f: FuncExpr, var: str = "x") -> str:
    """Render f as canonical DSL text. var names the coordinate in 1-D."""
    match f:
        case Constant():
            return _fmt(f.value)
        case Affine():
            names = _vars(len(f.coeffs), var)
            return _poly_text([], list(zip(f.coeffs, names)), f.offset)
        case Quadratic():
            n = len(f.lin)
            names = _vars(n, var)
            sq = [(f.quad[0][0] / 2.0, f"{names[0]}^2")]
            if n == 2:
                sq.append((f.quad[0][1], f"{names[0]}*{names[1]}"))
                sq.append((f.quad[1][1] / 2.0, f"{names[1]}^2"))
            return _poly_text(sq, list(zip(f.lin, names)), f.const)
        case Power():
            if f.dim == 2:
                core = "norm(x, y)"
                base = core if f.exponent == 1 else f"{core}^{_fmt_exp(f.exponent)}"
            else:
                p_int = f.exponent == int(f.exponent)
                as_var = f.odd_symmetric or (p_int and int(f.exponent) % 2 == 0)
                if as_var:
                    base = f"{var}^{_fmt_exp(f.exponent)}"
                elif f.exponent == 1:
                    base = f"abs({var})"
                else:
                    base = f"abs({var})^{_fmt_exp(f.exponent)}"
            if f.sign > 0:
                return base
            return f"-({base})" if "^" in base and not base.startswith(
                ("abs", "norm")) else f"-{base}"
        case AbsNorm():
            return f"abs({var})" if f.dim == 1 else "norm(x, y)"
        case BoundedAtom():
            text = f"{f.name}({var})"
            return text if f.sign > 0 else f"-{text}"
        case Indicator():
            if isinstance(f.cell, Interval1D):
                return f"ind{_interval_literal(f.cell)}"
            return f"ind{{{_cell_conds(f.cell, var)}}}"
        case Sum():
            return _join_signed([serialize(c, var) for c in f.children])
        case Scale():
            return f"scale({_fmt(f.factor)}, {serialize(f.child, var)})"
        case MaxOf():
            return "max(" + ", ".join(serialize(c, var) for c in f.children) + ")"
        case Piecewise():
            parts = [f"{_cell_conds(cell, var)}: {serialize(piece, var)}"
                     for cell, piece in zip(f.partition.cells, f.pieces)]
            return "piecewise{" + "; ".join(parts) + "}"
        case Compose():
            inner_var = var if dim_of(f.inner) == 1 else "x"
            return (f"compose({serialize(f.outer, 'u')}, "
                    f"{serialize(f.inner, inner_var)})")
    raise TypeError(f"not a FuncExpr: {f!r}")


def _json_num(v: float):
    if v == math.inf:
        return "inf"
    if v == -math.inf:
        return "-inf"
    return float(v)


def _cell_json(cell: Cell) -> dict:
    if isinstance(cell, Interval1D):
        return {"type": "interval", "lo": _json_num(cell.lo),
                "hi": _json_num(cell.hi), "lo_closed": cell.lo_closed,
                "hi_closed": cell.hi_closed}
    if isinstance(cell, Polytope):
        return {"type": "polytope", "dim": cell.dim, "halfspaces": [
            {"coeffs": list(h.coeffs), "bound": _json_num(h.bound),
             "strict": h.strict} for h in cell.halfspaces]}
    assert isinstance(cell, PredicateCell)
    return {"type": "predicate", "dim": cell.dim, "label": cell.label}


def to_json_tree(f: FuncExpr) -> dict:
    """Plain-dict tree: kind, parameters, children, and attribute tags."""
    out: dict = {"kind": type(f).__name__, "dim": dim_of(f)}
    match f:
        case Constant():
            out["value"] = f.value
        case Affine():
            out["coeffs"] = list(f.coeffs)
            out["offset"] = f.offset
        case Quadratic():
            out["quad"] = [list(row) for row in f.quad]
            out["lin"] = list(f.lin)
            out["const"] = f.const
        case Power():
            out["exponent"] = f.exponent
            out["sign"] = f.sign
            out["odd_symmetric"] = f.odd_symmetric
        case AbsNorm():
            pass
        case BoundedAtom():
            out["name"] = f.name
            out["sign"] = f.sign
        case Indicator():
            out["cell"] = _cell_json(f.cell)
        case Sum() | MaxOf():
            out["children"] = [to_json_tree(c) for c in f.children]
        case Scale():
            out["factor"] = f.factor
            out["children"] = [to_json_tree(f.child)]
        case Piecewise():
            out["cells"] = [_cell_json(c) for c in f.partition.cells]
            out["children"] = [to_json_tree(p) for p in f.pieces]
        case Compose():
            out["children"] = [to_json_tree(f.outer), to_json_tree(f.inner)]
    out["attributes"] = attributes(f).as_dict()
    return out
