"""Text DSL for function expressions.

Grammar (whitespace-insensitive):

    expr      := term (('+' | '-') term)*
    term      := factor (('*' | '/') factor)*
    factor    := ('-' | '+') factor | base ('^' number)?
    base      := number | var | call | 'ind' region | piecewise | '(' expr ')'
    call      := ('abs'|'sin'|'cos'|'atan') '(' expr ')'
               | 'norm' '(' expr ',' expr ')'
               | 'max' '(' expr (',' expr)+ ')'
               | 'compose' '(' expr ',' expr ')'
               | 'scale' '(' expr ',' expr ')'
    region    := ('['|'(') bound ',' bound (']'|')')  |  '{' conds '}'
    piecewise := 'piecewise' '{' conds ':' expr (';' conds ':' expr)* ';'? '}'
    conds     := 'all' | cond (',' cond)*
    cond      := expr ('<'|'<='|'>'|'>='|'='|'==') expr   (affine sides only)

Variables: x (coordinate 0), y (coordinate 1), u (coordinate 0, conventional
for the outer argument of compose; cannot be mixed with x or y). Polynomial
arithmetic up to total degree 2 is folded exactly into a single atom; other
subexpressions stay structural. All errors carry a character position.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Optional

from .nodes import (
    AbsNorm, Affine, BoundedAtom, Compose, Constant, FuncExpr, Indicator,
    MaxOf, Piecewise, Power, Quadratic, Scale, Sum, _BOUNDED_ATOMS,
    _coordinate_selector, dim_of, negate, promote,
)
from .regions import (
    Cell, Halfspace, Interval1D, PartitionError, Polytope, RegionPartition,
    interval_to_polytope,
)

INF = math.inf


class ParseError(ValueError):
    """Syntax or structural error in DSL text, with a character position."""

    def __init__(self, message: str, pos: int):
        self.message = message
        self.pos = pos
        super().__init__(f"syntax error at position {pos}: {message}")


_TOKEN_RE = re.compile(
    r"(?P<num>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op><=|>=|==|[+\-*/^(){}\[\],;:<>=])"
    r"|(?P<ws>\s+)"
)

_KEYWORDS = {"abs", "sin", "cos", "atan", "norm", "max", "piecewise",
             "compose", "scale", "ind", "all", "inf", "x", "y", "u"}


@dataclass(frozen=True)
class _Token:
    kind: str  # "num" | "ident" | "op" | "end"
    text: str
    pos: int


def _tokenize(text: str) -> list[_Token]:
    tokens: list[_Token] = []
    i = 0
    while i < len(text):
        m = _TOKEN_RE.match(text, i)
        if m is None:
            raise ParseError(f"unexpected character {text[i]!r}", i)
        if m.lastgroup != "ws":
            tokens.append(_Token(m.lastgroup, m.group(), i))
        i = m.end()
    tokens.append(_Token("end", "", len(text)))
    return tokens


# ---------------------------------------------------------------------------
# exact polynomials of total degree <= 2, used to fold arithmetic into atoms

class _Poly:
    """Polynomial in x, y as {(i, j): coeff} with zero coefficients pruned."""

    __slots__ = ("terms",)

    def __init__(self, terms: dict[tuple[int, int], float]):
        self.terms = {k: float(v) for k, v in terms.items() if v != 0.0}

    @staticmethod
    def const(c: float) -> "_Poly":
        return _Poly({(0, 0): c})

    @staticmethod
    def var(coord: int) -> "_Poly":
        return _Poly({(1, 0) if coord == 0 else (0, 1): 1.0})

    @property
    def degree(self) -> int:
        return max((i + j for i, j in self.terms), default=0)

    @property
    def ndim(self) -> int:
        return 2 if any(j > 0 for _, j in self.terms) else 1

    def is_zero(self) -> bool:
        return not self.terms

    def is_const(self) -> bool:
        return self.degree == 0

    def const_value(self) -> float:
        return self.terms.get((0, 0), 0.0)

    def coeff(self, i: int, j: int = 0) -> float:
        return self.terms.get((i, j), 0.0)

    def __add__(self, other: "_Poly") -> "_Poly":
        out = dict(self.terms)
        for k, v in other.terms.items():
            out[k] = out.get(k, 0.0) + v
        return _Poly(out)

    def __neg__(self) -> "_Poly":
        return _Poly({k: -v for k, v in self.terms.items()})

    def mul(self, other: "_Poly") -> Optional["_Poly"]:
        """Product, or None when the result exceeds total degree 2."""
        out: dict[tuple[int, int], float] = {}
        for (i1, j1), v1 in self.terms.items():
            for (i2, j2), v2 in other.terms.items():
                if v1 * v2 != 0.0 and i1 + i2 + j1 + j2 > 2:
                    return None
                k = (i1 + i2, j1 + j2)
                out[k] = out.get(k, 0.0) + v1 * v2
        return _Poly(out)

    def to_expr(self, dim: Optional[int] = None) -> FuncExpr:
        n = max(self.ndim, dim or 1)
        if self.degree == 0:
            return Constant(self.const_value(), dim=n)
        if self.degree == 1:
            coeffs = tuple(self.coeff(*k) for k in [(1, 0), (0, 1)][:n])
            return Affine(coeffs, self.coeff(0, 0))
        q11, q22, q12 = 2 * self.coeff(2, 0), 2 * self.coeff(0, 2), self.coeff(1, 1)
        quad = ((q11, q12), (q12, q22)) if n == 2 else ((q11,),)
        lin = tuple(self.coeff(*k) for k in [(1, 0), (0, 1)][:n])
        return Quadratic(quad, lin, self.coeff(0, 0))


@dataclass
class _Val:
    """Parse-time value: an exact polynomial or an opaque expression node."""

    pos: int
    poly: Optional[_Poly] = None
    node: Optional[FuncExpr] = None
    uses_u: bool = False
    uses_xy: bool = False

    @property
    def dim(self) -> int:
        return self.poly.ndim if self.poly is not None else dim_of(self.node)

    def to_expr(self, dim: Optional[int] = None) -> FuncExpr:
        if self.poly is not None:
            return self.poly.to_expr(dim)
        if dim is not None and dim_of(self.node) < dim:
            return promote(self.node, dim)
        return self.node


def _merge_flags(parser: "_Parser", pos: int, *vals: _Val) -> tuple[bool, bool]:
    uses_u = any(v.uses_u for v in vals)
    uses_xy = any(v.uses_xy for v in vals)
    if uses_u and uses_xy:
        raise ParseError("variable u cannot be mixed with x or y", pos)
    return uses_u, uses_xy


# ---------------------------------------------------------------------------

class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    # -- token helpers ------------------------------------------------------

    def peek(self) -> _Token:
        return self.tokens[self.i]

    def advance(self) -> _Token:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def at_op(self, *ops: str) -> bool:
        tok = self.peek()
        return tok.kind == "op" and tok.text in ops

    def expect_op(self, op: str) -> _Token:
        tok = self.peek()
        if tok.kind != "op" or tok.text != op:
            shown = tok.text if tok.kind != "end" else "end of input"
            raise ParseError(f"expected {op!r}, found {shown!r}", tok.pos)
        return self.advance()

    def fail(self, message: str, pos: Optional[int] = None) -> ParseError:
        return ParseError(message, self.peek().pos if pos is None else pos)

    # -- entry --------------------------------------------------------------

    def parse(self) -> FuncExpr:
        if self.peek().kind == "end":
            raise self.fail("empty expression")
        val = self.expr()
        tok = self.peek()
        if tok.kind != "end":
            raise self.fail(f"unexpected trailing input {tok.text!r}", tok.pos)
        return val.to_expr()

    # -- grammar ------------------------------------------------------------

    def expr(self) -> _Val:
        start = self.peek().pos
        items: list[_Val] = [self.term()]
        while self.at_op("+", "-"):
            op = self.advance()
            t = self.term()
            items.append(self.negated(t, op.pos) if op.text == "-" else t)
        if len(items) == 1:
            return items[0]
        uses_u, uses_xy = _merge_flags(self, start, *items)

        poly = _Poly({})
        first_poly_slot: Optional[int] = None
        ordered: list[Optional[_Val]] = []
        for v in items:
            if v.poly is not None:
                poly = poly + v.poly
                if first_poly_slot is None:
                    first_poly_slot = len(ordered)
                    ordered.append(None)  # placeholder for the merged poly
            else:
                ordered.append(v)
        opaque = [v for v in ordered if v is not None]
        if not opaque:
            return _Val(start, poly=poly, uses_u=uses_u, uses_xy=uses_xy)
        if poly.is_zero():
            ordered = opaque
        else:
            ordered[first_poly_slot] = _Val(start, poly=poly,
                                            uses_u=uses_u, uses_xy=uses_xy)
        if len(ordered) == 1:
            only = ordered[0]
            return _Val(start, poly=only.poly, node=only.node,
                        uses_u=uses_u, uses_xy=uses_xy)
        dim = max(v.dim for v in ordered)
        children = tuple(v.to_expr(dim) for v in ordered)
        return _Val(start, node=Sum(children), uses_u=uses_u, uses_xy=uses_xy)

    def term(self) -> _Val:
        left = self.factor()
        while self.at_op("*", "/"):
            op = self.advance()
            right = self.factor()
            left = (self.multiply(left, right, op.pos) if op.text == "*"
                    else self.divide(left, right, op.pos))
        return left

    def factor(self) -> _Val:
        if self.at_op("-"):
            tok = self.advance()
            return self.negated(self.factor(), tok.pos)
        if self.at_op("+"):
            self.advance()
            return self.factor()
        base = self.base()
        if self.at_op("^"):
            caret = self.advance()
            num = self.peek()
            if num.kind != "num":
                raise self.fail("expected a numeric exponent", num.pos)
            self.advance()
            return self.power(base, float(num.text), caret.pos)
        return base

    def base(self) -> _Val:
        tok = self.peek()
        if tok.kind == "num":
            self.advance()
            return _Val(tok.pos, poly=_Poly.const(float(tok.text)))
        if tok.kind == "op" and tok.text == "(":
            self.advance()
            inner = self.expr()
            self.expect_op(")")
            return inner
        if tok.kind == "ident":
            name = tok.text
            if name not in _KEYWORDS:
                raise self.fail(f"unknown identifier {name!r}", tok.pos)
            if name in ("x", "u"):
                self.advance()
                return _Val(tok.pos, poly=_Poly.var(0), uses_u=(name == "u"),
                            uses_xy=(name == "x"))
            if name == "y":
                self.advance()
                return _Val(tok.pos, poly=_Poly.var(1), uses_xy=True)
            if name in ("abs", "sin", "cos", "atan"):
                return self.unary_call()
            if name == "norm":
                return self.norm_call()
            if name == "max":
                return self.max_call()
            if name == "compose":
                return self.compose_call()
            if name == "scale":
                return self.scale_call()
            if name == "ind":
                return self.indicator()
            if name == "piecewise":
                return self.piecewise()
            raise self.fail(f"{name!r} is not valid here", tok.pos)
        shown = tok.text if tok.kind != "end" else "end of input"
        raise self.fail(f"unexpected {shown!r}", tok.pos)

    # -- operators ----------------------------------------------------------

    def negated(self, v: _Val, pos: int) -> _Val:
        if v.poly is not None:
            return _Val(v.pos, poly=-v.poly, uses_u=v.uses_u, uses_xy=v.uses_xy)
        try:
            return _Val(v.pos, node=negate(v.node), uses_u=v.uses_u,
                        uses_xy=v.uses_xy)
        except ValueError as exc:
            raise ParseError(str(exc), pos) from exc

    def multiply(self, a: _Val, b: _Val, pos: int) -> _Val:
        uses_u, uses_xy = _merge_flags(self, pos, a, b)
        if a.poly is not None and b.poly is not None:
            p = a.poly.mul(b.poly)
            if p is None:
                raise ParseError(
                    "product exceeds polynomial degree 2; use compose or abs", pos)
            return _Val(a.pos, poly=p, uses_u=uses_u, uses_xy=uses_xy)
        if a.poly is None and b.poly is None:
            raise ParseError("cannot multiply two non-polynomial expressions", pos)
        const, other = (a, b) if a.poly is not None else (b, a)
        if not const.poly.is_const():
            raise ParseError(
                "an expression can only be multiplied by a constant", pos)
        c = const.poly.const_value()
        if c == 1.0:
            node = other.node
        elif c == -1.0:
            node = self.negated(other, pos).node
        elif c >= 0.0:
            node = Scale(c, other.node)
        else:
            node = Scale(-c, self.negated(other, pos).node)
        return _Val(a.pos, node=node, uses_u=uses_u, uses_xy=uses_xy)

    def divide(self, a: _Val, b: _Val, pos: int) -> _Val:
        if b.poly is None or not b.poly.is_const():
            raise ParseError("division is only allowed by a nonzero constant", pos)
        c = b.poly.const_value()
        if c == 0.0:
            raise ParseError("division by zero", pos)
        inv = _Val(b.pos, poly=_Poly.const(1.0 / c))
        return self.multiply(a, inv, pos)

    def power(self, base: _Val, p: float, pos: int) -> _Val:
        if p < 1 and not (base.poly is not None and base.poly.is_const()):
            raise ParseError("exponent must be >= 1", pos)
        is_int = p == int(p)
        if base.poly is not None:
            poly = base.poly
            if poly.is_const():
                try:
                    c = poly.const_value() ** p
                except (OverflowError, ZeroDivisionError) as exc:
                    raise ParseError(str(exc), pos) from exc
                if isinstance(c, complex):
                    raise ParseError(
                        "fractional power of a negative constant", pos)
                return _Val(base.pos, poly=_Poly.const(c))
            if not is_int:
                raise ParseError(
                    "non-integer powers need abs(...) or norm(...) as the base", pos)
            k = int(p)
            if poly.degree * k <= 2:
                acc = _Poly.const(1.0)
                for _ in range(k):
                    acc = acc.mul(poly)
                return _Val(base.pos, poly=acc, uses_u=base.uses_u,
                            uses_xy=base.uses_xy)
            if poly.degree == 1:
                outer = Power(float(k), 1, odd_symmetric=(k % 2 == 1))
                if poly.terms == {(1, 0): 1.0}:
                    node: FuncExpr = outer  # bare x^k stays an atom
                elif poly.terms == {(0, 1): 1.0}:
                    node = Compose(outer, _coordinate_selector(2, 1))
                else:
                    node = Compose(outer, base.to_expr())
                return _Val(base.pos, node=node, uses_u=base.uses_u,
                            uses_xy=base.uses_xy)
            raise ParseError(
                "powers above 2 of a quadratic expression are not supported", pos)
        node = base.node
        if isinstance(node, AbsNorm):
            if p == 2:
                if node.dim == 1:
                    return _Val(base.pos, poly=_Poly({(2, 0): 1.0}),
                                uses_u=base.uses_u, uses_xy=base.uses_xy)
                return _Val(base.pos, poly=_Poly({(2, 0): 1.0, (0, 2): 1.0}),
                            uses_u=base.uses_u, uses_xy=base.uses_xy)
            return _Val(base.pos, node=Power(p, 1, dim=node.dim),
                        uses_u=base.uses_u, uses_xy=base.uses_xy)
        if isinstance(node, Compose) and isinstance(node.outer, AbsNorm):
            # abs(g)^p becomes a single power (or square) of g
            outer = (Quadratic(((2.0,),), (0.0,), 0.0) if p == 2
                     else Power(p, 1, dim=1))
            return _Val(base.pos, node=Compose(outer, node.inner),
                        uses_u=base.uses_u, uses_xy=base.uses_xy)
        raise ParseError("only abs(...), norm(...), variables, and polynomial "
                         "expressions can be raised to a power", pos)

    # -- calls --------------------------------------------------------------

    def unary_call(self) -> _Val:
        name_tok = self.advance()
        name = name_tok.text
        self.expect_op("(")
        arg = self.expr()
        self.expect_op(")")
        bare = (arg.poly is not None and arg.poly.terms in
                ({(1, 0): 1.0}, {(0, 1): 1.0}))
        coord = 1 if (arg.poly is not None and arg.poly.terms ==
                      {(0, 1): 1.0}) else 0
        if name == "abs":
            outer: FuncExpr = AbsNorm(1)
        else:
            outer = BoundedAtom(name)
        if bare and coord == 0:
            return _Val(name_tok.pos, node=outer, uses_u=arg.uses_u,
                        uses_xy=arg.uses_xy)
        if bare and coord == 1:
            node = Compose(outer, _coordinate_selector(2, 1))
            return _Val(name_tok.pos, node=node, uses_xy=True)
        return _Val(name_tok.pos, node=Compose(outer, arg.to_expr()),
                    uses_u=arg.uses_u, uses_xy=arg.uses_xy)

    def norm_call(self) -> _Val:
        name_tok = self.advance()
        self.expect_op("(")
        a = self.expr()
        self.expect_op(",")
        b = self.expr()
        self.expect_op(")")
        ok = (a.poly is not None and a.poly.terms == {(1, 0): 1.0}
              and b.poly is not None and b.poly.terms == {(0, 1): 1.0})
        if not ok:
            raise ParseError("norm expects exactly norm(x, y)", name_tok.pos)
        return _Val(name_tok.pos, node=AbsNorm(2), uses_xy=True)

    def max_call(self) -> _Val:
        name_tok = self.advance()
        self.expect_op("(")
        args = [self.expr()]
        while self.at_op(","):
            self.advance()
            args.append(self.expr())
        self.expect_op(")")
        if len(args) < 2:
            raise ParseError("max needs at least two arguments", name_tok.pos)
        uses_u, uses_xy = _merge_flags(self, name_tok.pos, *args)
        dim = max(v.dim for v in args)
        node = MaxOf(tuple(v.to_expr(dim) for v in args))
        return _Val(name_tok.pos, node=node, uses_u=uses_u, uses_xy=uses_xy)

    def compose_call(self) -> _Val:
        name_tok = self.advance()
        self.expect_op("(")
        outer_val = self.expr()
        self.expect_op(",")
        inner_val = self.expr()
        self.expect_op(")")
        if outer_val.dim != 1:
            raise ParseError("the outer function of compose must be "
                             "one-dimensional", name_tok.pos)
        node = Compose(outer_val.to_expr(), inner_val.to_expr())
        return _Val(name_tok.pos, node=node, uses_u=inner_val.uses_u,
                    uses_xy=inner_val.uses_xy)

    def scale_call(self) -> _Val:
        name_tok = self.advance()
        self.expect_op("(")
        lam_val = self.expr()
        self.expect_op(",")
        child = self.expr()
        self.expect_op(")")
        if lam_val.poly is None or not lam_val.poly.is_const():
            raise ParseError("scale factor must be a constant", name_tok.pos)
        lam = lam_val.poly.const_value()
        if lam < 0:
            raise ParseError("scale factor must be nonnegative", name_tok.pos)
        node = Scale(lam, child.to_expr())
        return _Val(name_tok.pos, node=node, uses_u=child.uses_u,
                    uses_xy=child.uses_xy)

    # -- indicators, conditions, piecewise ----------------------------------

    def indicator(self) -> _Val:
        name_tok = self.advance()
        if self.at_op("{"):
            self.advance()
            cell, uses_xy = self.condition_cell(name_tok.pos)
            self.expect_op("}")
        else:
            cell = self.interval_literal()
            uses_xy = False
        try:
            node = Indicator(cell)
        except ValueError as exc:
            raise ParseError(str(exc), name_tok.pos) from exc
        return _Val(name_tok.pos, node=node, uses_xy=uses_xy)

    def interval_literal(self) -> Interval1D:
        tok = self.peek()
        if not self.at_op("[", "("):
            raise self.fail("expected an interval like [a, b) after ind")
        lo_closed = tok.text == "["
        self.advance()
        lo = self.bound_number()
        self.expect_op(",")
        hi = self.bound_number()
        closer = self.peek()
        if not self.at_op("]", ")"):
            raise self.fail("expected ')' or ']' closing the interval")
        hi_closed = closer.text == "]"
        self.advance()
        try:
            return Interval1D(lo, hi, lo_closed, hi_closed)
        except ValueError as exc:
            raise ParseError(str(exc), tok.pos) from exc

    def bound_number(self) -> float:
        sign = 1.0
        if self.at_op("-"):
            self.advance()
            sign = -1.0
        tok = self.peek()
        if tok.kind == "ident" and tok.text == "inf":
            self.advance()
            return sign * INF
        if tok.kind == "num":
            self.advance()
            return sign * float(tok.text)
        raise self.fail("expected a number or inf")

    def affine_side(self) -> tuple[_Poly, int]:
        start = self.peek().pos
        v = self.expr()
        if v.poly is None or v.poly.degree > 1:
            raise ParseError("conditions must be linear in x and y", start)
        return v.poly, start

    def single_condition(self) -> tuple[list[tuple[_Poly, bool]], bool]:
        """One inequality as constraints poly <= 0 (or < 0 when strict)."""
        lhs, pos = self.affine_side()
        tok = self.peek()
        if not self.at_op("<", "<=", ">", ">=", "=", "=="):
            raise self.fail("expected a comparison operator in condition")
        op = self.advance().text
        rhs, _ = self.affine_side()
        diff = lhs + (-rhs)
        if diff.degree == 0:
            raise ParseError("condition does not involve a variable", pos)
        uses_y = any(j > 0 for _, j in diff.terms)
        if op in ("<", "<="):
            return [(diff, op == "<")], uses_y
        if op in (">", ">="):
            return [(-diff, op == ">")], uses_y
        return [(diff, False), (-diff, False)], uses_y  # equality

    def condition_cell(self, pos: int) -> tuple[Cell, bool]:
        tok = self.peek()
        if tok.kind == "ident" and tok.text == "all":
            self.advance()
            return Interval1D(), False
        constraints: list[tuple[_Poly, bool]] = []
        uses_y = False
        cons, uy = self.single_condition()
        constraints += cons
        uses_y |= uy
        while self.at_op(","):
            self.advance()
            cons, uy = self.single_condition()
            constraints += cons
            uses_y |= uy
        if uses_y:
            halfspaces = tuple(
                Halfspace((p.coeff(1, 0), p.coeff(0, 1)),
                          -p.coeff(0, 0), strict=strict)
                for p, strict in constraints)
            return Polytope(halfspaces, dim=2), True
        cell: Optional[Interval1D] = Interval1D()
        for p, strict in constraints:
            a, c = p.coeff(1, 0), -p.coeff(0, 0)
            # a*x <= c  (or strict)
            if a > 0:
                piece = Interval1D(hi=c / a, hi_closed=not strict)
            else:
                piece = Interval1D(lo=c / a, lo_closed=not strict)
            cell = cell.intersect(piece) if cell is not None else None
        if cell is None or cell.is_empty():
            raise ParseError("condition describes an empty region", pos)
        return cell, False

    def piecewise(self) -> _Val:
        name_tok = self.advance()
        self.expect_op("{")
        cells: list[Cell] = []
        pieces: list[_Val] = []
        conds_use_y = False
        while True:
            cell, uses_y = self.condition_cell(self.peek().pos)
            conds_use_y |= uses_y
            self.expect_op(":")
            body = self.expr()
            cells.append(cell)
            pieces.append(body)
            if self.at_op(";"):
                self.advance()
                if self.at_op("}"):
                    break
                continue
            break
        self.expect_op("}")
        uses_u, uses_xy = _merge_flags(self, name_tok.pos, *pieces)
        cell_dim = max((2 if isinstance(c, Polytope) else 1) for c in cells)
        dim = max([cell_dim] + [v.dim for v in pieces])
        if dim == 2:
            cells = [interval_to_polytope(c) if isinstance(c, Interval1D) else c
                     for c in cells]
        try:
            partition = RegionPartition(tuple(cells))
            partition.validate()
        except (ValueError, PartitionError) as exc:
            raise ParseError(f"invalid partition: {exc}", name_tok.pos) from exc
        node = Piecewise(partition, tuple(v.to_expr(dim) for v in pieces))
        return _Val(name_tok.pos, node=node, uses_u=uses_u,
                    uses_xy=uses_xy or conds_use_y)


def parse_expr(text: str) -> FuncExpr:
    """Parse DSL text into an expression tree.

    Raises ParseError (with a character position) on malformed input, and
    lets partition validation errors surface with position context.
    """
    return _Parser(text).parse()
