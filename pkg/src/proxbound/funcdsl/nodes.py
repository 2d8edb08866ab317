"""Expression nodes for extended-real-valued functions on R^n (n = 1 or 2).

Nodes are frozen dataclasses; a function value is a float or +inf, never -inf.
Evaluation is vectorized over numpy arrays of points so that grid-based
numerics stay fast.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .regions import (
    Cell,
    Interval1D,
    Polytope,
    PredicateCell,
    RegionPartition,
    cell_dim,
    interval_to_polytope,
)

INF = math.inf


class DimensionError(ValueError):
    """Operands of an expression disagree on ambient dimension."""


def _clean(v: float) -> float:
    v = float(v)
    return 0.0 if v == 0.0 else v  # normalize -0.0


@dataclass(frozen=True)
class Constant:
    value: float
    dim: int = 1

    def __post_init__(self):
        if math.isnan(self.value) or math.isinf(self.value):
            raise ValueError("constants must be finite")
        object.__setattr__(self, "value", _clean(self.value))


@dataclass(frozen=True)
class Affine:
    """a . x + b with at least one nonzero coefficient."""

    coeffs: tuple[float, ...]
    offset: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(_clean(c) for c in self.coeffs))
        object.__setattr__(self, "offset", _clean(self.offset))
        if not self.coeffs or all(c == 0.0 for c in self.coeffs):
            raise ValueError("affine node needs a nonzero slope; use Constant")


@dataclass(frozen=True)
class Quadratic:
    """(1/2) x.Qx + b.x + c with Q symmetric and nonzero."""

    quad: tuple[tuple[float, ...], ...]
    lin: tuple[float, ...]
    const: float = 0.0

    def __post_init__(self):
        q = tuple(tuple(_clean(v) for v in row) for row in self.quad)
        object.__setattr__(self, "quad", q)
        object.__setattr__(self, "lin", tuple(_clean(v) for v in self.lin))
        object.__setattr__(self, "const", _clean(self.const))
        n = len(q)
        if any(len(row) != n for row in q) or len(self.lin) != n:
            raise ValueError("quadratic shape mismatch")
        for i in range(n):
            for j in range(n):
                if q[i][j] != q[j][i]:
                    raise ValueError("quadratic matrix must be symmetric")
        if all(v == 0.0 for row in q for v in row):
            raise ValueError("quadratic node needs a nonzero Q; use Affine or Constant")

    def q_matrix(self) -> np.ndarray:
        return np.asarray(self.quad, dtype=float)

    def eigenvalues(self) -> tuple[float, float]:
        """(min, max) eigenvalue of Q."""
        w = np.linalg.eigvalsh(self.q_matrix())
        return float(w[0]), float(w[-1])


@dataclass(frozen=True)
class Power:
    """sign * ||x||^p, or for odd_symmetric (1-D only) sign * sgn(x)|x|^p.

    p >= 1 and p != 2; quadratics have their own node.
    """

    exponent: float
    sign: int = 1
    odd_symmetric: bool = False
    dim: int = 1

    def __post_init__(self):
        if self.exponent < 1:
            raise ValueError("power exponent must be >= 1")
        if self.exponent == 2 and not self.odd_symmetric:
            raise ValueError("use Quadratic for exponent 2")
        if self.sign not in (-1, 1):
            raise ValueError("sign must be +1 or -1")
        if self.odd_symmetric:
            p = self.exponent
            if self.dim != 1 or p != int(p) or int(p) % 2 == 0 or p < 3:
                raise ValueError("odd powers need 1-D and an odd integer exponent >= 3")


@dataclass(frozen=True)
class AbsNorm:
    """The Euclidean norm ||x||."""

    dim: int = 1


_BOUNDED_ATOMS = {
    # name: (numpy fn, lower bound, upper bound, Lipschitz constant)
    "sin": (np.sin, -1.0, 1.0, 1.0),
    "cos": (np.cos, -1.0, 1.0, 1.0),
    "atan": (np.arctan, -math.pi / 2, math.pi / 2, 1.0),
}


@dataclass(frozen=True)
class BoundedAtom:
    """A named bounded Lipschitz function of one variable with declared attributes."""

    name: str
    sign: int = 1

    def __post_init__(self):
        if self.name not in _BOUNDED_ATOMS:
            raise ValueError(f"unknown bounded atom {self.name!r}")
        if self.sign not in (-1, 1):
            raise ValueError("sign must be +1 or -1")

    @property
    def dim(self) -> int:
        return 1

    def declared(self) -> tuple[float, float, float]:
        """(lower, upper, lipschitz) after applying the sign."""
        _, lo, hi, k = _BOUNDED_ATOMS[self.name]
        if self.sign < 0:
            lo, hi = -hi, -lo
        return lo, hi, k


@dataclass(frozen=True)
class Indicator:
    """0 on the cell, +inf outside. The cell must be nonempty."""

    cell: Cell

    def __post_init__(self):
        if isinstance(self.cell, Interval1D) and self.cell.is_empty():
            raise ValueError("indicator of an empty interval is improper")
        if isinstance(self.cell, Polytope) and self.cell.is_empty():
            raise ValueError("indicator of an empty polytope is improper")


@dataclass(frozen=True)
class Sum:
    children: tuple["FuncExpr", ...]

    def __post_init__(self):
        if len(self.children) < 2:
            raise ValueError("sum needs at least two children")
        dims = {dim_of(c) for c in self.children}
        if len(dims) != 1:
            raise DimensionError("sum children disagree on dimension")


@dataclass(frozen=True)
class Scale:
    """factor * child with factor >= 0."""

    factor: float
    child: "FuncExpr"

    def __post_init__(self):
        if not (self.factor >= 0.0) or math.isinf(self.factor):
            raise ValueError("scale factor must be a finite nonnegative number")
        object.__setattr__(self, "factor", _clean(self.factor))


@dataclass(frozen=True)
class MaxOf:
    children: tuple["FuncExpr", ...]

    def __post_init__(self):
        if len(self.children) < 2:
            raise ValueError("max needs at least two children")
        dims = {dim_of(c) for c in self.children}
        if len(dims) != 1:
            raise DimensionError("max children disagree on dimension")


@dataclass(frozen=True)
class Piecewise:
    partition: RegionPartition
    pieces: tuple["FuncExpr", ...]

    def __post_init__(self):
        if len(self.pieces) != len(self.partition.cells):
            raise ValueError("children count must equal partition cell count")
        for p in self.pieces:
            if dim_of(p) != self.partition.dim:
                raise DimensionError("piece dimension disagrees with partition")


@dataclass(frozen=True)
class Compose:
    """outer(inner(x)); outer is a function on R."""

    outer: "FuncExpr"
    inner: "FuncExpr"

    def __post_init__(self):
        if dim_of(self.outer) != 1:
            raise DimensionError("composition outer must be one dimensional")


FuncExpr = Union[
    Constant, Affine, Quadratic, Power, AbsNorm, BoundedAtom,
    Indicator, Sum, Scale, MaxOf, Piecewise, Compose,
]

ATOM_TYPES = (Constant, Affine, Quadratic, Power, AbsNorm, BoundedAtom, Indicator)


def dim_of(f: FuncExpr) -> int:
    match f:
        case Constant() | Power() | AbsNorm():
            return f.dim
        case BoundedAtom():
            return 1
        case Affine():
            return len(f.coeffs)
        case Quadratic():
            return len(f.lin)
        case Indicator():
            return cell_dim(f.cell)
        case Sum() | MaxOf():
            return dim_of(f.children[0])
        case Scale():
            return dim_of(f.child)
        case Piecewise():
            return f.partition.dim
        case Compose():
            return dim_of(f.inner)
    raise TypeError(f"not a FuncExpr: {f!r}")


def quadratic1(curvature: float, slope: float = 0.0, const: float = 0.0) -> Quadratic:
    """1-D helper: (curvature/2) x^2 + slope x + const."""
    return Quadratic(((float(curvature),),), (float(slope),), float(const))


def scaled_identity_quadratic(r: float, dim: int) -> Quadratic:
    """(r/2)||x||^2."""
    q = tuple(tuple(float(r) if i == j else 0.0 for j in range(dim)) for i in range(dim))
    return Quadratic(q, (0.0,) * dim)


def shifted_quadratic(r: float, center: np.ndarray) -> Quadratic:
    """(r/2)||y - center||^2 as a function of y."""
    c = np.asarray(center, dtype=float).reshape(-1)
    dim = c.shape[0]
    q = tuple(tuple(float(r) if i == j else 0.0 for j in range(dim)) for i in range(dim))
    lin = tuple(float(-r * v) for v in c)
    return Quadratic(q, lin, float(0.5 * r * (c @ c)))


# ---------------------------------------------------------------------------
# evaluation


def _as_points(x, dim: int) -> tuple[np.ndarray, bool]:
    """Coerce scalars, vectors and batches into an (m, dim) array."""
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 0:
        if dim != 1:
            raise DimensionError("scalar point given for a multivariate function")
        return arr.reshape(1, 1), True
    if arr.ndim == 1:
        if dim == 1:
            return arr.reshape(-1, 1), False
        if arr.shape[0] == dim:
            return arr.reshape(1, dim), True
        raise DimensionError(f"point of length {arr.shape[0]} for dimension {dim}")
    if arr.ndim == 2 and arr.shape[1] == dim:
        return arr, False
    raise DimensionError(f"cannot interpret array of shape {arr.shape} as points in R^{dim}")


def eval_points(f: FuncExpr, pts: np.ndarray) -> np.ndarray:
    """Evaluate f on an (m, dim) array; returns (m,) floats with +inf allowed."""
    p = np.asarray(pts, dtype=float)
    match f:
        case Constant():
            return np.full(p.shape[0], f.value)
        case Affine():
            return p @ np.asarray(f.coeffs) + f.offset
        case Quadratic():
            q = f.q_matrix()
            return 0.5 * np.einsum("mi,ij,mj->m", p, q, p) + p @ np.asarray(f.lin) + f.const
        case Power():
            if f.odd_symmetric:
                x = p[:, 0]
                return f.sign * np.sign(x) * np.abs(x) ** f.exponent
            r = np.linalg.norm(p, axis=1)
            return f.sign * r ** f.exponent
        case AbsNorm():
            return np.linalg.norm(p, axis=1)
        case BoundedAtom():
            fn = _BOUNDED_ATOMS[f.name][0]
            return f.sign * fn(p[:, 0])
        case Indicator():
            return np.where(f.cell.contains(p), 0.0, INF)
        case Sum():
            total = eval_points(f.children[0], p)
            for c in f.children[1:]:
                total = total + eval_points(c, p)
            return total
        case Scale():
            v = eval_points(f.child, p)
            if f.factor == 0.0:
                return np.where(np.isinf(v), INF, 0.0)
            return f.factor * v
        case MaxOf():
            vals = [eval_points(c, p) for c in f.children]
            return np.maximum.reduce(vals)
        case Piecewise():
            member = f.partition.membership(p)
            out = np.full(p.shape[0], INF)
            for i, piece in enumerate(f.pieces):
                mask = member == i
                if mask.any():
                    out[mask] = eval_points(piece, p[mask])
            return out
        case Compose():
            inner_vals = eval_points(f.inner, p)
            out = np.full(p.shape[0], INF)
            finite = np.isfinite(inner_vals)
            if finite.any():
                out[finite] = eval_points(f.outer, inner_vals[finite].reshape(-1, 1))
            return out
    raise TypeError(f"not a FuncExpr: {f!r}")


def evaluate(f: FuncExpr, x):
    """Evaluate at a point (returns float) or a batch of points (returns array)."""
    pts, single = _as_points(x, dim_of(f))
    vals = eval_points(f, pts)
    return float(vals[0]) if single else vals


# ---------------------------------------------------------------------------
# structural transforms


def negate(f: FuncExpr) -> FuncExpr:
    """Pointwise negation, where representable in the node language."""
    match f:
        case Constant():
            return Constant(-f.value, f.dim)
        case Affine():
            return Affine(tuple(-c for c in f.coeffs), -f.offset)
        case Quadratic():
            return Quadratic(tuple(tuple(-v for v in row) for row in f.quad),
                             tuple(-v for v in f.lin), -f.const)
        case Power():
            return Power(f.exponent, -f.sign, f.odd_symmetric, f.dim)
        case AbsNorm():
            return Power(1.0, -1, False, f.dim)
        case BoundedAtom():
            return BoundedAtom(f.name, -f.sign)
        case Sum():
            return Sum(tuple(negate(c) for c in f.children))
        case Scale():
            return Scale(f.factor, negate(f.child))
        case Piecewise():
            return Piecewise(f.partition, tuple(negate(p) for p in f.pieces))
        case Compose():
            return Compose(negate(f.outer), f.inner)
        case MaxOf():
            raise ValueError("cannot negate max(...): minima are not representable")
        case Indicator():
            raise ValueError("cannot negate an indicator: the result is not proper")
    raise TypeError(f"not a FuncExpr: {f!r}")


def _coordinate_selector(dim: int, coord: int) -> Affine:
    return Affine(tuple(1.0 if k == coord else 0.0 for k in range(dim)), 0.0)


def promote(f: FuncExpr, dim: int) -> FuncExpr:
    """Embed a function of x as a function on R^dim constant in the other coordinates."""
    have = dim_of(f)
    if have == dim:
        return f
    if have != 1 or dim != 2:
        raise DimensionError(f"cannot promote a {have}-D function to {dim}-D")
    sel = _coordinate_selector(dim, 0)
    match f:
        case Constant():
            return Constant(f.value, dim)
        case Affine():
            return Affine((f.coeffs[0], 0.0), f.offset)
        case Quadratic():
            return Quadratic(((f.quad[0][0], 0.0), (0.0, 0.0)), (f.lin[0], 0.0), f.const)
        case Power() | AbsNorm() | BoundedAtom():
            return Compose(f, sel)
        case Indicator():
            if isinstance(f.cell, Interval1D):
                return Indicator(interval_to_polytope(f.cell, dim))
            raise DimensionError("cannot promote this indicator")
        case Sum():
            return Sum(tuple(promote(c, dim) for c in f.children))
        case Scale():
            return Scale(f.factor, promote(f.child, dim))
        case MaxOf():
            return MaxOf(tuple(promote(c, dim) for c in f.children))
        case Piecewise():
            cells = []
            for c in f.partition.cells:
                if isinstance(c, Interval1D):
                    cells.append(interval_to_polytope(c, dim))
                elif isinstance(c, PredicateCell):
                    raise DimensionError("cannot promote a predicate cell")
                else:
                    cells.append(c)
            return Piecewise(RegionPartition(tuple(cells)),
                             tuple(promote(p, dim) for p in f.pieces))
        case Compose():
            return Compose(f.outer, promote(f.inner, dim))
    raise TypeError(f"not a FuncExpr: {f!r}")


def contains_indicator(f: FuncExpr) -> bool:
    match f:
        case Indicator():
            return True
        case Sum() | MaxOf():
            return any(contains_indicator(c) for c in f.children)
        case Scale():
            return contains_indicator(f.child)
        case Piecewise():
            return any(contains_indicator(p) for p in f.pieces)
        case Compose():
            return contains_indicator(f.inner) or contains_indicator(f.outer)
        case _:
            return False


def feasible_seeds(f: FuncExpr) -> list[float]:
    """Finite landmark coordinates (cell endpoints) worth probing during search."""
    out: list[float] = []

    def visit(g: FuncExpr):
        match g:
            case Indicator():
                out.extend(g.cell.finite_bounds())
                if isinstance(g.cell, Interval1D) and g.cell.is_bounded():
                    out.append(0.5 * (g.cell.lo + g.cell.hi))
            case Piecewise():
                for c in g.partition.cells:
                    out.extend(c.finite_bounds())
                for p in g.pieces:
                    visit(p)
            case Sum() | MaxOf():
                for c in g.children:
                    visit(c)
            case Scale():
                visit(g.child)
            case Compose():
                visit(g.inner)
            case _:
                pass

    visit(f)
    return [v for v in out if math.isfinite(v)]
