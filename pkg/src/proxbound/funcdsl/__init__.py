"""Expression model, DSL parser, evaluation, and attribute propagation."""

from .attributes import AttributeRecord, attributes
from .nodes import (
    INF, AbsNorm, Affine, BoundedAtom, Compose, Constant, DimensionError,
    FuncExpr, Indicator, MaxOf, Piecewise, Power, Quadratic, Scale, Sum,
    contains_indicator, dim_of, eval_points, evaluate, feasible_seeds,
    negate, promote, quadratic1, scaled_identity_quadratic, shifted_quadratic,
)
from .parser import ParseError, parse_expr
from .regions import (
    Cell, Halfspace, Interval1D, PartitionError, Polytope, PredicateCell,
    RegionPartition, intersect_cells, interval_to_polytope, whole_space,
)
from .serialize import serialize, to_json_tree

__all__ = [
    "INF", "AbsNorm", "Affine", "AttributeRecord", "BoundedAtom", "Cell",
    "Compose", "Constant", "DimensionError", "FuncExpr", "Halfspace",
    "Indicator", "Interval1D", "MaxOf", "ParseError", "PartitionError",
    "Piecewise", "Polytope", "Power", "PredicateCell", "Quadratic",
    "RegionPartition", "Scale", "Sum", "attributes", "contains_indicator",
    "dim_of", "eval_points", "evaluate", "feasible_seeds", "intersect_cells",
    "interval_to_polytope", "negate", "parse_expr", "promote", "quadratic1",
    "scaled_identity_quadratic", "serialize", "shifted_quadratic",
    "to_json_tree", "whole_space",
]
