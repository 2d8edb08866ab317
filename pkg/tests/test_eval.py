import math

import numpy as np
import pytest

from proxbound.funcdsl import (
    Compose, Constant, DimensionError, Scale, Sum, dim_of, evaluate,
    parse_expr,
)
from proxbound.funcdsl.nodes import (
    contains_indicator, eval_points, feasible_seeds, negate, quadratic1,
)

INF = math.inf


def test_scalar_evaluation():
    f = parse_expr("2*x^2 + 3*x - 1")
    assert evaluate(f, 2.0) == 13.0
    assert evaluate(f, 0.0) == -1.0


def test_vectorized_matches_scalar():
    f = parse_expr("x^2 + sin(x)")
    xs = np.linspace(-3, 3, 17)
    vals = eval_points(f, xs.reshape(-1, 1))
    for x, v in zip(xs, vals):
        assert v == pytest.approx(evaluate(f, float(x)))


def test_indicator_values():
    f = parse_expr("ind[0, 1]")
    assert evaluate(f, 0.5) == 0.0
    assert evaluate(f, 0.0) == 0.0
    assert evaluate(f, -0.1) == INF
    half_open = parse_expr("ind[0, 1)")
    assert evaluate(half_open, 1.0) == INF


def test_piecewise_membership():
    f = parse_expr("piecewise{x<0: x^2; x>=0: -(x^2)}")
    assert evaluate(f, -2.0) == 4.0
    assert evaluate(f, 2.0) == -4.0
    assert evaluate(f, 0.0) == 0.0  # boundary belongs to the x>=0 cell


def test_two_dimensional():
    f = parse_expr("norm(x, y)")
    assert dim_of(f) == 2
    assert evaluate(f, (3.0, 4.0)) == 5.0
    g = parse_expr("x*y")
    assert evaluate(g, (2.0, 5.0)) == 10.0


def test_compose_evaluation():
    f = parse_expr("compose(-(1/2)*u^2, -2*x)")
    assert evaluate(f, 3.0) == -18.0


def test_odd_power():
    f = parse_expr("x^3")
    assert evaluate(f, -2.0) == -8.0
    g = parse_expr("-(x^4)")
    assert evaluate(g, 2.0) == -16.0


def test_scale_and_sum():
    f = Scale(2.5, parse_expr("abs(x)"))
    assert evaluate(f, -2.0) == 5.0
    s = Sum((quadratic1(-1.0), quadratic1(-2.0)))
    assert evaluate(s, 2.0) == -6.0


def test_scale_zero_keeps_domain():
    # 0 * ind keeps the indicator's domain, it does not erase it
    f = Scale(0.0, parse_expr("ind[0, 1]"))
    assert evaluate(f, 0.5) == 0.0
    assert evaluate(f, 2.0) == INF


def test_inf_propagates_through_sum():
    f = parse_expr("ind[0, inf) + x^2")
    assert evaluate(f, 1.0) == 1.0
    assert evaluate(f, -1.0) == INF


def test_negate():
    f = parse_expr("x^2")
    g = negate(f)
    assert evaluate(g, 3.0) == -9.0
    assert evaluate(negate(g), 3.0) == 9.0


def test_dimension_mismatch():
    f = parse_expr("norm(x, y)")
    with pytest.raises(DimensionError):
        evaluate(f, 1.0)
    with pytest.raises(DimensionError):
        Sum((parse_expr("x^2"), parse_expr("norm(x, y)")))


def test_contains_indicator():
    assert contains_indicator(parse_expr("ind[0, 1] + x^2"))
    assert not contains_indicator(parse_expr("x^2 + sin(x)"))


def test_feasible_seeds_land_in_domain():
    f = parse_expr("ind[3, 5] + x^2")
    seeds = feasible_seeds(f)
    assert seeds
    assert any(evaluate(f, s) < INF for s in seeds)


def test_constant_dim_promotion():
    f = parse_expr("piecewise{x + y < 0: x*y; x + y >= 0: 0}")
    assert dim_of(f) == 2
    assert evaluate(f, (1.0, 1.0)) == 0.0
    assert evaluate(f, (-2.0, 1.0)) == -2.0


def test_constant_rejects_nonfinite():
    with pytest.raises(ValueError):
        Constant(INF)
    with pytest.raises(ValueError):
        Constant(math.nan)


def test_compose_outer_must_be_one_dimensional():
    with pytest.raises(DimensionError):
        Compose(parse_expr("norm(x, y)"), parse_expr("x^2"))
