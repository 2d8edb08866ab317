"""Structural attribute derivation stays sound on hand-checked cases."""

import math

import numpy as np
import pytest

from proxbound.funcdsl import Scale, Sum, parse_expr
from proxbound.funcdsl.attributes import attributes
from proxbound.funcdsl.nodes import quadratic1


def attrs(text):
    return attributes(parse_expr(text))


def test_abs_is_convex_lipschitz():
    a = attrs("abs(x)")
    assert a.convex is True
    assert a.bounded_below is True
    assert a.lipschitz_k == 1.0
    assert a.linear_lower_growth is True


def test_sin_is_bounded_both_sides():
    a = attrs("sin(x)")
    assert a.bounded_below is True
    assert a.bounded_above is True
    assert a.lipschitz_k == 1.0


def test_convex_quadratic():
    a = attrs("x^2 + 3*x")
    assert a.convex is True
    assert a.bounded_below is True
    assert a.quadratic_min_curvature == 2.0
    assert a.lipschitz_k is None  # quadratics are not globally Lipschitz


def test_concave_quadratic():
    a = attrs("-(x^2)")
    assert a.convex is False
    assert a.bounded_below is False
    assert a.quadratic_min_curvature == -2.0


def test_affine_params():
    a = attrs("2*x + 3")
    assert a.affine_params == ((2.0,), 3.0)
    assert a.convex is True
    assert a.lipschitz_k == 2.0


def test_constant_attributes():
    a = attrs("5")
    assert a.affine_params == ((0.0,), 5.0)
    assert a.bounded_above is True and a.bounded_below is True
    assert a.lipschitz_k == 0.0


def test_indicator_of_convex_set():
    a = attrs("ind[0, 1]")
    assert a.convex is True
    assert a.bounded_below is True
    assert a.finite_everywhere is False


def test_sum_combines():
    a = attrs("x^2 + sin(x)")
    assert a.bounded_below is True
    # sum of convex and nonconvex loses the convexity claim
    assert a.convex is None or a.convex is False


def test_scale_keeps_shape_facts():
    a = attributes(Scale(3.0, parse_expr("abs(x)")))
    assert a.convex is True
    assert a.lipschitz_k == 3.0


def test_negative_power_unbounded():
    a = attrs("-(x^4)")
    assert a.bounded_below is False
    assert a.bounded_above is True


def test_odd_power_unbounded_both():
    a = attrs("x^3")
    assert a.bounded_below is False
    assert a.bounded_above is False


def test_max_of_convex_is_convex():
    a = attrs("max(x, -x)")
    assert a.convex is True
    assert a.linear_lower_growth is True


def test_compose_affine_inner_keeps_convexity():
    a = attrs("abs(2*x + 1)")
    assert a.convex is True
    assert a.lipschitz_k == 2.0


def test_two_dimensional_norm():
    a = attrs("norm(x, y)")
    assert a.convex is True
    assert a.lipschitz_k == 1.0


def test_as_dict_keys():
    d = attrs("x^2").as_dict()
    assert set(d) == {
        "convex", "bounded_below", "bounded_above", "lipschitz_K",
        "affine_params", "quadratic_min_curvature", "linear_lower_growth",
        "affine_majorant", "finite_everywhere",
    }


@pytest.mark.parametrize("text", [
    "x^2", "abs(x)", "sin(x)", "-(x^2)", "max(x, -x)", "x^2 + sin(x)",
    "2*x + 3", "ind[0, 1]", "piecewise{x<0: x^2; x>=0: -(x^2)}",
])
def test_claimed_bounds_hold_on_samples(text):
    # sampled soundness: claimed convexity and boundedness survive probing
    f = parse_expr(text)
    a = attributes(f)
    from proxbound.funcdsl import evaluate
    xs = np.linspace(-50, 50, 401)
    vals = [evaluate(f, float(x)) for x in xs]
    finite = [v for v in vals if v < math.inf]
    if a.bounded_above is True:
        assert max(finite) < math.inf
    if a.convex is True:
        for i in range(0, len(xs) - 2, 7):
            lhs = evaluate(f, float((xs[i] + xs[i + 2]) / 2))
            rhs = 0.5 * vals[i] + 0.5 * vals[i + 2]
            assert lhs <= rhs + 1e-9 * (1 + abs(rhs)) or rhs == math.inf


def test_quadratic1_helper_matches():
    f = quadratic1(-3.0, 1.0, 2.0)
    a = attributes(f)
    assert a.quadratic_min_curvature == -3.0
    s = Sum((quadratic1(-1.0), quadratic1(-2.0)))
    assert attributes(s).quadratic_min_curvature in (None, -3.0)
