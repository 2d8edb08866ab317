"""Numeric threshold estimators and the quadratic-minorant checker."""

import math

import pytest

from proxbound.calculus import ResultKind
from proxbound.funcdsl import parse_expr
from proxbound.numerics import (
    bounded_below_probe,
    check_quadratic_minorant,
    estimate_threshold_bisection,
    estimate_threshold_liminf,
    point_estimate,
)

INF = math.inf


def f(text):
    return parse_expr(text)


# -- boundedness probe ------------------------------------------------------

def test_probe_bounded():
    assert bounded_below_probe(f("x^2"))
    assert bounded_below_probe(f("sin(x)"))


def test_probe_unbounded_gives_witness():
    p = bounded_below_probe(f("-(x^2)"))
    assert not p
    assert p.witness is not None


# -- growth-rate estimator --------------------------------------------------

def test_liminf_concave_quadratic():
    res = estimate_threshold_liminf(f("-(x^2)"))
    assert res.kind is ResultKind.INTERVAL
    assert res.lo <= 2.0 <= res.hi
    assert point_estimate(res) == pytest.approx(2.0, abs=0.05)


def test_liminf_steeper_quadratic():
    res = estimate_threshold_liminf(f("-(3/2)*x^2"))
    assert res.lo <= 3.0 <= res.hi
    assert point_estimate(res) == pytest.approx(3.0, abs=0.05)


def test_liminf_bounded_function_near_zero():
    res = estimate_threshold_liminf(f("sin(x)"))
    assert res.lo == 0.0
    assert point_estimate(res) <= 0.05


def test_liminf_quartic_not_prox_bounded():
    res = estimate_threshold_liminf(f("-(x^4)"))
    assert res.kind is ResultKind.NOT_PROX_BOUNDED


def test_liminf_odd_power_not_prox_bounded():
    assert estimate_threshold_liminf(f("x^3")).is_npb


def test_liminf_positive_quartic_near_zero():
    res = estimate_threshold_liminf(f("x^4"))
    assert point_estimate(res) <= 0.05


def test_liminf_trace_statement():
    res = estimate_threshold_liminf(f("-(x^2)"))
    assert res.trace
    for e in res.trace:
        d = e.to_dict()
        assert d["paper_id"] == "Fact4.3"
        assert d["rule"] == "liminf-estimate"


# -- bisection estimator ----------------------------------------------------

def test_bisection_concave_quadratic():
    res = estimate_threshold_bisection(f("-(x^2)"))
    assert res.kind is ResultKind.INTERVAL
    assert res.lo == pytest.approx(2.0, abs=0.01)
    assert res.hi == pytest.approx(2.0, abs=0.01)
    assert res.lo <= res.hi


def test_bisection_bounded_function():
    res = estimate_threshold_bisection(f("x^2"))
    assert res.lo == 0.0
    assert res.hi <= 1e-3


def test_bisection_not_prox_bounded():
    assert estimate_threshold_bisection(f("x^3")).is_npb


def test_bisection_trace_statement():
    res = estimate_threshold_bisection(f("-(x^2)"))
    assert {e.to_dict()["rule"] for e in res.trace} == {"bisection-estimate"}
    assert {e.to_dict()["paper_id"] for e in res.trace} == {"Fact4.3"}


def test_estimators_agree_on_quadratic():
    a = point_estimate(estimate_threshold_liminf(f("-(x^2)")))
    b = point_estimate(estimate_threshold_bisection(f("-(x^2)")))
    assert abs(a - b) <= 0.1


# -- point estimates --------------------------------------------------------

def test_point_estimate_mapping():
    from proxbound.calculus import ThresholdResult, entry
    exact = ThresholdResult.exact(2.0, [entry("r", "Fact4.3", "q", "t = 2")])
    assert point_estimate(exact) == 2.0
    npb = ThresholdResult.not_prox_bounded([entry("r", "Fact4.3", "q", "npb")])
    assert point_estimate(npb) == INF
    iv = ThresholdResult.interval(1.0, 2.0, [entry("r", "Fact4.3", "q", "b")])
    assert point_estimate(iv) == 1.5
    half = ThresholdResult.interval(3.0, INF, [entry("r", "Fact4.3", "q", "b")])
    assert point_estimate(half) == 3.0
    unknown = ThresholdResult.unknown([entry("r", "Fact4.3", "q", "?")])
    assert math.isnan(point_estimate(unknown))


# -- quadratic minorant check -----------------------------------------------

def test_minorant_concave_quadratic_at_threshold():
    chk = check_quadratic_minorant(f("-(x^2)"), 2.0)
    assert chk.holds
    assert chk.bound == pytest.approx(0.0, abs=1e-6)


def test_minorant_fails_without_curvature():
    chk = check_quadratic_minorant(f("-abs(x)"), 0.0)
    assert not chk.holds
    assert chk.witness is not None


def test_minorant_small_curvature_rescues():
    chk = check_quadratic_minorant(f("-abs(x)"), 0.1)
    assert chk.holds
    assert chk.bound == pytest.approx(-5.0, abs=1e-3)


def test_minorant_negative_r_rejected():
    with pytest.raises(ValueError):
        check_quadratic_minorant(f("x^2"), -1.0)
