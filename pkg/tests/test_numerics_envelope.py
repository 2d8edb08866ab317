"""Scan engine, Moreau envelopes, prox points, and conjugates.

Expected values were frozen from closed-form computations before the
engine was written; tolerances reflect the refinement stopping rule.
"""

import math

import numpy as np
import pytest

from proxbound.funcdsl import Sum, parse_expr
from proxbound.numerics import (
    DEFAULT_CONFIG,
    ImproperFunctionError,
    ProxUndefinedError,
    SolverConfig,
    envelope_via_conjugate,
    fenchel_conjugate,
    minimize,
    moreau_envelope,
    prox_points,
)

INF = math.inf
TOL = 1e-6


def f(text):
    return parse_expr(text)


# -- global scan ------------------------------------------------------------

def test_minimize_quadratic():
    scan = minimize(f("x^2 + 2*x"), 0.0)
    assert scan.kind == "finite"
    assert scan.value == pytest.approx(-1.0, abs=TOL)
    assert scan.minimizers[0][0] == pytest.approx(-1.0, abs=1e-6)


def test_minimize_detects_divergence():
    scan = minimize(f("-(x^2)"), 0.0)
    assert scan.kind == "neg_inf"
    assert scan.witness is not None
    assert scan.value == -INF


def test_minimize_improper():
    everywhere_inf = f("ind[0, 1] + ind[2, 3]")
    with pytest.raises(ImproperFunctionError):
        minimize(everywhere_inf, 0.0)


def test_minimize_landmark_exactness():
    # indicator corners are seeded directly, so the minimum is hit exactly
    scan = minimize(f("ind[3, 5] + x^2"), 0.0)
    assert scan.value == 9.0
    assert scan.minimizers[0][0] == 3.0


def test_minimize_two_dim():
    scan = minimize(f("x^2 + x*y + y^2"), (1.0, 1.0))
    assert scan.value == pytest.approx(0.0, abs=TOL)


def test_config_replace_and_validation():
    cfg = DEFAULT_CONFIG.replace(max_radius=8.0)
    assert cfg.max_radius == 8.0 and DEFAULT_CONFIG.max_radius != 8.0
    with pytest.raises(ValueError):
        SolverConfig(grid_points=1)
    with pytest.raises(ValueError):
        DEFAULT_CONFIG.replace(refine_tol=-1.0)


# -- Moreau envelope --------------------------------------------------------

def test_envelope_abs():
    env = moreau_envelope(f("abs(x)"), 1.0, 2.0)
    assert env.value == pytest.approx(1.5, abs=TOL)
    assert env.minimizers[0][0] == pytest.approx(1.0, abs=1e-6)


def test_envelope_square():
    env = moreau_envelope(f("x^2"), 2.0, 1.0)
    assert env.value == pytest.approx(0.5, abs=TOL)
    assert env.minimizers[0][0] == pytest.approx(0.5, abs=1e-6)


def test_envelope_constant():
    env = moreau_envelope(f("5"), 7.0, 3.0)
    assert env.value == pytest.approx(5.0, abs=TOL)


def test_envelope_r_zero_is_global_inf():
    env = moreau_envelope(f("abs(x)"), 0.0, 100.0)
    assert env.value == pytest.approx(0.0, abs=TOL)


def test_envelope_negative_r_rejected():
    with pytest.raises(ValueError):
        moreau_envelope(f("x^2"), -1.0, 0.0)


def test_envelope_below_threshold_diverges():
    env = moreau_envelope(f("-(x^2)"), 1.0, 0.0)
    assert env.value == -INF
    assert env.diverged
    assert env.witness is not None


def test_envelope_above_threshold_finite():
    env = moreau_envelope(f("-(x^2)"), 3.0, 0.0)
    assert env.value == pytest.approx(0.0, abs=TOL)


def test_envelope_never_exceeds_function():
    g = f("x^2 + sin(x)")
    for x in np.linspace(-3, 3, 13):
        env = moreau_envelope(g, 2.0, float(x))
        fx = float(x) ** 2 + math.sin(float(x))
        assert env.value <= fx + 1e-9


def test_envelope_two_dim_norm():
    env = moreau_envelope(f("norm(x, y)"), 1.0, (2.0, 0.0))
    assert env.value == pytest.approx(1.5, abs=1e-5)
    p = env.minimizers[0]
    assert p[0] == pytest.approx(1.0, abs=1e-4)
    assert p[1] == pytest.approx(0.0, abs=1e-4)


# -- prox points ------------------------------------------------------------

def test_prox_square():
    pts = prox_points(f("x^2"), 1.0, 3.0)
    assert len(pts) == 1
    assert pts[0][0] == pytest.approx(1.0, abs=1e-6)


def test_prox_abs_shrinkage():
    pts = prox_points(f("abs(x)"), 1.0, 2.0)
    assert pts[0][0] == pytest.approx(1.0, abs=1e-6)


def test_prox_projection_onto_ray():
    pts = prox_points(f("ind[0, inf)"), 1.0, -3.0)
    assert pts == ((0.0,),) or pts[0][0] == pytest.approx(0.0, abs=1e-9)


def test_prox_double_well_returns_both():
    pts = prox_points(f("-abs(x)"), 1.0, 0.0)
    xs = sorted(p[0] for p in pts)
    assert len(xs) == 2
    assert xs[0] == pytest.approx(-1.0, abs=1e-6)
    assert xs[1] == pytest.approx(1.0, abs=1e-6)


def test_prox_undefined_below_threshold():
    with pytest.raises(ProxUndefinedError):
        prox_points(f("-(x^2)"), 1.0, 0.0)


def test_prox_r_zero_rejected():
    with pytest.raises(ValueError):
        prox_points(f("x^2"), 0.0, 1.0)


# -- Fenchel conjugate ------------------------------------------------------

def test_conjugate_half_square_is_self():
    g = f("(1/2)*x^2")
    for y in (-1.0, 0.0, 2.0):
        assert fenchel_conjugate(g, y) == pytest.approx(0.5 * y * y, abs=TOL)


def test_conjugate_abs_is_ball_indicator():
    g = f("abs(x)")
    assert fenchel_conjugate(g, 0.5) == pytest.approx(0.0, abs=TOL)
    assert fenchel_conjugate(g, 2.0) == INF


def test_conjugate_affine():
    g = f("2*x + 3")
    assert fenchel_conjugate(g, 2.0) == pytest.approx(-3.0, abs=TOL)
    assert fenchel_conjugate(g, 0.0) == INF


def test_conjugate_two_dim():
    g = f("(1/2)*(x^2 + y^2)")
    assert fenchel_conjugate(g, (1.0, 2.0)) == pytest.approx(2.5, abs=1e-5)


def test_fenchel_young_inequality():
    g = f("x^2 + abs(x)")
    for x in (-2.0, 0.5, 1.0):
        for y in (-1.0, 0.0, 3.0):
            fstar = fenchel_conjugate(g, y)
            fx = float(x) ** 2 + abs(float(x))
            assert fx + fstar >= x * y - 1e-8


def test_envelope_via_conjugate_matches_direct():
    cases = [(f("x^2"), 2.0, 1.0), (f("abs(x)"), 1.0, 2.0),
             (f("max(x, 0)"), 3.0, -1.0)]
    for g, r, x in cases:
        direct = moreau_envelope(g, r, x)
        via = envelope_via_conjugate(g, r, x)
        assert via == pytest.approx(direct.value, abs=1e-3)


def test_envelope_via_conjugate_diverges_below_threshold():
    assert envelope_via_conjugate(f("-(x^2)"), 1.0, 0.0) == -INF
