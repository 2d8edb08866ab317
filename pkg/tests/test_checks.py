"""Consistency suites: structure, pass behavior, and violation detection."""

import numpy as np
import pytest

from proxbound import checks
from proxbound.funcdsl import parse_expr
from proxbound.numerics import DEFAULT_CONFIG


def test_corpus_functions_parse():
    corpus = checks.corpus_functions()
    assert len(corpus) == 4
    names = [n for n, _ in corpus]
    assert "abs(x)" in names and "x^2" in names


def test_valid_r_schedule_above_threshold():
    rs = checks.valid_r_schedule(parse_expr("-(x^2)"), DEFAULT_CONFIG)
    assert rs
    assert all(r > 2.0 for r in rs)
    assert rs == sorted(rs)


def test_valid_r_schedule_empty_for_npb():
    assert checks.valid_r_schedule(parse_expr("x^3"), DEFAULT_CONFIG) == []


def test_fenchel_identity_suite_passes():
    items = [("x^2", parse_expr("x^2"), [1.0, 3.0])]
    rep = checks.fenchel_identity_suite(items, DEFAULT_CONFIG)
    assert rep.passed
    assert rep.checked > 0


def test_envelope_bounds_suite_passes():
    items = [("abs(x)", parse_expr("abs(x)"), [0.5, 1.0, 2.0])]
    rep = checks.envelope_bounds_suite(items, DEFAULT_CONFIG)
    assert rep.passed


def test_envelope_ordering_detects_violation():
    # swapped pair: claims f <= g while actually f >= g on probes
    pairs = [("x^2 + 1", parse_expr("x^2 + 1"), "x^2", parse_expr("x^2"))]
    rep = checks.envelope_ordering_suite(pairs, DEFAULT_CONFIG)
    assert not rep.passed
    assert rep.issues


def test_convergence_suite_passes():
    rep = checks.convergence_suite([("x^2", parse_expr("x^2"))],
                                   DEFAULT_CONFIG)
    assert rep.passed


def test_prox_consistency_suite_passes():
    items = [("abs(x)", parse_expr("abs(x)"), [1.0])]
    rep = checks.prox_consistency_suite(items, DEFAULT_CONFIG)
    assert rep.passed


def test_prox_consistency_skips_two_dim():
    items = [("norm(x, y)", parse_expr("norm(x, y)"), [1.0])]
    rep = checks.prox_consistency_suite(items, DEFAULT_CONFIG)
    assert rep.passed
    assert rep.notes  # records the dimension skip instead of failing


def test_symbolic_vs_numeric_suite():
    items = [("-(x^2)", parse_expr("-(x^2)")),
             ("x^3", parse_expr("x^3"))]
    rep = checks.symbolic_vs_numeric_suite(items, DEFAULT_CONFIG)
    assert rep.passed
    assert rep.checked == 2


def test_threshold_ordering_suite_seeded():
    rng = np.random.default_rng(checks.DEFAULT_SEED)
    rep = checks.threshold_ordering_suite(rng, pairs=20)
    assert rep.passed
    assert rep.checked == 20


def test_scaling_suite_seeded():
    rng = np.random.default_rng(checks.DEFAULT_SEED)
    rep = checks.scaling_suite(rng, pairs=5)
    assert rep.passed


def test_lsc_violation_reported_as_note():
    # upper semicontinuous jump at 0: the value sits above the limit
    f = parse_expr("piecewise{x<0: 0; x>=0: 1}")
    msgs = checks.lsc_violations(f)
    assert msgs
    rep = checks.lsc_suite([("jump", f)])
    assert rep.passed  # diagnostics never fail the run
    assert rep.notes


def test_lsc_clean_function_quiet():
    assert checks.lsc_violations(parse_expr("abs(x)")) == []


def test_run_expression_summary_shape():
    summary = checks.run_expression(parse_expr("x^2"), DEFAULT_CONFIG, seed=0)
    assert summary.passed
    d = summary.to_dict()
    assert set(d) == {"passed", "elapsed_seconds", "suites"}
    for suite in d["suites"]:
        assert set(suite) == {"name", "checked", "passed", "issues", "notes",
                              "elapsed_seconds"}


def test_estimator_agreement_suite():
    rep = checks.estimator_agreement_suite([("-(x^2)", parse_expr("-(x^2)"))],
                                           DEFAULT_CONFIG)
    assert rep.passed
