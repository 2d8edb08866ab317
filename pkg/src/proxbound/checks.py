"""Cross-validation suites tying the symbolic and numeric sides together.

Each suite compares two independent routes to the same quantity: the two
envelope paths, envelope values against the function they minorize, symbolic
thresholds against numeric estimates, and so on. Suites return reports with
witnesses for every violation; the CLI `check` command and the service
`/check` route are thin wrappers over `run_corpus` and `run_expression`.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .calculus import compute_threshold
from .funcdsl import (
    FuncExpr,
    Indicator,
    Interval1D,
    Piecewise,
    Scale,
    Sum,
    dim_of,
    evaluate,
    parse_expr,
    quadratic1,
    serialize,
)
from .numerics import (
    DEFAULT_CONFIG,
    SolverConfig,
    envelope_via_conjugate,
    estimate_threshold_bisection,
    estimate_threshold_liminf,
    moreau_envelope,
    point_estimate,
)

GLUED_BRANCHES = (
    "piecewise{x<0: piecewise{x<0: x^2; x>=0: -(x^2)}; "
    "x>=0: piecewise{x<0: -(x^2); x>=0: x^2}}"
)

DEFAULT_SEED = 0

IDENTITY_TOL = 1e-3
MINORIZATION_TOL = 1e-9
MONOTONICITY_TOL = 1e-8
CONVERGENCE_R = 1000.0
CONVERGENCE_TOL = 1e-2
PROX_VALUE_TOL = 1e-6
AGREEMENT_TOL = 0.1


@dataclass(frozen=True)
class CheckIssue:
    suite: str
    message: str


@dataclass(frozen=True)
class SuiteReport:
    name: str
    checked: int
    issues: tuple[CheckIssue, ...]
    elapsed: float
    notes: tuple[str, ...] = ()

    @property
    def passed(self) -> bool:
        return not self.issues


@dataclass(frozen=True)
class CheckSummary:
    reports: tuple[SuiteReport, ...]
    elapsed: float

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.reports)

    @property
    def issues(self) -> tuple[CheckIssue, ...]:
        return tuple(i for r in self.reports for i in r.issues)

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "elapsed_seconds": self.elapsed,
            "suites": [
                {
                    "name": r.name,
                    "checked": r.checked,
                    "passed": r.passed,
                    "issues": [i.message for i in r.issues],
                    "notes": list(r.notes),
                    "elapsed_seconds": r.elapsed,
                }
                for r in self.reports
            ],
        }


def corpus_functions() -> list[tuple[str, FuncExpr]]:
    """The named 1-D corpus used by every corpus-level suite."""
    return [
        ("abs(x)", parse_expr("abs(x)")),
        ("x^2", parse_expr("x^2")),
        ("max(x, 0)", parse_expr("max(x, 0)")),
        ("glued quadratic branches", parse_expr(GLUED_BRANCHES)),
    ]


def valid_r_schedule(f: FuncExpr, config: SolverConfig) -> list[float]:
    """Four r values safely above the threshold of f, or [] when none exist."""
    res = compute_threshold(f)
    if res.is_npb:
        return []
    if res.is_resolved() and math.isfinite(res.hi):
        base = res.hi
    else:
        est = estimate_threshold_liminf(f, config)
        if est.is_npb:
            return []
        base = est.hi
    return [base + 0.5, base + 1.0, base + 2.0, base + 5.0]


def _timed(name: str, checked: int, issues: list[CheckIssue], t0: float,
           notes: Iterable[str] = ()) -> SuiteReport:
    return SuiteReport(name, checked, tuple(issues), time.time() - t0, tuple(notes))


# ---------------------------------------------------------------------------
# envelope-side suites


def fenchel_identity_suite(items: Sequence[tuple[str, FuncExpr, Sequence[float]]],
                           config: SolverConfig = DEFAULT_CONFIG) -> SuiteReport:
    """Direct envelope vs the conjugate path, 101 points on [-5, 5]."""
    t0 = time.time()
    issues: list[CheckIssue] = []
    notes: list[str] = []
    checked = 0
    xs = np.linspace(-5.0, 5.0, 101)
    for name, f, rs in items:
        if not rs:
            notes.append(f"{name}: no finite threshold, identity suite skipped")
            continue
        for r in rs:
            worst = 0.0
            worst_x = 0.0
            for x in xs:
                direct = moreau_envelope(f, r, float(x), config).value
                via = envelope_via_conjugate(f, r, float(x), config)
                dev = abs(direct - via)
                checked += 1
                if dev > worst:
                    worst, worst_x = dev, float(x)
            if worst > IDENTITY_TOL:
                issues.append(CheckIssue(
                    "fenchel-identity",
                    f"{name} at r={r:g}: |direct - conjugate| = {worst:.3g} "
                    f"at x={worst_x:g} exceeds {IDENTITY_TOL:g}"))
    return _timed("fenchel-identity", checked, issues, t0, notes)


def envelope_bounds_suite(items: Sequence[tuple[str, FuncExpr, Sequence[float]]],
                          config: SolverConfig = DEFAULT_CONFIG) -> SuiteReport:
    """Minorization e_rf <= f and monotonicity of e_rf in r on a shared grid."""
    t0 = time.time()
    issues: list[CheckIssue] = []
    notes: list[str] = []
    checked = 0
    xs = np.linspace(-3.0, 3.0, 41)
    for name, f, rs in items:
        if not rs:
            notes.append(f"{name}: no finite threshold, bound suites skipped")
            continue
        rows: dict[float, np.ndarray] = {}
        for r in sorted(rs):
            rows[r] = np.asarray(
                [moreau_envelope(f, r, float(x), config).value for x in xs])
        fvals = np.asarray([evaluate(f, float(x)) for x in xs])
        for r, env in rows.items():
            bad = env > fvals + MINORIZATION_TOL * (1.0 + np.abs(fvals))
            checked += xs.size
            if bad.any():
                i = int(np.argmax(bad))
                issues.append(CheckIssue(
                    "envelope-bounds",
                    f"{name}: e_{r:g}f({xs[i]:g}) = {env[i]:.6g} exceeds "
                    f"f = {fvals[i]:.6g}"))
        ordered = sorted(rows)
        for r_lo, r_hi in zip(ordered, ordered[1:]):
            bad = rows[r_lo] > rows[r_hi] + MONOTONICITY_TOL
            checked += xs.size
            if bad.any():
                i = int(np.argmax(bad))
                issues.append(CheckIssue(
                    "envelope-bounds",
                    f"{name}: e_{r_lo:g}f({xs[i]:g}) = {rows[r_lo][i]:.6g} exceeds "
                    f"e_{r_hi:g}f = {rows[r_hi][i]:.6g} (monotonicity in r)"))
    return _timed("envelope-bounds", checked, issues, t0, notes)


def envelope_ordering_suite(pairs: Sequence[tuple[str, FuncExpr, str, FuncExpr]],
                            config: SolverConfig = DEFAULT_CONFIG) -> SuiteReport:
    """f <= g pointwise (verified on probes) implies e_rf <= e_rg."""
    t0 = time.time()
    issues: list[CheckIssue] = []
    checked = 0
    probes = np.linspace(-10.0, 10.0, 41)
    xs = np.linspace(-2.0, 2.0, 21)
    for fname, f, gname, g in pairs:
        fv = np.asarray([evaluate(f, float(p)) for p in probes])
        gv = np.asarray([evaluate(g, float(p)) for p in probes])
        if (fv > gv + 1e-12).any():
            issues.append(CheckIssue(
                "envelope-ordering",
                f"probe says {fname} > {gname}; pair skipped"))
            continue
        for r in (0.5, 1.0, 2.0, 5.0):
            for x in xs:
                ef = moreau_envelope(f, r, float(x), config).value
                eg = moreau_envelope(g, r, float(x), config).value
                checked += 1
                if ef > eg + MONOTONICITY_TOL:
                    issues.append(CheckIssue(
                        "envelope-ordering",
                        f"e_{r:g}[{fname}]({x:g}) = {ef:.6g} exceeds "
                        f"e_{r:g}[{gname}] = {eg:.6g}"))
    return _timed("envelope-ordering", checked, issues, t0)


def convergence_suite(items: Sequence[tuple[str, FuncExpr]],
                      config: SolverConfig = DEFAULT_CONFIG) -> SuiteReport:
    """e_rf -> f as r grows: at r = 1000, deviation <= 1e-2 where slopes are mild."""
    t0 = time.time()
    issues: list[CheckIssue] = []
    checked = 0
    xs = np.linspace(-1.0, 1.0, 41)
    for name, f in items:
        for x in xs:
            fv = evaluate(f, float(x))
            env = moreau_envelope(f, CONVERGENCE_R, float(x), config).value
            checked += 1
            if abs(fv - env) > CONVERGENCE_TOL:
                issues.append(CheckIssue(
                    "envelope-convergence",
                    f"{name}: |e_{CONVERGENCE_R:g}f - f| = {abs(fv - env):.3g} "
                    f"at x={x:g}"))
    return _timed("envelope-convergence", checked, issues, t0)


def prox_consistency_suite(items: Sequence[tuple[str, FuncExpr, Sequence[float]]],
                           config: SolverConfig = DEFAULT_CONFIG) -> SuiteReport:
    """Reported prox points must achieve the reported envelope value."""
    t0 = time.time()
    issues: list[CheckIssue] = []
    notes: list[str] = []
    checked = 0
    xs = np.linspace(-3.0, 3.0, 11)
    for name, f, rs in items:
        if not rs:
            notes.append(f"{name}: no finite threshold, prox suite skipped")
            continue
        if dim_of(f) != 1:
            notes.append(f"{name}: prox suite samples 1-D grids only, skipped")
            continue
        for r in rs:
            for x in xs:
                env = moreau_envelope(f, r, float(x), config)
                tol = PROX_VALUE_TOL * (1.0 + abs(env.value))
                if not env.minimizers:
                    issues.append(CheckIssue(
                        "prox-consistency",
                        f"{name}: no prox point at r={r:g}, x={x:g}"))
                    continue
                for p in env.minimizers:
                    attained = evaluate(f, p[0]) + 0.5 * r * (p[0] - float(x)) ** 2
                    checked += 1
                    if abs(attained - env.value) > tol:
                        issues.append(CheckIssue(
                            "prox-consistency",
                            f"{name}: prox point {p} at r={r:g}, x={x:g} attains "
                            f"{attained:.9g}, envelope says {env.value:.9g}"))
    return _timed("prox-consistency", checked, issues, t0, notes)


# ---------------------------------------------------------------------------
# threshold-side suites


def estimator_agreement_suite(items: Sequence[tuple[str, FuncExpr]],
                              config: SolverConfig = DEFAULT_CONFIG) -> SuiteReport:
    """Ratio-sequence and bisection estimates within 0.1 of each other."""
    t0 = time.time()
    issues: list[CheckIssue] = []
    checked = 0
    for name, f in items:
        lim = estimate_threshold_liminf(f, config)
        bis = estimate_threshold_bisection(f, config)
        checked += 1
        if lim.is_npb != bis.is_npb:
            issues.append(CheckIssue(
                "estimator-agreement",
                f"{name}: liminf says {lim.describe()}, bisection says "
                f"{bis.describe()}"))
            continue
        if lim.is_npb:
            continue
        a, b = point_estimate(lim), point_estimate(bis)
        if abs(a - b) > AGREEMENT_TOL:
            issues.append(CheckIssue(
                "estimator-agreement",
                f"{name}: liminf {a:.4g} vs bisection {b:.4g} differ by "
                f"{abs(a - b):.4g} > {AGREEMENT_TOL}"))
    return _timed("estimator-agreement", checked, issues, t0)


def symbolic_vs_numeric_suite(items: Sequence[tuple[str, FuncExpr]],
                              config: SolverConfig = DEFAULT_CONFIG) -> SuiteReport:
    """Numeric estimate must land on (or inside) the symbolic claim."""
    t0 = time.time()
    issues: list[CheckIssue] = []
    notes: list[str] = []
    checked = 0
    for name, f in items:
        sym = compute_threshold(f)
        num = estimate_threshold_liminf(f, config)
        checked += 1
        if sym.is_unknown:
            notes.append(f"{name}: symbolic Unknown, numeric {num.describe()}")
            continue
        if sym.is_npb:
            if not num.is_npb:
                issues.append(CheckIssue(
                    "symbolic-vs-numeric",
                    f"{name}: symbolic NotProxBounded but numeric {num.describe()}"))
            continue
        if num.is_npb:
            issues.append(CheckIssue(
                "symbolic-vs-numeric",
                f"{name}: numeric NotProxBounded but symbolic {sym.describe()}"))
            continue
        pe = point_estimate(num)
        if sym.is_exact:
            tol = max(0.05, 0.02 * sym.value)
            if abs(pe - sym.value) > tol:
                issues.append(CheckIssue(
                    "symbolic-vs-numeric",
                    f"{name}: symbolic Exact({sym.value:g}) vs numeric {pe:.4g} "
                    f"(tolerance {tol:g})"))
        else:
            if not (sym.lo - 0.05 <= pe <= sym.hi + 0.05):
                issues.append(CheckIssue(
                    "symbolic-vs-numeric",
                    f"{name}: numeric {pe:.4g} outside symbolic "
                    f"[{sym.lo:g}, {sym.hi:g}] (+/- 0.05)"))
    return _timed("symbolic-vs-numeric", checked, issues, t0, notes)


def threshold_ordering_suite(rng: np.random.Generator, pairs: int = 20) -> SuiteReport:
    """f1 <= f2 (checked on probes) forces threshold(f1) >= threshold(f2)."""
    t0 = time.time()
    issues: list[CheckIssue] = []
    checked = 0
    probes = np.linspace(-10.0, 10.0, 50)
    for _ in range(pairs):
        a2 = float(rng.uniform(-4.0, 2.0))
        drop = float(rng.uniform(0.0, 3.0))
        slope = float(rng.uniform(-2.0, 2.0))
        const = float(rng.uniform(-2.0, 2.0))
        shift = float(rng.uniform(0.0, 2.0))
        f2 = quadratic1(a2, slope, const)
        f1 = quadratic1(a2 - drop, slope, const - shift)
        fv1 = np.asarray([evaluate(f1, float(p)) for p in probes])
        fv2 = np.asarray([evaluate(f2, float(p)) for p in probes])
        if (fv1 > fv2 + 1e-9).any():
            issues.append(CheckIssue(
                "threshold-ordering",
                f"generated pair violates f1 <= f2 on probes: {serialize(f1)} vs "
                f"{serialize(f2)}"))
            continue
        r1 = compute_threshold(f1)
        r2 = compute_threshold(f2)
        checked += 1
        if not (r1.is_exact and r2.is_exact):
            issues.append(CheckIssue(
                "threshold-ordering",
                f"quadratic threshold not Exact: {r1.describe()}, {r2.describe()}"))
            continue
        if r1.value < r2.value - 1e-12:
            issues.append(CheckIssue(
                "threshold-ordering",
                f"{serialize(f1)} <= {serialize(f2)} but thresholds "
                f"{r1.value:g} < {r2.value:g}"))
    return _timed("threshold-ordering", checked, issues, t0)


def scaling_suite(rng: np.random.Generator, pairs: int = 10,
                  config: SolverConfig = DEFAULT_CONFIG) -> SuiteReport:
    """threshold(lambda * f) = lambda * threshold(f) for concave quadratics."""
    t0 = time.time()
    issues: list[CheckIssue] = []
    checked = 0
    lams = rng.uniform(0.0, 5.0, pairs)
    curvs = rng.uniform(0.5, 4.0, pairs)
    for lam, c in zip(lams, curvs):
        lam, c = float(lam), float(c)
        f = Scale(lam, quadratic1(-c))
        want = lam * c
        sym = compute_threshold(f)
        checked += 1
        if not (sym.is_exact and abs(sym.value - want) <= 1e-12 * max(1.0, want)):
            issues.append(CheckIssue(
                "scaling",
                f"lambda={lam:g}, c={c:g}: symbolic {sym.describe()}, "
                f"want Exact({want:g})"))
            continue
        num = estimate_threshold_liminf(f, config)
        if num.is_npb or not (num.lo <= want <= num.hi):
            issues.append(CheckIssue(
                "scaling",
                f"lambda={lam:g}, c={c:g}: numeric {num.describe()} does not "
                f"bracket {want:g}"))
    return _timed("scaling", checked, issues, t0)


# ---------------------------------------------------------------------------
# structural diagnostics


def lsc_violations(f: FuncExpr) -> list[str]:
    """Sample finite 1-D cell endpoints for lower-semicontinuity failures.

    Diagnostics only: a piecewise definition taking the larger branch value
    at a shared boundary, or an indicator of a half-open interval, is legal
    input here but breaks lsc; callers surface these as notes.
    """
    if dim_of(f) != 1:
        return []
    endpoints: set[float] = set()

    def visit(g: FuncExpr):
        if isinstance(g, Piecewise):
            for cell in g.partition.cells:
                if isinstance(cell, Interval1D):
                    endpoints.update(v for v in (cell.lo, cell.hi)
                                     if math.isfinite(v))
            for p in g.pieces:
                visit(p)
        elif isinstance(g, Indicator):
            if isinstance(g.cell, Interval1D):
                endpoints.update(v for v in (g.cell.lo, g.cell.hi)
                                 if math.isfinite(v))
        elif isinstance(g, (Sum,)):
            for c in g.children:
                visit(c)
        elif isinstance(g, Scale):
            visit(g.child)

    visit(f)
    out: list[str] = []
    for b in sorted(endpoints):
        fb = evaluate(f, b)
        eps = 1e-6 * max(1.0, abs(b))
        around = min(evaluate(f, b - eps), evaluate(f, b + eps))
        if fb > around + 1e-6 * (1.0 + abs(around)):
            out.append(
                f"not lsc at x={b:g}: f({b:g}) = {fb:g} but nearby values "
                f"reach {around:g}")
    return out


def lsc_suite(items: Sequence[tuple[str, FuncExpr]]) -> SuiteReport:
    t0 = time.time()
    notes: list[str] = []
    checked = 0
    for name, f in items:
        checked += 1
        for msg in lsc_violations(f):
            notes.append(f"{name}: {msg}")
    return _timed("lsc-diagnostics", checked, [], t0, notes)


# ---------------------------------------------------------------------------
# entry points


def _with_schedules(named: Sequence[tuple[str, FuncExpr]],
                    config: SolverConfig) -> list[tuple[str, FuncExpr, list[float]]]:
    return [(name, f, valid_r_schedule(f, config)) for name, f in named]


def run_corpus(config: SolverConfig = DEFAULT_CONFIG,
               seed: int = DEFAULT_SEED) -> CheckSummary:
    """Every suite over the built-in corpus; deterministic for a fixed seed."""
    t0 = time.time()
    corpus = corpus_functions()
    scheduled = _with_schedules(corpus, config)
    extra = [
        ("piecewise{x<0: x^2; x>=0: -(x^2)}",
         parse_expr("piecewise{x<0: x^2; x>=0: -(x^2)}")),
        ("piecewise{x<0: -(x^2); x>=0: x^2}",
         parse_expr("piecewise{x<0: -(x^2); x>=0: x^2}")),
        ("-(3/2)*x^2", parse_expr("-(3/2)*x^2")),
        ("-(1/2)*x^2 + sin(x)", parse_expr("-(1/2)*x^2 + sin(x)")),
        ("compose(-(1/2)*u^2, -2*x)", parse_expr("compose(-(1/2)*u^2, -2*x)")),
        ("compose(-2*u, -(1/2)*x^2)", parse_expr("compose(-2*u, -(1/2)*x^2)")),
        ("-abs(x)", parse_expr("-abs(x)")),
        ("x^3", parse_expr("x^3")),
        ("-(x^4)", parse_expr("-(x^4)")),
        ("x^4", parse_expr("x^4")),
        ("sum of concave quadratics",
         Sum((quadratic1(-1.0), quadratic1(-2.0)))),
    ]
    ordering_pairs = [
        ("abs(x)", parse_expr("abs(x)"), "x^2 + 1", parse_expr("x^2 + 1")),
        ("max(x, 0)", parse_expr("max(x, 0)"), "abs(x)", parse_expr("abs(x)")),
        ("x^2", parse_expr("x^2"), "x^2 + 1", parse_expr("x^2 + 1")),
    ]
    rng = np.random.default_rng(seed)
    reports = (
        fenchel_identity_suite(scheduled, config),
        envelope_bounds_suite(scheduled, config),
        envelope_ordering_suite(ordering_pairs, config),
        convergence_suite(corpus, config),
        prox_consistency_suite(scheduled, config),
        estimator_agreement_suite(corpus + extra[:3], config),
        symbolic_vs_numeric_suite(corpus + extra, config),
        threshold_ordering_suite(rng),
        scaling_suite(rng, config=config),
        lsc_suite(corpus + extra[:2]),
    )
    return CheckSummary(reports, time.time() - t0)


def run_expression(f: FuncExpr, config: SolverConfig = DEFAULT_CONFIG,
                   seed: int = DEFAULT_SEED) -> CheckSummary:
    """The expression-level suites for one function."""
    del seed  # single-expression suites are grid-based and seed-free
    t0 = time.time()
    name = serialize(f)
    scheduled = _with_schedules([(name, f)], config)
    reports = (
        fenchel_identity_suite(scheduled, config),
        envelope_bounds_suite(scheduled, config),
        prox_consistency_suite(scheduled, config),
        estimator_agreement_suite([(name, f)], config),
        symbolic_vs_numeric_suite([(name, f)], config),
        lsc_suite([(name, f)]),
    )
    return CheckSummary(reports, time.time() - t0)


__all__ = [
    "AGREEMENT_TOL",
    "CheckIssue",
    "CheckSummary",
    "DEFAULT_SEED",
    "GLUED_BRANCHES",
    "IDENTITY_TOL",
    "SuiteReport",
    "convergence_suite",
    "corpus_functions",
    "envelope_bounds_suite",
    "envelope_ordering_suite",
    "estimator_agreement_suite",
    "fenchel_identity_suite",
    "lsc_suite",
    "lsc_violations",
    "prox_consistency_suite",
    "run_corpus",
    "run_expression",
    "scaling_suite",
    "symbolic_vs_numeric_suite",
    "threshold_ordering_suite",
    "valid_r_schedule",
]
