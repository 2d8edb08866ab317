"""Command-line front end.

Every verb builds a request model, calls the matching handler from
``proxbound.service`` in-process, renders the response as text, CSV, or
JSON, and exits with the code the handler assigned. Running against a
remote instance of the HTTP app would exercise exactly the same models.

Exit codes: 0 success, 1 check-suite violation, 2 bad input (parse or
option errors), 3 divergence (not prox-bounded, or envelope -inf), 4
threshold unknown.
"""

from __future__ import annotations

import argparse
import contextlib
import json
import os
import sys
import tempfile
from typing import Optional, Sequence

from pydantic import ValidationError

from .service import (
    EXIT_INPUT_ERROR,
    AxisRange,
    CheckRequest,
    CheckResponse,
    ConjugateRequest,
    ConjugateResponse,
    EnvelopeRequest,
    EnvelopeResponse,
    EstimateRequest,
    EstimateResponse,
    GridRequest,
    GridResponse,
    ProxRequest,
    ProxResponse,
    ServiceError,
    SolverOptions,
    ThresholdResponse,
    handle_check,
    handle_conjugate,
    handle_envelope,
    handle_estimate,
    handle_grid,
    handle_prox,
    handle_threshold,
)
from .service import ThresholdRequest as _ThresholdRequest

POINT_FLAGS = ("--x", "--range")
VALUE_FLAGS = frozenset({
    "--r", "--x", "--range", "--steps", "--format", "--out", "--max-radius",
    "--divergence-bound", "--method", "--seed",
})
BOOL_FLAGS = frozenset({"--function-only", "--corpus", "-h", "--help"})


def _parse_point(text: str) -> list[float]:
    try:
        coords = [float(p) for p in text.split(",")]
    except ValueError:
        raise ServiceError(f"bad point {text!r}: expected float[,float]",
                           EXIT_INPUT_ERROR)
    if not 1 <= len(coords) <= 2:
        raise ServiceError(f"bad point {text!r}: expected 1 or 2 coordinates",
                           EXIT_INPUT_ERROR)
    return coords


def _parse_ranges(text: str) -> list[AxisRange]:
    ranges = []
    for part in text.split(","):
        pieces = part.split(":")
        try:
            lo, hi = (float(p) for p in pieces)
        except ValueError:
            raise ServiceError(f"bad range {part!r}: expected a:b with a < b",
                               EXIT_INPUT_ERROR)
        if not lo < hi:
            raise ServiceError(f"bad range {part!r}: expected a:b with a < b",
                               EXIT_INPUT_ERROR)
        ranges.append(AxisRange(lo=lo, hi=hi))
    if not 1 <= len(ranges) <= 2:
        raise ServiceError(f"bad range {text!r}: expected a:b or a:b,c:d",
                           EXIT_INPUT_ERROR)
    return ranges


def _mend_argv(argv: Sequence[str]) -> list[str]:
    # argparse would read a value like "-5:5" or an expression like
    # "-(x^2)" as an option token. Glue point and range values onto their
    # flag with '=', then pull the expression out and reattach it behind a
    # '--' separator so a leading minus cannot be mistaken for a flag.
    glued: list[str] = []
    it = iter(argv)
    for tok in it:
        if tok in POINT_FLAGS:
            val = next(it, None)
            glued.append(tok if val is None else f"{tok}={val}")
        else:
            glued.append(tok)
    if not glued:
        return glued
    verb, rest = glued[0], glued[1:]
    if verb.startswith("-"):
        return glued
    kept: list[str] = []
    expr = None
    i = 0
    while i < len(rest):
        tok = rest[i]
        if tok == "--":
            kept.extend(rest[i:])
            break
        is_flag = tok.split("=", 1)[0] in (VALUE_FLAGS | BOOL_FLAGS)
        if expr is None and not is_flag:
            expr = tok
            i += 1
            continue
        kept.append(tok)
        if tok in VALUE_FLAGS and i + 1 < len(rest):
            kept.append(rest[i + 1])
            i += 2
        else:
            i += 1
    if expr is not None:
        kept.extend(["--", expr])
    return [verb] + kept


def _add_common(sp: argparse.ArgumentParser, formats: Sequence[str]) -> None:
    sp.add_argument("--format", choices=list(formats), default=None,
                    help="output format (default: %s)" % formats[0])
    sp.add_argument("--out", metavar="PATH",
                    help="write output to PATH atomically instead of stdout")
    sp.add_argument("--max-radius", type=float, default=None,
                    help="largest scan radius for the numeric engine")
    sp.add_argument("--divergence-bound", type=float, default=None,
                    help="value below which the objective counts as divergent")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="proxbound",
        description="Thresholds of prox-boundedness, Moreau envelopes, and "
                    "numeric cross-checks for a small function language.",
    )
    sub = p.add_subparsers(dest="verb", required=True)

    t = sub.add_parser("threshold", help="certified threshold with trace")
    t.add_argument("expr")
    _add_common(t, ("text", "json"))

    e = sub.add_parser("envelope", help="Moreau envelope at a point or grid")
    e.add_argument("expr")
    e.add_argument("--r", type=float, default=None, help="envelope parameter")
    e.add_argument("--x", default=None, help="evaluation point, float[,float]")
    e.add_argument("--range", dest="ranges", default=None,
                   help="grid range a:b[,c:d]")
    e.add_argument("--steps", type=int, default=101, help="grid points per axis")
    e.add_argument("--function-only", action="store_true",
                   help="tabulate f itself instead of its envelope")
    _add_common(e, ("csv", "json", "text"))

    x = sub.add_parser("prox", help="proximal points at x")
    x.add_argument("expr")
    x.add_argument("--r", type=float, required=True)
    x.add_argument("--x", required=True, help="evaluation point, float[,float]")
    _add_common(x, ("text", "json"))

    c = sub.add_parser("conjugate", help="Fenchel conjugate at a dual point")
    c.add_argument("expr")
    c.add_argument("--x", required=True, help="dual point, float[,float]")
    _add_common(c, ("text", "json"))

    s = sub.add_parser("estimate", help="numeric threshold estimators")
    s.add_argument("expr")
    s.add_argument("--method", choices=["liminf", "bisection", "both"],
                   default="both")
    _add_common(s, ("text", "json"))

    k = sub.add_parser("check", help="run consistency suites")
    k.add_argument("expr", nargs="?", default=None)
    k.add_argument("--corpus", action="store_true",
                   help="run the built-in corpus instead of one expression")
    k.add_argument("--seed", type=int, default=0)
    _add_common(k, ("text", "json"))

    return p


def _options(args: argparse.Namespace) -> SolverOptions:
    return SolverOptions(max_radius=args.max_radius,
                         divergence_bound=args.divergence_bound)


def _dispatch(args: argparse.Namespace):
    opts = _options(args)
    if args.verb == "threshold":
        return "threshold", handle_threshold(_ThresholdRequest(expr=args.expr))
    if args.verb == "envelope":
        if (args.x is None) == (args.ranges is None):
            raise ServiceError("envelope needs exactly one of --x or --range",
                               EXIT_INPUT_ERROR)
        if args.ranges is not None:
            req = GridRequest(expr=args.expr, r=args.r,
                              ranges=_parse_ranges(args.ranges),
                              steps=args.steps,
                              function_only=args.function_only,
                              options=opts)
            return "envelope-grid", handle_grid(req)
        if args.r is None:
            raise ServiceError("envelope needs --r", EXIT_INPUT_ERROR)
        if args.function_only:
            raise ServiceError("--function-only needs --range",
                               EXIT_INPUT_ERROR)
        req = EnvelopeRequest(expr=args.expr, r=args.r,
                              x=_parse_point(args.x), options=opts)
        return "envelope", handle_envelope(req)
    if args.verb == "prox":
        req = ProxRequest(expr=args.expr, r=args.r, x=_parse_point(args.x),
                          options=opts)
        return "prox", handle_prox(req)
    if args.verb == "conjugate":
        req = ConjugateRequest(expr=args.expr, y=_parse_point(args.x),
                               options=opts)
        return "conjugate", handle_conjugate(req)
    if args.verb == "estimate":
        req = EstimateRequest(expr=args.expr, method=args.method, options=opts)
        return "estimate", handle_estimate(req)
    req = CheckRequest(expr=args.expr, corpus=args.corpus, seed=args.seed,
                       options=opts)
    return "check", handle_check(req)


# ---------------------------------------------------------------------------
# rendering


def _fmt(v) -> str:
    return v if isinstance(v, str) else repr(float(v))


def _render_csv(verb: str, resp) -> str:
    if verb != "envelope-grid":
        raise ServiceError("csv output is only available for envelope grids",
                           EXIT_INPUT_ERROR)
    lines = [",".join(resp.columns)]
    lines.extend(",".join(_fmt(cell) for cell in row) for row in resp.rows)
    return "\n".join(lines) + "\n"


def _render_json(verb: str, resp) -> str:
    payload = {"verb": verb}
    payload.update(resp.model_dump())
    return json.dumps(payload, indent=2) + "\n"


def _claim_lines(label: str, claim, indent: str = "") -> list[str]:
    lines = [f"{indent}{label}: {claim.summary}"]
    lines.extend(f"{indent}  {e.rule} [{e.paper_id}] {e.bound}"
                 for e in claim.trace)
    return lines


def _render_text(verb: str, resp) -> str:
    if verb == "threshold":
        assert isinstance(resp, ThresholdResponse)
        lines = [f"expr: {resp.expr}"]
        lines.extend(_claim_lines("threshold", resp.result))
        return "\n".join(lines) + "\n"
    if verb == "envelope":
        assert isinstance(resp, EnvelopeResponse)
        pts = ", ".join("(%s)" % ", ".join(repr(c) for c in p)
                        for p in resp.minimizers)
        lines = [f"expr: {resp.expr}",
                 f"e_{{{resp.r}}}f({', '.join(map(repr, resp.x))}) = "
                 f"{_fmt(resp.value)}"]
        if resp.value == "-inf":
            lines.append("r below threshold")
            if resp.witness:
                lines.append("witness: (%s)" %
                             ", ".join(repr(c) for c in resp.witness))
        elif pts:
            lines.append(f"minimizers: {pts}")
        if not resp.conclusive:
            lines.append("warning: scan did not stabilize; value may be off")
        return "\n".join(lines) + "\n"
    if verb == "envelope-grid":
        assert isinstance(resp, GridResponse)
        if resp.diverged_everywhere:
            return (f"expr: {resp.expr}\n"
                    f"envelope is -inf at every grid point: "
                    f"{resp.message}\n")
        return _render_csv(verb, resp)
    if verb == "prox":
        assert isinstance(resp, ProxResponse)
        pts = ", ".join("(%s)" % ", ".join(repr(c) for c in p)
                        for p in resp.points)
        return (f"expr: {resp.expr}\n"
                f"prox points at {resp.x} with r={resp.r}: {pts}\n"
                f"envelope value: {repr(resp.envelope_value)}\n")
    if verb == "conjugate":
        assert isinstance(resp, ConjugateResponse)
        return (f"expr: {resp.expr}\n"
                f"f*({', '.join(map(repr, resp.y))}) = {_fmt(resp.value)}\n")
    if verb == "estimate":
        assert isinstance(resp, EstimateResponse)
        lines = [f"expr: {resp.expr}"]
        for name, claim in resp.results.items():
            label = claim.summary
            if claim.kind == "not_prox_bounded":
                label += " (suspected)"
            est = resp.estimates[name]
            lines.append(f"{name}: {label}   point estimate: {_fmt(est)}")
        if resp.disagreement is not None:
            lines.append(f"disagreement: {repr(resp.disagreement)}")
        if resp.warning:
            lines.append(f"warning: {resp.warning}")
        return "\n".join(lines) + "\n"
    assert isinstance(resp, CheckResponse)
    lines = [f"target: {resp.target}"]
    for suite in resp.suites:
        status = "PASS" if suite.passed else "FAIL"
        lines.append(f"[{status}] {suite.name} ({suite.checked} checks, "
                     f"{suite.elapsed_seconds:.2f}s)")
        lines.extend(f"    issue: {msg}" for msg in suite.issues)
        lines.extend(f"    note: {msg}" for msg in suite.notes)
    verdict = "PASS" if resp.passed else "FAIL"
    lines.append(f"result: {verdict} ({resp.elapsed_seconds:.2f}s)")
    return "\n".join(lines) + "\n"


def _render(verb: str, resp, fmt: str) -> str:
    if fmt == "json":
        return _render_json(verb, resp)
    if fmt == "csv":
        return _render_csv(verb, resp)
    return _render_text(verb, resp)


def _atomic_write(path: str, text: str) -> None:
    target = os.path.abspath(path)
    fd, tmp = tempfile.mkstemp(dir=os.path.dirname(target),
                               prefix=".proxbound-")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, target)
    except BaseException:
        with contextlib.suppress(OSError):
            os.unlink(tmp)
        raise


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        _atomic_write(out, text)
    else:
        sys.stdout.write(text)


def main(argv: Optional[Sequence[str]] = None) -> int:
    raw = list(sys.argv[1:] if argv is None else argv)
    try:
        args = build_parser().parse_args(_mend_argv(raw))
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        verb, resp = _dispatch(args)
        fmt = args.format or ("csv" if verb == "envelope-grid" else "text")
        text = _render(verb, resp, fmt)
    except ServiceError as exc:
        print(f"error: {exc.message}", file=sys.stderr)
        return exc.exit_code
    except ValidationError as exc:
        first = exc.errors()[0]
        where = ".".join(str(p) for p in first["loc"]) or "request"
        print(f"error: {where}: {first['msg']}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    _emit(text, args.out)
    message = getattr(resp, "message", None)
    if message and fmt != "text":
        print(message, file=sys.stderr)
    return resp.exit_code


if __name__ == "__main__":
    sys.exit(main())
