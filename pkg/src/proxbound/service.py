"""Request/response models and handlers shared by the HTTP app and the CLI.

The handlers hold all verb logic: they take a validated request model and
return a response model plus the process exit code the CLI contract assigns
to that outcome. The FastAPI app and the command-line front end are both
thin wrappers over them, so a command behaves identically in either guise.
"""

from __future__ import annotations

import math
from typing import Literal, Optional, Union

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field, model_validator

from . import checks
from .calculus import ThresholdResult, compute_threshold
from .funcdsl import FuncExpr, ParseError, dim_of, evaluate, parse_expr, serialize
from .numerics import (
    DEFAULT_CONFIG,
    ImproperFunctionError,
    ProxUndefinedError,
    SolverConfig,
    estimate_threshold_bisection,
    estimate_threshold_liminf,
    fenchel_conjugate,
    moreau_envelope,
    point_estimate,
    prox_points,
)

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_INPUT_ERROR = 2
EXIT_DIVERGED = 3
EXIT_UNKNOWN = 4

INF = math.inf

JsonFloat = Union[float, Literal["inf", "-inf"]]


class ServiceError(Exception):
    """Verb failure with a CLI exit code and an HTTP status."""

    def __init__(self, message: str, exit_code: int, http_status: int = 400):
        super().__init__(message)
        self.message = message
        self.exit_code = exit_code
        self.http_status = http_status


def _json_float(v: float) -> JsonFloat:
    if v == INF:
        return "inf"
    if v == -INF:
        return "-inf"
    return float(v)


def _parse(expr: str) -> FuncExpr:
    try:
        return parse_expr(expr)
    except ParseError as exc:
        raise ServiceError(str(exc), EXIT_INPUT_ERROR, 400) from exc


# ---------------------------------------------------------------------------
# requests


class SolverOptions(BaseModel):
    """Optional overrides for the numeric engine, mirroring the CLI flags."""

    max_radius: Optional[float] = Field(default=None, gt=0)
    divergence_bound: Optional[float] = Field(default=None, gt=0)

    def build(self) -> SolverConfig:
        cfg = DEFAULT_CONFIG
        changes = {}
        if self.max_radius is not None:
            changes["max_radius"] = self.max_radius
        if self.divergence_bound is not None:
            changes["divergence_bound"] = self.divergence_bound
        return cfg.replace(**changes) if changes else cfg


class ThresholdRequest(BaseModel):
    expr: str


class EnvelopeRequest(BaseModel):
    expr: str
    r: float = Field(ge=0)
    x: list[float] = Field(min_length=1, max_length=2)
    options: SolverOptions = SolverOptions()


class AxisRange(BaseModel):
    lo: float
    hi: float

    @model_validator(mode="after")
    def _ordered(self):
        if not (self.lo < self.hi):
            raise ValueError("range needs lo < hi")
        return self


class GridRequest(BaseModel):
    expr: str
    r: Optional[float] = Field(default=None, ge=0)
    ranges: list[AxisRange] = Field(min_length=1, max_length=2)
    steps: int = Field(default=101, ge=2)
    function_only: bool = False
    options: SolverOptions = SolverOptions()

    @model_validator(mode="after")
    def _needs_r(self):
        if not self.function_only and self.r is None:
            raise ValueError("r is required unless function_only is set")
        return self


class ProxRequest(BaseModel):
    expr: str
    r: float = Field(gt=0)
    x: list[float] = Field(min_length=1, max_length=2)
    options: SolverOptions = SolverOptions()


class ConjugateRequest(BaseModel):
    expr: str
    y: list[float] = Field(min_length=1, max_length=2)
    options: SolverOptions = SolverOptions()


class EstimateRequest(BaseModel):
    expr: str
    method: Literal["liminf", "bisection", "both"] = "both"
    options: SolverOptions = SolverOptions()


class CheckRequest(BaseModel):
    expr: Optional[str] = None
    corpus: bool = False
    seed: int = 0
    options: SolverOptions = SolverOptions()

    @model_validator(mode="after")
    def _one_target(self):
        if (self.expr is None) == (not self.corpus):
            raise ValueError("give exactly one of expr or corpus")
        return self


# ---------------------------------------------------------------------------
# responses


class TraceEntryModel(BaseModel):
    rule: str
    paper_id: str
    bound: str


class ThresholdClaim(BaseModel):
    kind: Literal["exact", "interval", "not_prox_bounded", "unknown"]
    lo: JsonFloat
    hi: JsonFloat
    value: Optional[float] = None
    summary: str
    trace: list[TraceEntryModel]


def _claim(res: ThresholdResult) -> ThresholdClaim:
    return ThresholdClaim(
        kind=res.kind.value,
        lo=_json_float(res.lo),
        hi=_json_float(res.hi),
        value=res.value if res.is_exact else None,
        summary=res.describe(),
        trace=[TraceEntryModel(**e.to_dict()) for e in res.trace],
    )


class ThresholdResponse(BaseModel):
    expr: str
    result: ThresholdClaim
    exit_code: int


class EnvelopeResponse(BaseModel):
    expr: str
    r: float
    x: list[float]
    value: JsonFloat
    minimizers: list[list[float]]
    witness: Optional[list[float]] = None
    conclusive: bool
    evaluations: int
    exit_code: int


class GridResponse(BaseModel):
    expr: str
    r: Optional[float]
    function_only: bool
    columns: list[str]
    rows: list[list[JsonFloat]]
    diverged_everywhere: bool
    message: Optional[str] = None
    exit_code: int


class ProxResponse(BaseModel):
    expr: str
    r: float
    x: list[float]
    points: list[list[float]]
    envelope_value: float
    exit_code: int


class ConjugateResponse(BaseModel):
    expr: str
    y: list[float]
    value: JsonFloat
    exit_code: int


class EstimateResponse(BaseModel):
    expr: str
    method: str
    results: dict[str, ThresholdClaim]
    estimates: dict[str, JsonFloat]
    disagreement: Optional[float] = None
    warning: Optional[str] = None
    exit_code: int


class SuiteModel(BaseModel):
    name: str
    checked: int
    passed: bool
    issues: list[str]
    notes: list[str]
    elapsed_seconds: float


class CheckResponse(BaseModel):
    target: str
    passed: bool
    suites: list[SuiteModel]
    elapsed_seconds: float
    exit_code: int


class HealthResponse(BaseModel):
    status: str
    version: str


# ---------------------------------------------------------------------------
# handlers


def handle_threshold(req: ThresholdRequest) -> ThresholdResponse:
    f = _parse(req.expr)
    res = compute_threshold(f)
    if res.is_npb:
        code = EXIT_DIVERGED
    elif res.is_unknown:
        code = EXIT_UNKNOWN
    else:
        code = EXIT_OK
    return ThresholdResponse(expr=serialize(f), result=_claim(res), exit_code=code)


def _point(f: FuncExpr, x: list[float]):
    if len(x) != dim_of(f):
        raise ServiceError(
            f"point of length {len(x)} for a function of dimension {dim_of(f)}",
            EXIT_INPUT_ERROR, 400)
    return x[0] if len(x) == 1 else tuple(x)


def handle_envelope(req: EnvelopeRequest) -> EnvelopeResponse:
    f = _parse(req.expr)
    cfg = req.options.build()
    pt = _point(f, req.x)
    try:
        env = moreau_envelope(f, req.r, pt, cfg)
    except ImproperFunctionError as exc:
        raise ServiceError(f"improper function: {exc}", EXIT_INPUT_ERROR, 422) from exc
    code = EXIT_DIVERGED if env.diverged else EXIT_OK
    return EnvelopeResponse(
        expr=serialize(f), r=req.r, x=list(req.x),
        value=_json_float(env.value),
        minimizers=[list(p) for p in env.minimizers],
        witness=list(env.witness) if env.witness else None,
        conclusive=env.conclusive,
        evaluations=env.evaluations,
        exit_code=code,
    )


def handle_grid(req: GridRequest) -> GridResponse:
    f = _parse(req.expr)
    cfg = req.options.build()
    dim = dim_of(f)
    if len(req.ranges) != dim:
        raise ServiceError(
            f"{len(req.ranges)} range(s) for a function of dimension {dim}",
            EXIT_INPUT_ERROR, 400)
    axes = [
        [a.lo + i * (a.hi - a.lo) / (req.steps - 1) for i in range(req.steps)]
        for a in req.ranges
    ]
    rows: list[list[JsonFloat]] = []
    any_finite = False
    if dim == 1:
        columns = ["x", "value"]
        for x in axes[0]:
            if req.function_only:
                v = evaluate(f, x)
            else:
                v = moreau_envelope(f, req.r, x, cfg).value
            any_finite = any_finite or math.isfinite(v)
            rows.append([x, _json_float(v)])
    else:
        columns = ["x", "y", "value"]
        for x in axes[0]:
            for y in axes[1]:
                if req.function_only:
                    v = evaluate(f, (x, y))
                else:
                    v = moreau_envelope(f, req.r, (x, y), cfg).value
                any_finite = any_finite or math.isfinite(v)
                rows.append([x, y, _json_float(v)])
    diverged = not req.function_only and not any_finite
    return GridResponse(
        expr=serialize(f), r=req.r, function_only=req.function_only,
        columns=columns, rows=rows,
        diverged_everywhere=diverged,
        message="r below threshold" if diverged else None,
        exit_code=EXIT_DIVERGED if diverged else EXIT_OK,
    )


def handle_prox(req: ProxRequest) -> ProxResponse:
    f = _parse(req.expr)
    cfg = req.options.build()
    pt = _point(f, req.x)
    try:
        env = moreau_envelope(f, req.r, pt, cfg)
        pts = prox_points(f, req.r, pt, cfg)
    except ProxUndefinedError as exc:
        raise ServiceError(str(exc), EXIT_DIVERGED, 422) from exc
    except ImproperFunctionError as exc:
        raise ServiceError(f"improper function: {exc}", EXIT_INPUT_ERROR, 422) from exc
    if env.diverged or not env.conclusive:
        raise ServiceError("prox undefined: envelope objective is unbounded below",
                           EXIT_DIVERGED, 422)
    return ProxResponse(
        expr=serialize(f), r=req.r, x=list(req.x),
        points=[list(p) for p in pts],
        envelope_value=env.value,
        exit_code=EXIT_OK,
    )


def handle_conjugate(req: ConjugateRequest) -> ConjugateResponse:
    f = _parse(req.expr)
    cfg = req.options.build()
    pt = _point(f, req.y)
    try:
        val = fenchel_conjugate(f, pt, cfg)
    except ImproperFunctionError as exc:
        raise ServiceError(f"improper function: {exc}", EXIT_INPUT_ERROR, 422) from exc
    return ConjugateResponse(
        expr=serialize(f), y=list(req.y), value=_json_float(val),
        exit_code=EXIT_OK,
    )


def handle_estimate(req: EstimateRequest) -> EstimateResponse:
    f = _parse(req.expr)
    cfg = req.options.build()
    methods = ["liminf", "bisection"] if req.method == "both" else [req.method]
    results: dict[str, ThresholdClaim] = {}
    estimates: dict[str, JsonFloat] = {}
    raw: dict[str, ThresholdResult] = {}
    for m in methods:
        fn = estimate_threshold_liminf if m == "liminf" else estimate_threshold_bisection
        res = fn(f, cfg)
        raw[m] = res
        results[m] = _claim(res)
        estimates[m] = _json_float(point_estimate(res))
    disagreement = None
    warning = None
    if len(raw) == 2:
        a, b = (point_estimate(r) for r in raw.values())
        if math.isinf(a) and math.isinf(b):
            disagreement = 0.0
        elif math.isinf(a) or math.isinf(b):
            warning = "methods disagree on prox-boundedness"
        else:
            disagreement = abs(a - b)
            if disagreement > checks.AGREEMENT_TOL:
                warning = (f"estimates differ by {disagreement:.4g} "
                           f"(> {checks.AGREEMENT_TOL})")
    code = EXIT_DIVERGED if all(r.is_npb for r in raw.values()) else EXIT_OK
    return EstimateResponse(
        expr=serialize(f), method=req.method, results=results,
        estimates=estimates, disagreement=disagreement, warning=warning,
        exit_code=code,
    )


def handle_check(req: CheckRequest) -> CheckResponse:
    cfg = req.options.build()
    if req.corpus:
        summary = checks.run_corpus(cfg, req.seed)
        target = "corpus"
    else:
        f = _parse(req.expr)
        summary = checks.run_expression(f, cfg, req.seed)
        target = serialize(f)
    return CheckResponse(
        target=target,
        passed=summary.passed,
        suites=[SuiteModel(
            name=r.name, checked=r.checked, passed=r.passed,
            issues=[i.message for i in r.issues], notes=list(r.notes),
            elapsed_seconds=r.elapsed,
        ) for r in summary.reports],
        elapsed_seconds=summary.elapsed,
        exit_code=EXIT_OK if summary.passed else EXIT_CHECK_FAILED,
    )


# ---------------------------------------------------------------------------
# HTTP app


def _wrap(handler, req):
    try:
        return handler(req)
    except ServiceError as exc:
        raise HTTPException(status_code=exc.http_status, detail=exc.message)


def create_app() -> FastAPI:
    from . import __version__

    app = FastAPI(
        title="prox-boundedness toolkit",
        description="Thresholds of prox-boundedness, Moreau envelopes, and "
                    "their cross-checks.",
        version=__version__,
    )

    @app.get("/health", response_model=HealthResponse)
    def health() -> HealthResponse:
        return HealthResponse(status="ok", version=__version__)

    @app.post("/threshold", response_model=ThresholdResponse)
    def threshold(req: ThresholdRequest) -> ThresholdResponse:
        return _wrap(handle_threshold, req)

    @app.post("/envelope", response_model=EnvelopeResponse)
    def envelope(req: EnvelopeRequest) -> EnvelopeResponse:
        return _wrap(handle_envelope, req)

    @app.post("/envelope/grid", response_model=GridResponse)
    def grid(req: GridRequest) -> GridResponse:
        return _wrap(handle_grid, req)

    @app.post("/prox", response_model=ProxResponse)
    def prox(req: ProxRequest) -> ProxResponse:
        return _wrap(handle_prox, req)

    @app.post("/conjugate", response_model=ConjugateResponse)
    def conjugate(req: ConjugateRequest) -> ConjugateResponse:
        return _wrap(handle_conjugate, req)

    @app.post("/estimate", response_model=EstimateResponse)
    def estimate(req: EstimateRequest) -> EstimateResponse:
        return _wrap(handle_estimate, req)

    @app.post("/check", response_model=CheckResponse)
    def check(req: CheckRequest) -> CheckResponse:
        return _wrap(handle_check, req)

    return app


app = create_app()
