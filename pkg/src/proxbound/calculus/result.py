"""Threshold results with derivation traces.

A ThresholdResult is a certified claim about the prox-boundedness threshold
of a function, viewed as a subset of [0, +inf]: Exact(v) = {v}, Interval(lo,
hi) = [lo, hi] (hi = +inf admits "possibly not prox-bounded"), NotProxBounded
= {+inf}, Unknown = [0, +inf]. Claims from independent rules combine by
intersection; an empty intersection means some rule is wrong and aborts.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Iterable

INF = math.inf


class SoundnessError(AssertionError):
    """Two certified claims contradict each other; a rule must be buggy."""


class ResultKind(enum.Enum):
    EXACT = "exact"
    INTERVAL = "interval"
    NOT_PROX_BOUNDED = "not_prox_bounded"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class TraceEntry:
    """One applied rule: name, statement id, human-readable inputs, bound."""

    rule: str
    paper_id: str
    inputs: str
    bound: str

    def to_dict(self) -> dict:
        return {"rule": self.rule, "paper_id": self.paper_id,
                "bound": self.bound}


def _fmt_bound(v: float) -> str:
    return "inf" if v == INF else repr(float(v))


@dataclass(frozen=True)
class ThresholdResult:
    kind: ResultKind
    lo: float = 0.0
    hi: float = INF
    trace: tuple[TraceEntry, ...] = ()

    def __post_init__(self):
        if math.isnan(self.lo) or math.isnan(self.hi):
            raise ValueError("threshold bounds must not be NaN")
        if self.lo < 0 or self.hi < self.lo:
            raise ValueError(f"bad threshold bounds [{self.lo}, {self.hi}]")
        object.__setattr__(self, "lo", self.lo + 0.0)
        object.__setattr__(self, "hi", self.hi + 0.0)

    # -- constructors -------------------------------------------------------

    @staticmethod
    def exact(v: float, trace: Iterable[TraceEntry] = ()) -> "ThresholdResult":
        if math.isinf(v):
            return ThresholdResult.not_prox_bounded(trace)
        return ThresholdResult(ResultKind.EXACT, v, v, tuple(trace))

    @staticmethod
    def interval(lo: float, hi: float,
                 trace: Iterable[TraceEntry] = ()) -> "ThresholdResult":
        trace = tuple(trace)
        if lo == hi:
            return ThresholdResult.exact(lo, trace)
        if lo == 0.0 and hi == INF:
            return ThresholdResult(ResultKind.UNKNOWN, 0.0, INF, trace)
        return ThresholdResult(ResultKind.INTERVAL, lo, hi, trace)

    @staticmethod
    def not_prox_bounded(trace: Iterable[TraceEntry] = ()) -> "ThresholdResult":
        return ThresholdResult(ResultKind.NOT_PROX_BOUNDED, INF, INF,
                               tuple(trace))

    @staticmethod
    def unknown(trace: Iterable[TraceEntry] = ()) -> "ThresholdResult":
        return ThresholdResult(ResultKind.UNKNOWN, 0.0, INF, tuple(trace))

    # -- queries ------------------------------------------------------------

    @property
    def is_exact(self) -> bool:
        return self.kind is ResultKind.EXACT

    @property
    def is_interval(self) -> bool:
        return self.kind is ResultKind.INTERVAL

    @property
    def is_npb(self) -> bool:
        return self.kind is ResultKind.NOT_PROX_BOUNDED

    @property
    def is_unknown(self) -> bool:
        return self.kind is ResultKind.UNKNOWN

    @property
    def value(self) -> float:
        if not self.is_exact:
            raise ValueError(f"no exact value on a {self.kind.value} result")
        return self.lo

    def is_resolved(self) -> bool:
        """Exact or Interval: carries a usable finite-or-bounded claim."""
        return self.kind in (ResultKind.EXACT, ResultKind.INTERVAL)

    # -- algebra ------------------------------------------------------------

    def with_trace(self, *entries: TraceEntry) -> "ThresholdResult":
        return ThresholdResult(self.kind, self.lo, self.hi,
                               self.trace + tuple(entries))

    def scaled(self, lam: float, trace: Iterable[TraceEntry] = ()) -> "ThresholdResult":
        """The claim for lam*f given this claim for f (lam >= 0)."""
        if lam < 0:
            raise ValueError("scale factor must be nonnegative")
        trace = self.trace + tuple(trace)
        if lam == 0.0:
            return ThresholdResult.exact(0.0, trace)
        if self.is_npb:
            return ThresholdResult.not_prox_bounded(trace)
        if self.is_unknown:
            return ThresholdResult(ResultKind.UNKNOWN, 0.0, INF, trace)
        return ThresholdResult.interval(lam * self.lo, lam * self.hi, trace)

    def intersect(self, other: "ThresholdResult") -> "ThresholdResult":
        lo = max(self.lo, other.lo)
        hi = min(self.hi, other.hi)
        trace = self.trace + other.trace
        if lo > hi:
            raise SoundnessError(
                "contradictory threshold claims: "
                f"[{_fmt_bound(self.lo)}, {_fmt_bound(self.hi)}] vs "
                f"[{_fmt_bound(other.lo)}, {_fmt_bound(other.hi)}]; trace: "
                + "; ".join(f"{t.rule}[{t.paper_id}] {t.bound}" for t in trace))
        if lo == hi == INF:
            return ThresholdResult.not_prox_bounded(trace)
        return ThresholdResult.interval(lo, hi, trace)

    # -- rendering ----------------------------------------------------------

    def describe(self) -> str:
        if self.is_exact:
            return f"Exact({_fmt_bound(self.lo)})"
        if self.is_interval:
            return f"Interval({_fmt_bound(self.lo)}, {_fmt_bound(self.hi)})"
        if self.is_npb:
            return "NotProxBounded"
        return "Unknown"

    def trace_dicts(self) -> list[dict]:
        return [t.to_dict() for t in self.trace]


def intersect_all(results: Iterable[ThresholdResult]) -> ThresholdResult:
    results = list(results)
    if not results:
        return ThresholdResult.unknown()
    out = results[0]
    for r in results[1:]:
        out = out.intersect(r)
    return out


def entry(rule: str, paper_id: str, inputs: str, bound: str) -> TraceEntry:
    return TraceEntry(rule, paper_id, inputs, bound)
