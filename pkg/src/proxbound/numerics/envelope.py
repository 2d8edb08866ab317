"""Moreau envelopes, proximal points, and the conjugate cross-check path."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..funcdsl import (
    Affine,
    FuncExpr,
    Sum,
    dim_of,
    scaled_identity_quadratic,
    shifted_quadratic,
)
from .config import DEFAULT_CONFIG, SolverConfig
from .engine import ImproperFunctionError, ScanResult, minimize

INF = math.inf


class ProxUndefinedError(ValueError):
    """Raised when the envelope infimum is -inf and no proximal point exists."""


@dataclass(frozen=True)
class EnvelopeResult:
    """Envelope value at one point, with the minimizers that achieve it.

    value is -inf when the scan certified divergence (witness holds the
    offending point). conclusive is False only when the scan ran out of
    radius without either stabilizing or crossing the divergence bound.
    """

    value: float
    minimizers: tuple[tuple[float, ...], ...]
    witness: Optional[tuple[float, ...]]
    r: float
    x: tuple[float, ...]
    evaluations: int
    conclusive: bool

    @property
    def diverged(self) -> bool:
        return self.value == -INF


def _as_center(x, dim: int) -> np.ndarray:
    c = np.asarray(x, dtype=float).reshape(-1)
    if c.shape[0] != dim:
        raise ValueError(f"point of length {c.shape[0]} for dimension {dim}")
    return c


def _from_scan(scan: ScanResult, r: float, center: np.ndarray) -> EnvelopeResult:
    return EnvelopeResult(
        value=scan.value,
        minimizers=scan.minimizers,
        witness=scan.witness,
        r=float(r),
        x=tuple(float(v) for v in center),
        evaluations=scan.evaluations,
        conclusive=scan.kind != "inconclusive",
    )


def moreau_envelope(f: FuncExpr, r: float, x,
                    config: SolverConfig = DEFAULT_CONFIG) -> EnvelopeResult:
    """inf_y f(y) + (r/2)|y - x|^2, scanned around x.

    r = 0 degenerates to a plain infimum of f. Improper input (f identically
    +inf on every probe) raises ImproperFunctionError.
    """
    if r < 0:
        raise ValueError("prox parameter r must be nonnegative")
    dim = dim_of(f)
    center = _as_center(x, dim)
    if r == 0:
        objective: FuncExpr = f
    else:
        objective = Sum((f, shifted_quadratic(r, center)))
    scan = minimize(objective, center, config)
    return _from_scan(scan, r, center)


def prox_points(f: FuncExpr, r: float, x,
                config: SolverConfig = DEFAULT_CONFIG) -> tuple[tuple[float, ...], ...]:
    """Minimizer set of the envelope objective at x.

    Raises ProxUndefinedError when the infimum is -inf (or the scan could
    not certify a finite value), since no minimizer exists then.
    """
    if r <= 0:
        raise ValueError("prox parameter r must be positive")
    env = moreau_envelope(f, r, x, config)
    if env.diverged or not env.conclusive:
        raise ProxUndefinedError("prox undefined: envelope objective is unbounded below")
    return env.minimizers


def fenchel_conjugate(f: FuncExpr, y,
                      config: SolverConfig = DEFAULT_CONFIG) -> float:
    """f*(y) = sup_x <y, x> - f(x); +inf when the sup diverges.

    Computed as -inf(f - <y, .>) with the same scan machinery, so the +inf
    branch is certified by a probe exceeding the divergence bound.
    """
    dim = dim_of(f)
    yv = _as_center(y, dim)
    if np.all(yv == 0.0):
        # Affine nodes need a nonzero slope; the tilt vanishes anyway
        objective: FuncExpr = f
    else:
        objective = Sum((f, Affine(tuple(float(-v) for v in yv), 0.0)))
    scan = minimize(objective, np.zeros(dim), config)
    if scan.diverged:
        return INF
    # inconclusive scans report the best certified sup so far; +0.0 drops -0.0
    return -scan.value + 0.0


def envelope_via_conjugate(f: FuncExpr, r: float, x,
                           config: SolverConfig = DEFAULT_CONFIG) -> float:
    """Envelope through the conjugate identity: (r/2)|x|^2 - g*(rx), g = f + (r/2)|.|^2."""
    if r <= 0:
        raise ValueError("conjugate path needs r > 0")
    dim = dim_of(f)
    center = _as_center(x, dim)
    g = Sum((f, scaled_identity_quadratic(r, dim)))
    conj = fenchel_conjugate(g, r * center, config)
    lead = 0.5 * r * float(center @ center)
    if conj == INF:
        return -INF
    return lead - conj


__all__ = [
    "EnvelopeResult",
    "ImproperFunctionError",
    "ProxUndefinedError",
    "envelope_via_conjugate",
    "fenchel_conjugate",
    "moreau_envelope",
    "prox_points",
]
