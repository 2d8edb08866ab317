"""Numeric side of the library: envelope evaluation and threshold estimation."""

from .config import DEFAULT_CONFIG, SolverConfig
from .engine import ImproperFunctionError, ScanResult, minimize
from .envelope import (
    EnvelopeResult,
    ProxUndefinedError,
    envelope_via_conjugate,
    fenchel_conjugate,
    moreau_envelope,
    prox_points,
)
from .estimators import (
    MinorantCheck,
    ProbeResult,
    bounded_below_probe,
    check_quadratic_minorant,
    estimate_threshold_bisection,
    estimate_threshold_liminf,
    point_estimate,
)

__all__ = [
    "DEFAULT_CONFIG",
    "EnvelopeResult",
    "ImproperFunctionError",
    "MinorantCheck",
    "ProbeResult",
    "ProxUndefinedError",
    "ScanResult",
    "SolverConfig",
    "bounded_below_probe",
    "check_quadratic_minorant",
    "envelope_via_conjugate",
    "estimate_threshold_bisection",
    "estimate_threshold_liminf",
    "fenchel_conjugate",
    "minimize",
    "moreau_envelope",
    "point_estimate",
    "prox_points",
]
