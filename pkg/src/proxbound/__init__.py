"""Thresholds of prox-boundedness, symbolically and numerically.

The package has four layers:

- ``proxbound.funcdsl``: a small expression language for extended-real-valued
  functions on R^1 and R^2 (quadratics, powers, indicators, piecewise glue,
  pointwise max, composition with affine maps).
- ``proxbound.calculus``: certified threshold computation by structural rules,
  returning exact values or intervals together with a derivation trace.
- ``proxbound.numerics``: Moreau envelopes, prox points, Fenchel conjugates,
  and two independent threshold estimators built on a global scan engine.
- ``proxbound.service`` / ``proxbound.cli``: an HTTP app and a command-line
  front end over the same handler layer.
"""

from .calculus import (
    ResultKind, SoundnessError, ThresholdResult, TraceEntry, compute_threshold,
)
from .funcdsl import (
    Affine, Compose, Constant, FuncExpr, Indicator, MaxOf, ParseError,
    Piecewise, Power, Quadratic, Scale, Sum, dim_of, evaluate, parse_expr,
    serialize,
)
from .numerics import (
    DEFAULT_CONFIG, SolverConfig, check_quadratic_minorant,
    envelope_via_conjugate, estimate_threshold_bisection,
    estimate_threshold_liminf, fenchel_conjugate, moreau_envelope,
    point_estimate, prox_points,
)

__version__ = "0.1.0"

__all__ = [
    "Affine", "Compose", "Constant", "DEFAULT_CONFIG", "FuncExpr",
    "Indicator", "MaxOf", "ParseError", "Piecewise", "Power", "Quadratic",
    "ResultKind", "Scale", "SolverConfig", "SoundnessError", "Sum",
    "ThresholdResult", "TraceEntry", "__version__", "check_quadratic_minorant",
    "compute_threshold", "dim_of", "envelope_via_conjugate",
    "estimate_threshold_bisection", "estimate_threshold_liminf", "evaluate",
    "fenchel_conjugate", "moreau_envelope", "parse_expr", "point_estimate",
    "prox_points", "serialize",
]
