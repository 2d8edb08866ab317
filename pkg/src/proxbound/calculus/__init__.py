"""Symbolic threshold rule engine with derivation traces."""

from .result import (
    ResultKind, SoundnessError, ThresholdResult, TraceEntry, entry, intersect_all,
)
from .rewrite import max_to_piecewise
from .rules import (
    atom_threshold, certifies_full_domain, compute_threshold,
    constrained_piece, minorant_curvature, rule_composition, rule_piecewise,
    rule_scale, rule_sum, threshold_on_region,
)

__all__ = [
    "ResultKind", "SoundnessError", "ThresholdResult", "TraceEntry",
    "atom_threshold", "certifies_full_domain", "compute_threshold",
    "constrained_piece", "entry", "intersect_all", "max_to_piecewise",
    "minorant_curvature", "rule_composition", "rule_piecewise", "rule_scale",
    "rule_sum", "threshold_on_region",
]
