"""Solver configuration shared by the scan engine and the estimators."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass


@dataclass(frozen=True)
class SolverConfig:
    """Knobs for grid scanning, refinement and the threshold estimators.

    All searches are deterministic: fixed grids, fixed probe schedules, and
    lowest-index tie breaking. No field is read from the environment.
    """

    # objective values below -divergence_bound certify divergence to -inf;
    # conjugate values above +divergence_bound certify +inf
    divergence_bound: float = 1e12
    # scan balls grow by radius_growth per level until max_radius
    max_radius: float = 1e6
    radius_growth: float = 2.0
    # grid resolution per dimension at every radius level
    grid_points: int = 257
    # argument tolerance for local refinement (golden section / coord descent)
    refine_tol: float = 1e-8
    refine_max_iter: int = 100
    coord_sweeps: int = 6
    # bisection on r stops when hi - lo <= bisection_tol * max(1, hi)
    bisection_tol: float = 1e-3
    bisection_max_r: float = float(2**20)
    # ratio-sequence schedule: radii 2^k for k = 1..liminf_levels
    liminf_levels: int = 40
    # direction samples per sphere, keyed by dimension
    sphere_samples_1d: int = 2
    sphere_samples_2d: int = 64
    # refinement candidate pool and result tolerances
    max_candidates: int = 16
    value_tol: float = 1e-6
    dedup_tol: float = 1e-6
    # per-doubling relative decrease below which the running minimum counts
    # as stabilized over the last quarter of the radius schedule
    stabilization_rel: float = 0.01
    # ring probes keep doubling past max_radius up to this radius before a
    # non-stabilized scan is declared inconclusive
    extension_radius_cap: float = float(2**48)
    # cap on landmark seed coordinates fed into the scan grids
    seed_cap: int = 24

    def __post_init__(self):
        if self.divergence_bound <= 0 or self.max_radius <= 0:
            raise ValueError("divergence_bound and max_radius must be positive")
        if self.radius_growth <= 1.0:
            raise ValueError("radius_growth must exceed 1")
        if self.grid_points < 3:
            raise ValueError("grid_points must be at least 3")
        if self.bisection_tol <= 0 or self.refine_tol <= 0:
            raise ValueError("tolerances must be positive")
        if self.liminf_levels < 8:
            raise ValueError("liminf_levels must be at least 8")

    def sphere_samples(self, dim: int) -> int:
        return self.sphere_samples_1d if dim == 1 else self.sphere_samples_2d

    def replace(self, **changes) -> "SolverConfig":
        return dataclasses.replace(self, **changes)


DEFAULT_CONFIG = SolverConfig()
