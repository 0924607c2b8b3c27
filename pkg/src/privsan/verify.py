"""Empirical checks of the distance-preservation guarantees and of the
dimension-equivalence relation between orthonormal and bounded-entry
projections."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bounds import DistancePreservationParams, jl_min_dimension, nrp_equivalent_dimension
from .errors import NonPositiveResult
from .metrics import distance_preservation_fraction
from .rng import Rng
from .sanitize import EntryDistribution, bounded_projection_for_check, subspace_projection_for_check


@dataclass(frozen=True)
class PreservationTrial:
    trial: int
    projected_dim: int
    ambient_dim: int
    fraction_subspace: float
    fraction_bounded: float

    @property
    def ok(self) -> bool:
        return self.fraction_subspace >= 0.5 and self.fraction_bounded >= 0.5


def preservation_trials(gamma: float, point_count: int, trials: int, master_seed: int,
                        distribution: EntryDistribution = EntryDistribution.UNIT_UNIFORM,
                        ) -> list[PreservationTrial]:
    """Compare the two projection families at the dimension mandated by
    the preservation bound.

    Each trial draws ``point_count`` standard-normal points in an
    ambient space twice as wide as the mandated dimension, projects them
    once with a uniform-subspace matrix and once with a
    variance-normalized bounded-entry matrix, and records the fraction
    of pairs whose squared distance stays within e^{+-gamma}.
    """
    m = jl_min_dimension(point_count, gamma)
    params = DistancePreservationParams(gamma, point_count, m)
    n = 2 * params.projected_dim
    root = Rng(master_seed)
    rows = []
    for trial in range(trials):
        rng = root.child(trial)
        points = rng.child(0).standard_normal((point_count, n))
        proj_sub = subspace_projection_for_check(points, m, rng.child(1))
        proj_bnd = bounded_projection_for_check(points, m, rng.child(2), distribution)
        rows.append(PreservationTrial(
            trial=trial,
            projected_dim=m,
            ambient_dim=n,
            fraction_subspace=distance_preservation_fraction(points, proj_sub, gamma),
            fraction_bounded=distance_preservation_fraction(points, proj_bnd, gamma),
        ))
    return rows


@dataclass(frozen=True)
class EquivalenceRow:
    m1: int
    gamma: float
    m2: int | None          # None when the closed form is nonpositive
    within_reference: bool  # m2 <= m1 whenever m2 is defined


def equivalence_table(m1_values, gamma_values) -> list[EquivalenceRow]:
    """Tabulate the bounded-entry dimension matching each reference
    dimension across a distortion grid."""
    rows = []
    for m1 in m1_values:
        for gamma in gamma_values:
            try:
                m2 = nrp_equivalent_dimension(int(m1), float(gamma))
            except NonPositiveResult:
                rows.append(EquivalenceRow(int(m1), float(gamma), None, True))
                continue
            rows.append(EquivalenceRow(int(m1), float(gamma), m2, m2 <= m1))
    return rows


def gamma_grid(count: int = 100, low: float = 0.01, high: float = 0.40) -> np.ndarray:
    return np.linspace(low, high, count)
