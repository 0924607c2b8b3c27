"""Honest-but-curious reconstruction attacks at the fusion center.

The attacker sees sanitized tuples and knows which mechanism produced
them, including the entry distribution of the projection matrices, but
never the per-tuple matrix itself.  Reconstruction is matrix based:

* ``attack_random_inverse``: pseudo-inverse of one fresh matrix drawn
  from the known family;
* ``expected_inverse_map`` / ``attack_linear``: Monte-Carlo estimate of
  the expected pseudo-inverse, a fixed map applied to every tuple, i.e.
  the attacker's best guess at the average inverse of the family;
* ``attack_known_matrix``: white-box baseline for mechanisms whose
  matrix is fixed and public, optionally re-adding a known mean;
* ``attack_naive_multiply``: left-multiplication by a raw family draw,
  kept as an ablation of the pseudo-inverse step;
* ``attack_identity``: neutral reconstruction for dimension-preserving
  mechanisms, optionally mean-shift corrected.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, SingularSample
from .linalg import as_vector, pseudo_inverse
from .rng import Rng
from .sanitize import (
    EntryDistribution,
    ProjectionMatrix,
    SanitizedTuple,
    sample_bounded_matrix,
    sample_orthonormal_matrix,
)

ATTACK_RETRIES = 8


@dataclass(frozen=True)
class ReconstructionResult:
    reconstructed: np.ndarray
    agent_id: str
    attack_tag: str

    def __post_init__(self):
        object.__setattr__(self, "reconstructed", as_vector(self.reconstructed))


def _family_sample(n: int, m: int, distribution: EntryDistribution, rng: Rng) -> np.ndarray:
    if distribution is EntryDistribution.GAUSSIAN_QR:
        return sample_orthonormal_matrix(n, m, rng).matrix
    return sample_bounded_matrix(n, m, distribution, rng)


def _pinv_transpose(b: np.ndarray) -> np.ndarray:
    """(B^T)^+ = B (B^T B)^{-1}; raises SingularSample when B^T B is singular."""
    gram = b.T @ b
    if np.linalg.matrix_rank(gram) < gram.shape[0]:
        raise SingularSample("sampled matrix has rank-deficient Gram matrix")
    return pseudo_inverse(b.T)


def attack_random_inverse(t: SanitizedTuple, n: int, distribution: EntryDistribution,
                          rng: Rng, override_matrix: np.ndarray | None = None,
                          ) -> ReconstructionResult:
    """Reconstruct with the pseudo-inverse of a fresh family draw.

    ``override_matrix`` substitutes the draw; it exists for white-box
    oracle checks where the attacker is handed the true matrix.
    """
    m = t.dim
    if m > n:
        raise DimensionMismatch(f"sanitized dim {m} exceeds ambient dim {n}")
    if override_matrix is not None:
        return ReconstructionResult(
            _pinv_transpose(np.asarray(override_matrix, dtype=float)) @ t.values,
            t.agent_id, "random-inverse")
    last = None
    for attempt in range(ATTACK_RETRIES):
        b = _family_sample(n, m, distribution, rng.child(attempt))
        try:
            return ReconstructionResult(_pinv_transpose(b) @ t.values, t.agent_id,
                                        "random-inverse")
        except SingularSample as exc:  # pragma: no cover - continuous draws
            last = exc
    raise last


def attack_known_matrix(t: SanitizedTuple, p: ProjectionMatrix,
                        mean: np.ndarray | None = None,
                        mean_in_tuple: bool = False) -> ReconstructionResult:
    """White-box linear reconstruction with the true fixed matrix.

    With ``mean`` given, the attacker reconstructs the deviation from the
    mean and adds the mean back.  ``mean_in_tuple`` says whether the
    mechanism projected raw tuples (the attacker first removes the
    mean's image from the tuple) or already-centered ones (the
    component-based mechanism), where the tuple is used as is.
    """
    values = t.values
    if mean is not None and mean_in_tuple:
        values = values - p.matrix.T @ as_vector(mean)
    recon = _pinv_transpose(p.matrix) @ values
    if mean is not None:
        recon = recon + as_vector(mean)
    return ReconstructionResult(recon, t.agent_id, "known-matrix")


def attack_naive_multiply(t: SanitizedTuple, n: int, distribution: EntryDistribution,
                          rng: Rng) -> ReconstructionResult:
    """Left-multiply by a raw family draw, skipping the inverse."""
    b = _family_sample(n, t.dim, distribution, rng)
    return ReconstructionResult(b @ t.values, t.agent_id, "naive-multiply")


def attack_identity(t: SanitizedTuple, shift: np.ndarray | None = None) -> ReconstructionResult:
    """Take the sanitized tuple as the reconstruction; ``shift`` applies a
    mean correction when the attacker knows a systematic offset."""
    recon = t.values.copy()
    if shift is not None:
        recon = recon + as_vector(shift)
    return ReconstructionResult(recon, t.agent_id, "identity")


def expected_inverse_map(n: int, m: int, distribution: EntryDistribution,
                         samples: int, rng: Rng) -> np.ndarray:
    """Monte-Carlo estimate of E[(B^T)^+] over the known family.

    Returns an n x m matrix; applying it to a sanitized tuple is the
    attacker's expectation-based linear reconstruction.  One map is
    typically estimated per experiment repetition and reused for every
    tuple.
    """
    if samples < 1:
        raise ValueError("samples must be positive")
    acc = np.zeros((n, m))
    for j in range(samples):
        b = _family_sample(n, m, distribution, rng.child(j))
        acc += _pinv_transpose(b)
    return acc / samples


def attack_linear(t: SanitizedTuple, linear_map: np.ndarray,
                  tag: str = "expected-inverse") -> ReconstructionResult:
    lm = np.asarray(linear_map, dtype=float)
    if lm.shape[1] != t.dim:
        raise DimensionMismatch(f"map expects dim {lm.shape[1]}, tuple has {t.dim}")
    return ReconstructionResult(lm @ t.values, t.agent_id, tag)
