"""Sanitization mechanisms behind one common contract.

Five mechanisms share the ``SanitizedTuple`` output type:

* norm-bounded random projection: a fresh bounded-entry matrix per
  tuple, rescaled so its Frobenius norm equals the certificate bound;
* unbounded random projection: same draw, no rescaling (ablation
  baseline);
* fixed orthonormal projection: one column-orthonormal matrix reused
  for every tuple;
* principal-component projection: top eigenvectors of the training
  covariance, applied to centered tuples;
* rotated-noise addition: Gaussian noise on the private coordinates,
  rotated by a fresh random unitary; dimension preserving.

Production projections and the distance-preservation verification
helpers at the bottom are deliberately separate code paths: the former
rescale to the certificate bound, the latter use the variance-normalized
convention that the preservation guarantees assume.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from enum import Enum
from typing import IO

import numpy as np

from .bounds import NormBoundCertificate
from .errors import DegenerateMatrix, DimensionMismatch, InsufficientData
from .linalg import as_matrix, as_vector, frobenius_norm, orthonormalize, sym_eigendecompose
from .rng import Rng

SAMPLE_RETRIES = 8


class EntryDistribution(str, Enum):
    UNIT_UNIFORM = "unit-uniform"        # iid entries on [0, 1)
    SYMMETRIC_UNIFORM = "symmetric-uniform"  # iid entries on (-1, 1)
    GAUSSIAN_QR = "gaussian-qr"          # orthonormal columns, QR of Gaussian
    PCA_COMPONENTS = "pca-components"    # eigenvectors of a training covariance


# (mean, standard deviation) of one entry, used by the variance-normalized
# verification path.
_ENTRY_MOMENTS = {
    EntryDistribution.UNIT_UNIFORM: (0.5, (1.0 / 12.0) ** 0.5),
    EntryDistribution.SYMMETRIC_UNIFORM: (0.0, (1.0 / 3.0) ** 0.5),
}


@dataclass(frozen=True)
class DataTuple:
    """One raw observation: values of length n plus the positions that are
    private.  Private positions are identical for all agents by
    convention; enforcing that is the caller's job."""

    values: np.ndarray
    private_indices: frozenset[int]
    agent_id: str

    def __post_init__(self):
        object.__setattr__(self, "values", as_vector(self.values))
        bad = [i for i in self.private_indices if not (0 <= i < self.values.size)]
        if bad:
            raise ValueError(f"private indices out of range: {bad}")

    @property
    def dim(self) -> int:
        return int(self.values.size)


@dataclass(frozen=True)
class SanitizedTuple:
    values: np.ndarray
    agent_id: str
    mechanism_tag: str

    def __post_init__(self):
        object.__setattr__(self, "values", as_vector(self.values))

    @property
    def dim(self) -> int:
        return int(self.values.size)


@dataclass(frozen=True)
class ProjectionMatrix:
    """n x m compression matrix with its provenance tag, Frobenius norm,
    and, for the norm-bounded mechanism, the certificate it satisfies."""

    matrix: np.ndarray
    entry_distribution: EntryDistribution
    frobenius: float
    bound_certificate: NormBoundCertificate | None = None

    def __post_init__(self):
        object.__setattr__(self, "matrix", as_matrix(self.matrix))
        if self.bound_certificate is not None:
            if abs(self.frobenius - self.bound_certificate.frobenius_bound) > 1e-12:
                raise ValueError("Frobenius norm does not meet the certificate bound")
        if self.entry_distribution is EntryDistribution.GAUSSIAN_QR:
            q = self.matrix
            gram_err = float(np.abs(q.T @ q - np.eye(q.shape[1])).max())
            if gram_err > 1e-9:
                raise ValueError(f"columns not orthonormal: max deviation {gram_err:.3g}")

    @property
    def shape(self) -> tuple[int, int]:
        return self.matrix.shape


class ReplayLog:
    """Audit log of sanitization events, one JSON record per line.

    Records carry enough to regenerate the projection matrix (the seed
    path of the stream that drew it) and to verify it (a digest of its
    bytes)."""

    def __init__(self, stream: IO[str] | None = None):
        self.stream = stream
        self.entries: list[dict] = []

    def record(self, agent_id: str, rng: Rng, distribution: EntryDistribution,
               bound: float | None, matrix: np.ndarray) -> None:
        entry = {
            "agent_id": agent_id,
            "seed": rng.seed,
            "path": list(rng.path),
            "distribution": distribution.value,
            "frobenius_bound": bound,
            "matrix_digest": matrix_digest(matrix),
        }
        self.entries.append(entry)
        if self.stream is not None:
            self.stream.write(json.dumps(entry, sort_keys=True) + "\n")


def matrix_digest(matrix: np.ndarray) -> str:
    return hashlib.sha256(np.ascontiguousarray(matrix, dtype=float).tobytes()).hexdigest()


def sample_bounded_matrix(n: int, m: int, distribution: EntryDistribution, rng: Rng) -> np.ndarray:
    """Draw an n x m matrix with iid entries from a bounded distribution.
    All-zero draws are rejected (bounded retries)."""
    if distribution not in _ENTRY_MOMENTS:
        raise ValueError(f"not a bounded-entry distribution: {distribution}")
    for _ in range(SAMPLE_RETRIES):
        if distribution is EntryDistribution.UNIT_UNIFORM:
            a = rng.uniform(0.0, 1.0, (n, m))
        else:
            a = rng.uniform(-1.0, 1.0, (n, m))
        if np.any(a != 0.0):
            return a
    raise DegenerateMatrix(f"all-zero draws {SAMPLE_RETRIES} times in a row")


def sample_orthonormal_matrix(n: int, m: int, rng: Rng) -> ProjectionMatrix:
    """Uniformly distributed n x m matrix with orthonormal columns."""
    q = orthonormalize(rng.standard_normal((n, m)), rng)
    return ProjectionMatrix(q, EntryDistribution.GAUSSIAN_QR, frobenius_norm(q))


def bounded_projection(n: int, m: int, certificate: NormBoundCertificate | None,
                       rng: Rng, distribution: EntryDistribution = EntryDistribution.UNIT_UNIFORM,
                       ) -> ProjectionMatrix:
    """Draw a bounded-entry projection matrix; with a certificate the
    matrix is rescaled so its Frobenius norm equals the bound exactly."""
    a = sample_bounded_matrix(n, m, distribution, rng)
    if certificate is None:
        return ProjectionMatrix(a, distribution, frobenius_norm(a))
    beta = certificate.frobenius_bound
    a = a * (beta / frobenius_norm(a))
    return ProjectionMatrix(a, distribution, beta, certificate)


def apply_projection(p: ProjectionMatrix, t: DataTuple, mechanism_tag: str) -> SanitizedTuple:
    n, _ = p.shape
    if t.dim != n:
        raise DimensionMismatch(f"tuple has length {t.dim}, matrix expects {n}")
    return SanitizedTuple(p.matrix.T @ t.values, t.agent_id, mechanism_tag)


def sanitize_nrp(t: DataTuple, m: int, certificate: NormBoundCertificate, rng: Rng,
                 distribution: EntryDistribution = EntryDistribution.UNIT_UNIFORM,
                 log: ReplayLog | None = None) -> SanitizedTuple:
    """Norm-bounded projection with a fresh matrix for this call.

    ``rng`` must be a fresh child stream per call; reusing one defeats
    the per-instance randomness the mechanism relies on.
    """
    if not (1 <= m <= t.dim):
        raise DimensionMismatch(f"need 1 <= m <= {t.dim}, got {m}")
    p = bounded_projection(t.dim, m, certificate, rng, distribution)
    if log is not None:
        log.record(t.agent_id, rng, distribution, certificate.frobenius_bound, p.matrix)
    return apply_projection(p, t, "nrp")


def sanitize_nrp_unbounded(t: DataTuple, m: int, rng: Rng,
                           distribution: EntryDistribution = EntryDistribution.UNIT_UNIFORM,
                           log: ReplayLog | None = None) -> SanitizedTuple:
    """Same fresh bounded-entry draw as :func:`sanitize_nrp` without the
    norm rescaling step."""
    if not (1 <= m <= t.dim):
        raise DimensionMismatch(f"need 1 <= m <= {t.dim}, got {m}")
    p = bounded_projection(t.dim, m, None, rng, distribution)
    if log is not None:
        log.record(t.agent_id, rng, distribution, None, p.matrix)
    return apply_projection(p, t, "nrp-unbounded")


def sanitize_brp(t: DataTuple, p: ProjectionMatrix) -> SanitizedTuple:
    """Projection by the experiment's fixed orthonormal matrix."""
    if p.entry_distribution is not EntryDistribution.GAUSSIAN_QR:
        raise ValueError("fixed projection requires an orthonormal matrix")
    return apply_projection(p, t, "brp")


def fit_pca(dataset: list[DataTuple], m: int) -> ProjectionMatrix:
    """Top-m eigenvectors of the sample covariance of centered data, in
    descending eigenvalue order; each component's first nonzero entry is
    made positive so the factorization is unique."""
    if len(dataset) < 2:
        raise InsufficientData("need at least two tuples to fit components")
    x = np.stack([t.values for t in dataset])
    n = x.shape[1]
    if not (1 <= m <= n):
        raise DimensionMismatch(f"need 1 <= m <= {n}, got {m}")
    centered = x - x.mean(axis=0)
    cov = centered.T @ centered / (x.shape[0] - 1)
    _, vecs = sym_eigendecompose(cov)
    comps = vecs[:, :m].copy()
    for j in range(m):
        col = comps[:, j]
        nz = np.nonzero(np.abs(col) > 1e-12)[0]
        if nz.size and col[nz[0]] < 0:
            comps[:, j] = -col
    return ProjectionMatrix(comps, EntryDistribution.PCA_COMPONENTS, frobenius_norm(comps))


def training_mean(dataset: list[DataTuple]) -> np.ndarray:
    return np.stack([t.values for t in dataset]).mean(axis=0)


def sanitize_pca(t: DataTuple, p: ProjectionMatrix, mean: np.ndarray) -> SanitizedTuple:
    """Project the centered tuple onto the fitted components."""
    mean = as_vector(mean)
    if t.dim != mean.size or t.dim != p.shape[0]:
        raise DimensionMismatch("tuple, mean and components disagree on dimension")
    return SanitizedTuple(p.matrix.T @ (t.values - mean), t.agent_id, "pca")


def sanitize_asup(t: DataTuple, noise_scale: float, rng: Rng) -> SanitizedTuple:
    """Noise addition on the private coordinates, rotated by a fresh
    random unitary.  Dimension preserving; ``noise_scale`` = 0 returns
    the input unchanged."""
    if noise_scale < 0:
        raise ValueError("noise_scale must be nonnegative")
    if noise_scale == 0.0 or not t.private_indices:
        return SanitizedTuple(t.values.copy(), t.agent_id, "asup")
    n = t.dim
    z = np.zeros(n)
    idx = sorted(t.private_indices)
    z[idx] = noise_scale * rng.standard_normal(len(idx))
    u = orthonormalize(rng.standard_normal((n, n)), rng)
    return SanitizedTuple(t.values + u @ z, t.agent_id, "asup")


def sanitize_identity(t: DataTuple) -> SanitizedTuple:
    """Debug mechanism: no sanitization at all."""
    return SanitizedTuple(t.values.copy(), t.agent_id, "identity")


# ---------------------------------------------------------------------------
# Distance-preservation verification path (variance-normalized projections).


def subspace_projection_for_check(points: np.ndarray, m: int, rng: Rng) -> np.ndarray:
    """Project rows of ``points`` onto a uniformly random m-dimensional
    subspace, scaled by sqrt(n/m) so squared lengths are preserved in
    expectation."""
    x = as_matrix(points)
    n = x.shape[1]
    q = sample_orthonormal_matrix(n, m, rng).matrix
    return (x @ q) * np.sqrt(n / m)


def bounded_projection_for_check(points: np.ndarray, m: int, rng: Rng,
                                 distribution: EntryDistribution = EntryDistribution.UNIT_UNIFORM,
                                 ) -> np.ndarray:
    """Project rows of ``points`` with a bounded-entry matrix brought to
    the standard variance convention: entries centered, unit variance,
    projection scaled by 1/sqrt(m)."""
    x = as_matrix(points)
    n = x.shape[1]
    mu, sigma = _ENTRY_MOMENTS[distribution]
    a = sample_bounded_matrix(n, m, distribution, rng)
    a = (a - mu) / (sigma * np.sqrt(m))
    return x @ a
