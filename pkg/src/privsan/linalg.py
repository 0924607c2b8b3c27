"""Dense numeric kernels: cosine similarity, norms, orthonormalization,
symmetric eigendecomposition, and the Moore-Penrose pseudo-inverse.

All functions are pure and operate on float64 numpy arrays.  Vectors are
1-d arrays, matrices 2-d row-major arrays.  Inputs are validated for
finiteness so that NaN/Inf never propagates silently into an experiment.
"""

from __future__ import annotations

import numpy as np

from .errors import DimensionMismatch, NotSymmetric, RankDeficient, ZeroNormInput
from .rng import Rng

PINV_RCOND = 1e-10
RESAMPLE_RETRIES = 8


def as_vector(x) -> np.ndarray:
    v = np.asarray(x, dtype=float)
    if v.ndim != 1 or v.size < 1:
        raise DimensionMismatch(f"expected a 1-d vector, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError("vector entries must be finite")
    return v


def as_matrix(x) -> np.ndarray:
    a = np.asarray(x, dtype=float)
    if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
        raise DimensionMismatch(f"expected a 2-d matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix entries must be finite")
    return a


def cosine(a, b) -> float:
    """Cosine similarity (a.b)/(|a||b|), in [-1, 1].

    Raises ZeroNormInput when either argument has zero norm and
    DimensionMismatch when lengths differ.
    """
    va, vb = as_vector(a), as_vector(b)
    if va.shape != vb.shape:
        raise DimensionMismatch(f"lengths differ: {va.size} vs {vb.size}")
    na = float(np.linalg.norm(va))
    nb = float(np.linalg.norm(vb))
    if na == 0.0 or nb == 0.0:
        raise ZeroNormInput("cosine is undefined for a zero-norm vector")
    return float(np.clip(float(va @ vb) / (na * nb), -1.0, 1.0))


def frobenius_norm(a) -> float:
    return float(np.linalg.norm(as_matrix(a), ord="fro"))


def orthonormalize(a, rng: Rng | None = None) -> np.ndarray:
    """Return an n x m matrix Q with orthonormal columns spanning col(a).

    Requires rows >= cols.  Rank-deficient inputs are replaced by fresh
    Gaussian draws from ``rng`` (bounded retries); without an ``rng`` a
    deficient input raises RankDeficient immediately.
    """
    m0 = as_matrix(a)
    n, m = m0.shape
    if n < m:
        raise DimensionMismatch(f"need rows >= cols, got {n} x {m}")
    cur = m0
    for _ in range(RESAMPLE_RETRIES + 1):
        q, r = np.linalg.qr(cur, mode="reduced")
        diag = np.abs(np.diag(r))
        if diag.min() > 1e-12 * max(diag.max(), 1e-300):
            # Fix signs so that diag(R) > 0; makes the factor unique and,
            # for Gaussian input, uniformly distributed over frames.
            signs = np.sign(np.diag(r))
            signs[signs == 0] = 1.0
            return q * signs
        if rng is None:
            raise RankDeficient("input is numerically rank deficient")
        cur = rng.standard_normal((n, m))
    raise RankDeficient(f"no full-rank sample after {RESAMPLE_RETRIES} retries")


def sym_eigendecompose(s) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a symmetric matrix.

    Returns (eigenvalues descending, eigenvector columns in matching
    order).  Raises NotSymmetric when max|S - S^T| exceeds tolerance.
    """
    mat = as_matrix(s)
    if mat.shape[0] != mat.shape[1]:
        raise NotSymmetric(f"matrix is not square: {mat.shape}")
    scale = max(1.0, float(np.abs(mat).max()))
    if float(np.abs(mat - mat.T).max()) > 1e-9 * scale:
        raise NotSymmetric("matrix is not symmetric within tolerance")
    w, v = np.linalg.eigh(mat)
    order = np.argsort(w)[::-1]
    return w[order], v[:, order]


def pseudo_inverse(a) -> np.ndarray:
    """Moore-Penrose pseudo-inverse with singular values below
    1e-10 * sigma_max treated as zero."""
    return np.linalg.pinv(as_matrix(a), rcond=PINV_RCOND)
