"""Wall-clock cost model of the sanitizers.

Per-tuple costs are measured on small batches (one draw call plus one
projection per batch) so interpreter overhead amortizes away and the
asymptotic term dominates; the per-tuple figure is the batch median
divided by the batch size.  Each grid point reports the median of 31
measurements after a warmup pass.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .bounds import compute_norm_bound
from .rng import Rng

TIMING_SAMPLES = 31
BATCH = 8


@dataclass(frozen=True)
class TimingRow:
    mechanism: str
    phase: str        # "sanitize" or "preprocess"
    input_dim: int
    target_dim: int
    seconds_per_tuple: float


def _median_seconds(fn, samples: int = TIMING_SAMPLES) -> float:
    fn()  # warmup
    out = []
    for _ in range(samples):
        t0 = time.perf_counter()
        fn()
        out.append(time.perf_counter() - t0)
    return float(np.median(out))


def _batched_haar(count: int, n: int, gen: np.random.Generator) -> np.ndarray:
    q, r = np.linalg.qr(gen.standard_normal((count, n, n)))
    signs = np.sign(np.einsum("tii->ti", r))
    signs[signs == 0] = 1.0
    return q * signs[:, None, :]


def measure(n_grid, m: int = 20, private_count: int = 12,
            master_seed: int = 0) -> list[TimingRow]:
    """Median per-tuple sanitization cost for each mechanism over a grid
    of input dimensions at a fixed target dimension, plus preprocessing
    costs for the fixed-matrix mechanisms."""
    rows: list[TimingRow] = []
    for n in n_grid:
        if m > n:
            raise ValueError(f"target dim {m} exceeds input dim {n}")
        gen = Rng(master_seed).child(n).generator
        y = gen.random((BATCH, n)) + 0.1
        cert = compute_norm_bound(0.5, 0.1, 1.0)
        beta = cert.frobenius_bound

        def nrp_batch():
            a = gen.random((BATCH, n, m))
            a *= (beta / np.linalg.norm(a, axis=(1, 2)))[:, None, None]
            return np.einsum("tnm,tn->tm", a, y)

        q_fixed = np.linalg.qr(gen.standard_normal((n, m)))[0]

        def brp_batch():
            return y @ q_fixed

        def brp_preprocess():
            return np.linalg.qr(gen.standard_normal((n, m)))[0]

        idx = np.arange(min(private_count, n))

        def asup_batch():
            z = np.zeros((BATCH, n))
            z[:, idx] = 0.05 * gen.standard_normal((BATCH, idx.size))
            u = _batched_haar(BATCH, n, gen)
            return y + np.einsum("tnj,tj->tn", u, z)

        comps = np.linalg.qr(gen.standard_normal((n, m)))[0]
        mean = y.mean(axis=0)

        def pca_batch():
            return (y - mean) @ comps

        rows.append(TimingRow("nrp", "sanitize", n, m, _median_seconds(nrp_batch) / BATCH))
        rows.append(TimingRow("brp", "sanitize", n, m, _median_seconds(brp_batch) / BATCH))
        rows.append(TimingRow("brp", "preprocess", n, m, _median_seconds(brp_preprocess)))
        rows.append(TimingRow("asup", "sanitize", n, m, _median_seconds(asup_batch) / BATCH))
        rows.append(TimingRow("pca", "sanitize", n, m, _median_seconds(pca_batch) / BATCH))
    return rows


def loglog_slope(rows: list[TimingRow], mechanism: str, phase: str = "sanitize") -> float:
    """Least-squares slope of log(seconds) against log(input_dim)."""
    pts = [(r.input_dim, r.seconds_per_tuple) for r in rows
           if r.mechanism == mechanism and r.phase == phase]
    if len(pts) < 2:
        raise ValueError(f"need at least two grid points for {mechanism}/{phase}")
    x = np.log([p[0] for p in pts])
    y = np.log([p[1] for p in pts])
    return float(np.polyfit(x, y, 1)[0])
