"""Multi-agent sensing world: grid placement, synthetic data generation,
fusion-center parameter estimation, and the repeated-experiment runner.

One experiment repetition models one sensing round: every agent draws
its observations through a linear observation model, sanitizes them with
the configured mechanism, the fusion-center adversary reconstructs them,
and the reconstruction metrics are evaluated over the round's tuples.
Reported metrics are means over the configured repetitions.  Every
random draw descends from ``master_seed`` through per-repetition,
per-stage child streams, so a config determines its result bit for bit,
and the first r repetitions are unchanged by raising the repetition
count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from . import attack as atk
from . import metrics as met
from . import sanitize as san
from .bounds import GridSpec, NormBoundCertificate, compute_norm_bound
from .errors import ConfigInvalid, RankDeficient, ZeroNormInput
from .linalg import pseudo_inverse
from .rng import Rng

MECHANISMS = ("nrp", "nrp-unbounded", "brp", "pca", "asup", "identity")
ADVERSARIES = ("auto", "random-inverse", "expected-inverse", "known-matrix",
               "naive-inverse", "identity")
SWEEP_AGENT_GRID = (50, 100, 200, 300, 400, 500, 600)


@dataclass(frozen=True)
class SystemParameter:
    values: np.ndarray

    @property
    def dim(self) -> int:
        return int(self.values.size)


@dataclass(frozen=True)
class ObservationModel:
    """Linear map from the system parameter to one agent's observation,
    plus the additive noise level."""

    matrix: np.ndarray  # n x q
    noise_sigma: float


@dataclass(frozen=True)
class ExperimentConfig:
    # World shape
    agent_count: int = 200
    observations_per_agent: int = 50
    input_dim: int = 50
    param_dim: int = 50
    target_dim: int = 20
    private_count: int = 12
    # Trade-off parameters
    min_utility: float = 0.5
    gamma: float = 0.2
    # Mechanism / adversary selection
    sanitizer: str = "nrp"
    adversary: str = "auto"
    entry_distribution: str = san.EntryDistribution.UNIT_UNIFORM.value
    # Averaging
    repetitions: int = 100
    master_seed: int = 0
    # Metric settings
    radius_fraction: float = 0.2
    k_neighbors: int = 10
    breach_absolute_radius: float | None = None
    metric_coordinates: str = "all"  # "all" or "private": which columns the
                                     # reconstruction metrics compare
    # Synthetic-data recipe
    noise_sigma: float = 0.1
    shift_margin: float = 0.4        # extra nonnegativity headroom, in raw entry stds
    cell_fraction: float = 0.1       # grid cell side as a fraction of the max tuple norm
    # Mechanism details
    asup_noise_cell_multiple: float = 0.35
    inverse_samples: int = 64        # draws behind the expected-inverse attack
    unbounded_fresh_per_tuple: bool = False

    def __post_init__(self):
        if self.sanitizer not in MECHANISMS:
            raise ConfigInvalid(f"unknown sanitizer {self.sanitizer!r}")
        if self.adversary not in ADVERSARIES:
            raise ConfigInvalid(f"unknown adversary {self.adversary!r}")
        if self.agent_count < 1 or self.observations_per_agent < 1:
            raise ConfigInvalid("agent_count and observations_per_agent must be positive")
        if not (1 <= self.target_dim <= self.input_dim):
            raise ConfigInvalid("need 1 <= target_dim <= input_dim")
        if not (0 < self.min_utility <= 1):
            raise ConfigInvalid("min_utility must lie in (0, 1]")
        if self.private_count < 0 or self.private_count > self.input_dim:
            raise ConfigInvalid("private_count must lie in [0, input_dim]")
        if self.repetitions < 1:
            raise ConfigInvalid("repetitions must be positive")
        if self.radius_fraction <= 0:
            raise ConfigInvalid("radius_fraction must be positive")
        if self.k_neighbors < 1:
            raise ConfigInvalid("k_neighbors must be positive")
        if self.metric_coordinates not in ("all", "private"):
            raise ConfigInvalid("metric_coordinates must be 'all' or 'private'")
        if self.metric_coordinates == "private" and self.private_count == 0:
            raise ConfigInvalid("no private coordinates to evaluate")

    @property
    def distribution(self) -> san.EntryDistribution:
        return san.EntryDistribution(self.entry_distribution)


@dataclass(frozen=True)
class SyntheticDataset:
    """One sensing round: the hidden parameter, all agent tuples
    (agent-major order), the per-agent observation models, and the
    affine normalization that was applied (y_final = scale * (y_raw +
    shift_per_coordinate))."""

    parameter: SystemParameter
    tuples: list[san.DataTuple]
    models: list[ObservationModel]
    shift: float
    scale: float
    agent_count: int
    observations_per_agent: int

    def agent_tuples(self, agent_index: int) -> list[san.DataTuple]:
        k = self.observations_per_agent
        return self.tuples[agent_index * k:(agent_index + 1) * k]


@dataclass(frozen=True)
class RepetitionMetrics:
    repetition: int
    breach_count: float
    displacement: float
    resemblance: float
    utility: float
    privacy: float
    robustness_gap: float


@dataclass(frozen=True)
class ExperimentResult:
    config: ExperimentConfig
    report: met.MetricReport
    utility_mean: float
    privacy_mean: float
    robustness_gap_mean: float
    per_repetition: list[RepetitionMetrics]


def place_agents(grid: GridSpec) -> list[tuple[int, tuple[float, float]]]:
    """Deterministic one-agent-per-cell placement, row major, returning
    (agent index, cell center) pairs."""
    cells = grid.cells_per_side
    out = []
    for agent in range(grid.agent_count):
        row, col = divmod(agent, cells)
        out.append((agent, ((col + 0.5) * grid.cell_side, (row + 0.5) * grid.cell_side)))
    return out


def make_grid(cfg: ExperimentConfig, max_norm: float = 1.0) -> GridSpec:
    cell = cfg.cell_fraction * max_norm
    side = math.ceil(math.sqrt(cfg.agent_count))
    return GridSpec(cell * side, cell, cfg.agent_count)


def generate_synthetic(cfg: ExperimentConfig, rng: Rng) -> SyntheticDataset:
    """Draw one sensing round.

    The hidden parameter is standard normal; each agent's observation
    matrix has iid Unif(-0.5, 0.5) entries; observations add Gaussian
    noise.  Tuples are then shifted by one constant so every coordinate
    is nonnegative (with ``shift_margin`` extra headroom) and rescaled so
    the largest tuple norm is exactly 1, which keeps the norm-bound
    certificates feasible at any utility floor.  The first
    ``private_count`` coordinates are marked private.
    """
    n, q = cfg.input_dim, cfg.param_dim
    nagents, nobs = cfg.agent_count, cfg.observations_per_agent
    x = rng.standard_normal(q)
    h = rng.uniform(-0.5, 0.5, (nagents, n, q))
    noise = cfg.noise_sigma * rng.standard_normal((nagents, nobs, n))
    raw = np.einsum("anq,q->an", h, x)[:, None, :] + noise

    flat = raw.reshape(-1, n)
    shift = max(0.0, -float(flat.min())) + cfg.shift_margin * float(flat.std())
    shifted = flat + shift
    scale = 1.0 / float(np.linalg.norm(shifted, axis=1).max())
    values = shifted * scale

    private = frozenset(range(cfg.private_count))
    tuples = []
    for i in range(nagents):
        for k in range(nobs):
            tuples.append(san.DataTuple(values[i * nobs + k], private, f"a{i:04d}"))
    models = [ObservationModel(scale * h[i], scale * cfg.noise_sigma) for i in range(nagents)]
    return SyntheticDataset(SystemParameter(x), tuples, models, shift * scale, scale,
                            nagents, nobs)


def estimate_parameters(observations: list[np.ndarray],
                        models: list[ObservationModel]) -> SystemParameter:
    """Least-squares fusion of aligned (observation, model) pairs."""
    if len(observations) != len(models) or not observations:
        raise ValueError("need equally many observations and models")
    a = np.vstack([m.matrix for m in models])
    b = np.concatenate([np.asarray(y, dtype=float) for y in observations])
    q = a.shape[1]
    sol, _, rank, _ = np.linalg.lstsq(a, b, rcond=None)
    if rank < q:
        raise RankDeficient(f"stacked model matrix has rank {rank} < {q}")
    return SystemParameter(sol)


def _certificates(cfg: ExperimentConfig, data: SyntheticDataset,
                  cell: float) -> list[NormBoundCertificate]:
    certs = []
    for i in range(data.agent_count):
        alpha = max(float(np.linalg.norm(t.values)) for t in data.agent_tuples(i))
        certs.append(compute_norm_bound(cfg.min_utility, cell, alpha))
    return certs


@dataclass
class _RoundContext:
    """Artifacts one sanitization round hands to the attack stage."""
    fixed_matrix: san.ProjectionMatrix | None = None
    pca_mean: np.ndarray | None = None
    dataset_mean: np.ndarray | None = None
    certificates: list[NormBoundCertificate] | None = None


def _batched_haar(count: int, n: int, rng: Rng) -> np.ndarray:
    """``count`` independent n x n orthonormal matrices, sign-fixed."""
    g = rng.standard_normal((count, n, n))
    q, r = np.linalg.qr(g)
    signs = np.sign(np.einsum("tii->ti", r))
    signs[signs == 0] = 1.0
    return q * signs[:, None, :]


def _sanitize_round(cfg: ExperimentConfig, data: SyntheticDataset,
                    rng: Rng) -> tuple[np.ndarray, _RoundContext]:
    """Sanitize every tuple of the round; returns the (tuples x out_dim)
    value array.

    Mechanism semantics match the per-tuple operations in
    :mod:`privsan.sanitize`; sampling is batched per round so large
    sweeps stay cheap.
    """
    n, m = cfg.input_dim, cfg.target_dim
    dist = cfg.distribution
    y = np.stack([t.values for t in data.tuples])
    total = y.shape[0]
    ctx = _RoundContext()
    ctx.dataset_mean = y.mean(axis=0)
    mech = cfg.sanitizer

    if mech in ("nrp", "nrp-unbounded"):
        fresh = mech == "nrp" or cfg.unbounded_fresh_per_tuple
        draws = total if fresh else data.agent_count
        if dist is san.EntryDistribution.UNIT_UNIFORM:
            a = rng.uniform(0.0, 1.0, (draws, n, m))
        elif dist is san.EntryDistribution.SYMMETRIC_UNIFORM:
            a = rng.uniform(-1.0, 1.0, (draws, n, m))
        else:
            raise ConfigInvalid(f"{mech} needs a bounded entry distribution")
        if mech == "nrp":
            grid = make_grid(cfg, float(np.linalg.norm(y, axis=1).max()))
            ctx.certificates = _certificates(cfg, data, grid.cell_side)
            betas = np.array([c.frobenius_bound for c in ctx.certificates])
            beta_per_tuple = np.repeat(betas, data.observations_per_agent)
            fro = np.linalg.norm(a, axis=(1, 2))
            a *= (beta_per_tuple / fro)[:, None, None]
        if fresh:
            return np.einsum("tnm,tn->tm", a, y), ctx
        blocks = y.reshape(data.agent_count, data.observations_per_agent, n)
        return np.einsum("anm,akn->akm", a, blocks).reshape(total, m), ctx

    if mech == "brp":
        ctx.fixed_matrix = san.sample_orthonormal_matrix(n, m, rng.child(0))
        return y @ ctx.fixed_matrix.matrix, ctx
    if mech == "pca":
        ctx.fixed_matrix = san.fit_pca(data.tuples, m)
        ctx.pca_mean = san.training_mean(data.tuples)
        return (y - ctx.pca_mean) @ ctx.fixed_matrix.matrix, ctx
    if mech == "asup":
        grid = make_grid(cfg, float(np.linalg.norm(y, axis=1).max()))
        noise_scale = cfg.asup_noise_cell_multiple * grid.cell_side
        idx = sorted(range(cfg.private_count))
        if noise_scale == 0.0 or not idx:
            return y.copy(), ctx
        z = np.zeros((total, n))
        z[:, idx] = noise_scale * rng.standard_normal((total, len(idx)))
        u = _batched_haar(total, n, rng)
        return y + np.einsum("tnj,tj->tn", u, z), ctx
    if mech == "identity":
        return y.copy(), ctx
    raise ConfigInvalid(f"unknown sanitizer {mech!r}")  # pragma: no cover


def _attack_round(cfg: ExperimentConfig, sanitized: np.ndarray,
                  ctx: _RoundContext, rng: Rng) -> np.ndarray:
    """Reconstruct every sanitized tuple; returns a (tuples x n) array."""
    n = cfg.input_dim
    dist = cfg.distribution
    mech = cfg.sanitizer
    adv = cfg.adversary
    if adv == "auto":
        if mech in ("nrp", "nrp-unbounded"):
            adv = "expected-inverse"
        elif mech in ("brp", "pca"):
            adv = "known-matrix"
        else:
            adv = "identity"

    m = sanitized.shape[1]
    family = san.EntryDistribution.GAUSSIAN_QR if mech == "brp" else dist
    if adv == "expected-inverse":
        lm = atk.expected_inverse_map(n, m, dist, cfg.inverse_samples, rng.child(0))
        return sanitized @ lm.T
    if adv == "random-inverse":
        return np.stack([
            atk.attack_random_inverse(s, n, family, rng.child(j)).reconstructed
            for j, s in enumerate(_as_tuples(sanitized))])
    if adv == "naive-inverse":
        return np.stack([
            atk.attack_naive_multiply(s, n, family, rng.child(j)).reconstructed
            for j, s in enumerate(_as_tuples(sanitized))])
    if adv == "known-matrix":
        if ctx.fixed_matrix is None:
            raise ConfigInvalid(
                f"known-matrix attack needs a fixed-matrix mechanism, not {mech!r}")
        pinv_t = pseudo_inverse(ctx.fixed_matrix.matrix.T)
        if mech == "pca":
            return sanitized @ pinv_t.T + ctx.pca_mean
        mean = ctx.dataset_mean
        centered = sanitized - ctx.fixed_matrix.matrix.T @ mean
        return centered @ pinv_t.T + mean
    if adv == "identity":
        if m == n:
            return sanitized.copy()
        padded = np.zeros((sanitized.shape[0], n))
        padded[:, :m] = sanitized
        return padded
    raise ConfigInvalid(f"unknown adversary {adv!r}")  # pragma: no cover


def _as_tuples(values: np.ndarray) -> list[san.SanitizedTuple]:
    return [san.SanitizedTuple(v, f"t{j:05d}", "round") for j, v in enumerate(values)]


def _same_quadrant(cfg: ExperimentConfig) -> bool:
    if cfg.sanitizer == "identity":
        return True
    return (cfg.sanitizer in ("nrp", "nrp-unbounded")
            and cfg.distribution is san.EntryDistribution.UNIT_UNIFORM)


def _robustness_gap(cfg: ExperimentConfig, data: SyntheticDataset,
                    recons: list[np.ndarray]) -> float:
    """Distance between fusion estimates from raw tuples and from the
    adversary's reconstruction embedding; the concept-robustness
    diagnostic at radius = one grid cell.

    Solves the same least-squares problem as :func:`estimate_parameters`
    through its per-agent normal equations, which avoids stacking a
    (agents x observations x n)-row matrix every repetition.
    """
    nobs = data.observations_per_agent
    hs = np.stack([m.matrix for m in data.models])          # (N, n, q)
    raw = np.stack([t.values for t in data.tuples]) - data.shift
    rec = np.asarray(recons) - data.shift
    raw_sum = raw.reshape(data.agent_count, nobs, -1).sum(axis=1)
    rec_sum = rec.reshape(data.agent_count, nobs, -1).sum(axis=1)
    gram = nobs * np.einsum("anq,anr->qr", hs, hs)
    try:
        x_raw = np.linalg.solve(gram, np.einsum("anq,an->q", hs, raw_sum))
        x_rec = np.linalg.solve(gram, np.einsum("anq,an->q", hs, rec_sum))
    except np.linalg.LinAlgError:
        return float("nan")
    return float(np.linalg.norm(x_raw - x_rec))


def _utility_means(cfg: ExperimentConfig, actual: np.ndarray,
                   sanitized: np.ndarray) -> tuple[float, float]:
    """Mean utility/privacy over the round's tuples (vectorized version
    of :func:`privsan.metrics.utility` with trailing zero padding)."""
    n = actual.shape[1]
    m = sanitized.shape[1]
    dots = np.einsum("tj,tj->t", actual[:, :m], sanitized)
    norms = np.linalg.norm(actual, axis=1) * np.linalg.norm(sanitized, axis=1)
    if np.any(norms == 0.0):
        raise ZeroNormInput("utility is undefined for zero-norm tuples")
    cos = np.clip(dots / norms, -1.0, 1.0)
    u = np.clip(cos, 0.0, 1.0) if _same_quadrant(cfg) else cos
    return float(u.mean()), float((1.0 - u).mean())


def run_repetition(cfg: ExperimentConfig, repetition: int) -> RepetitionMetrics:
    rep_rng = Rng(cfg.master_seed).child(repetition)
    data = generate_synthetic(cfg, rep_rng.child(0))
    sanitized, ctx = _sanitize_round(cfg, data, rep_rng.child(1))
    recons = _attack_round(cfg, sanitized, ctx, rep_rng.child(2))

    actual = np.stack([t.values for t in data.tuples])
    if cfg.metric_coordinates == "private":
        cols = sorted(range(cfg.private_count))
        eval_actual, eval_recons = actual[:, cols], recons[:, cols]
    else:
        eval_actual, eval_recons = actual, recons
    breach = met.breach_count(eval_actual, eval_recons, cfg.radius_fraction,
                              cfg.breach_absolute_radius)
    disp = met.displacement(eval_actual, eval_recons)
    resem = met.resemblance(eval_actual, eval_recons, cfg.k_neighbors)
    u_mean, p_mean = _utility_means(cfg, actual, sanitized)
    gap = _robustness_gap(cfg, data, recons)
    return RepetitionMetrics(repetition, breach, disp, resem, u_mean, p_mean, gap)


def run_experiment(cfg: ExperimentConfig) -> ExperimentResult:
    """Run all repetitions of one configuration and average the metrics."""
    rows = [run_repetition(cfg, r) for r in range(cfg.repetitions)]
    rule = (f"absolute-{cfg.breach_absolute_radius:.17g}"
            if cfg.breach_absolute_radius is not None
            else f"relative-{cfg.radius_fraction:.17g}")
    report = met.MetricReport(
        breach_count=float(np.mean([r.breach_count for r in rows])),
        displacement=float(np.mean([r.displacement for r in rows])),
        resemblance=float(np.mean([r.resemblance for r in rows])),
        neighborhood_radius_rule=rule,
        k_neighbors=cfg.k_neighbors,
        repetitions=cfg.repetitions,
    )
    return ExperimentResult(
        config=cfg,
        report=report,
        utility_mean=float(np.mean([r.utility for r in rows])),
        privacy_mean=float(np.mean([r.privacy for r in rows])),
        robustness_gap_mean=float(np.mean([r.robustness_gap for r in rows])),
        per_repetition=rows,
    )


def run_sweep(cfg: ExperimentConfig, agent_grid=SWEEP_AGENT_GRID,
              mechanisms=("nrp", "brp", "pca", "asup")) -> list[dict]:
    """One result row per (mechanism, agent count) grid point."""
    rows = []
    for mech in mechanisms:
        for nagents in agent_grid:
            sub = replace(cfg, sanitizer=mech, agent_count=nagents, adversary="auto")
            res = run_experiment(sub)
            rows.append({
                "mechanism": mech,
                "agents": nagents,
                "min_utility": cfg.min_utility,
                "target_dim": cfg.target_dim,
                "breach_count": res.report.breach_count,
                "displacement": res.report.displacement,
                "resemblance": res.report.resemblance,
                "utility": res.utility_mean,
                "privacy": res.privacy_mean,
            })
    return rows
