"""Command-line front end.

Commands: ``run`` (one experiment), ``sweep`` (mechanism x agent-count
grid), ``verify`` (distance-preservation and dimension-equivalence
checks), ``timing`` (per-tuple cost model), ``ingest`` (CSV loading and
summary).  Exit codes: 0 success, 2 configuration error, 3 runtime
error; diagnostics go to standard error.

Configuration is a flat JSON object whose keys mirror
:class:`privsan.simulate.ExperimentConfig`.  Precedence, highest first:
command-line flags, ``PRIVSAN_<KEY>`` environment variables, the config
file, built-in defaults.  Result files (CSV and JSON reports) are pure
functions of the configuration; timestamps live only in the manifest.
"""

from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import os
import sys
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from . import dataio, timing, verify
from .errors import ConfigInvalid, GammaOutOfRange, PrivsanError, SchemaMismatch
from .simulate import SWEEP_AGENT_GRID, ExperimentConfig, ExperimentResult, run_experiment, run_sweep

ENV_PREFIX = "PRIVSAN_"

RUN_HEADER = [
    "mechanism", "agents", "observations_per_agent", "input_dim", "target_dim",
    "min_utility", "master_seed", "repetitions", "breach_count", "displacement",
    "resemblance", "utility", "privacy", "robustness_gap", "radius_rule",
    "k_neighbors",
]
SWEEP_HEADER = [
    "mechanism", "agents", "min_utility", "target_dim", "breach_count",
    "displacement", "resemblance", "utility", "privacy",
]


def _fmt(value) -> str:
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


def _write_rows(path: Path, header: list[str], rows: list[dict]) -> None:
    with path.open("w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(row[k]) for k in header) + "\n")


def _config_from_sources(args: argparse.Namespace) -> ExperimentConfig:
    fields = {f.name: f for f in dataclasses.fields(ExperimentConfig)}
    values: dict = {}
    if args.config:
        path = Path(args.config)
        if not path.exists():
            raise ConfigInvalid(f"config file not found: {path}")
        try:
            raw = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ConfigInvalid(f"config file is not valid JSON: {exc}") from None
        if not isinstance(raw, dict):
            raise ConfigInvalid("config file must hold one JSON object")
        for key, val in raw.items():
            if key not in fields:
                raise ConfigInvalid(f"unknown config key {key!r}")
            values[key] = val
    for name in fields:
        env = os.environ.get(ENV_PREFIX + name.upper())
        if env is not None:
            values[name] = env
    overrides = {
        "master_seed": args.seed,
        "sanitizer": getattr(args, "mechanism", None),
        "radius_fraction": getattr(args, "radius_fraction", None),
        "k_neighbors": getattr(args, "k_neighbors", None),
    }
    for key, val in overrides.items():
        if val is not None:
            values[key] = val
    coerced = {}
    for key, val in values.items():
        try:
            coerced[key] = _coerce(fields[key].type, val)
        except (TypeError, ValueError) as exc:
            raise ConfigInvalid(f"bad value for {key!r}: {exc}") from None
    try:
        return ExperimentConfig(**coerced)
    except TypeError as exc:
        raise ConfigInvalid(str(exc)) from None


def _coerce(annotation: str, value):
    if value is None:
        return None
    kind = str(annotation)
    if kind == "bool":
        if isinstance(value, bool):
            return value
        return str(value).strip().lower() in ("1", "true", "yes", "on")
    if kind == "int":
        return int(value)
    if kind == "float":
        return float(value)
    if kind.startswith("float | None"):
        return None if str(value).strip().lower() in ("", "none", "null") else float(value)
    return str(value)


def _config_digest(cfg: ExperimentConfig) -> str:
    blob = json.dumps(dataclasses.asdict(cfg), sort_keys=True)
    return hashlib.sha256(blob.encode()).hexdigest()


def _write_manifest(out: Path, cfg_digest: str, started: str, outputs: list[str]) -> None:
    manifest = {
        "config_digest": cfg_digest,
        "started_utc": started,
        "finished_utc": datetime.now(timezone.utc).isoformat(),
        "version": __version__,
        "outputs": outputs,
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n",
                                       encoding="utf-8")


def _result_row(res: ExperimentResult) -> dict:
    cfg = res.config
    return {
        "mechanism": cfg.sanitizer,
        "agents": cfg.agent_count,
        "observations_per_agent": cfg.observations_per_agent,
        "input_dim": cfg.input_dim,
        "target_dim": cfg.target_dim,
        "min_utility": cfg.min_utility,
        "master_seed": cfg.master_seed,
        "repetitions": cfg.repetitions,
        "breach_count": res.report.breach_count,
        "displacement": res.report.displacement,
        "resemblance": res.report.resemblance,
        "utility": res.utility_mean,
        "privacy": res.privacy_mean,
        "robustness_gap": res.robustness_gap_mean,
        "radius_rule": res.report.neighborhood_radius_rule,
        "k_neighbors": res.report.k_neighbors,
    }


def _result_record(res: ExperimentResult, digest: str) -> dict:
    return {
        "config": dataclasses.asdict(res.config),
        "config_digest": digest,
        "report": dataclasses.asdict(res.report),
        "utility_mean": res.utility_mean,
        "privacy_mean": res.privacy_mean,
        "robustness_gap_mean": res.robustness_gap_mean,
        "per_repetition": [dataclasses.asdict(r) for r in res.per_repetition],
    }


def cmd_run(args: argparse.Namespace) -> int:
    cfg = _config_from_sources(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    started = datetime.now(timezone.utc).isoformat()
    res = run_experiment(cfg)
    digest = _config_digest(cfg)
    _write_rows(out / "report.csv", RUN_HEADER, [_result_row(res)])
    (out / "report.json").write_text(
        json.dumps(_result_record(res, digest), indent=2, sort_keys=True) + "\n",
        encoding="utf-8")
    _write_manifest(out, digest, started, ["report.csv", "report.json"])
    r = res.report
    print(f"{cfg.sanitizer}: breach={r.breach_count:.6g} displacement={r.displacement:.6g} "
          f"resemblance={r.resemblance:.6g} utility={res.utility_mean:.6g}")
    return 0


def cmd_sweep(args: argparse.Namespace) -> int:
    cfg = _config_from_sources(args)
    agents = _parse_int_list(args.agents) if args.agents else list(SWEEP_AGENT_GRID)
    mechanisms = args.mechanisms.split(",") if args.mechanisms else ["nrp", "brp", "pca", "asup"]
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    started = datetime.now(timezone.utc).isoformat()
    rows = run_sweep(cfg, agents, mechanisms)
    _write_rows(out / "sweep.csv", SWEEP_HEADER, rows)
    _write_manifest(out, _config_digest(cfg), started, ["sweep.csv"])
    print(f"wrote {len(rows)} rows ({len(mechanisms)} mechanisms x {len(agents)} agent counts)")
    return 0


def cmd_verify(args: argparse.Namespace) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    started = datetime.now(timezone.utc).isoformat()
    trials = verify.preservation_trials(args.gamma, args.points, args.trials, args.seed or 0)
    pres_rows = [{
        "trial": t.trial, "projected_dim": t.projected_dim, "ambient_dim": t.ambient_dim,
        "fraction_subspace": t.fraction_subspace, "fraction_bounded": t.fraction_bounded,
        "ok": int(t.ok),
    } for t in trials]
    _write_rows(out / "preservation.csv",
                ["trial", "projected_dim", "ambient_dim", "fraction_subspace",
                 "fraction_bounded", "ok"], pres_rows)

    table = verify.equivalence_table((2, 10, 100, 1000, 10_000, 100_000),
                                     verify.gamma_grid())
    eq_rows = [{
        "m1": r.m1, "gamma": r.gamma,
        "m2": "" if r.m2 is None else r.m2,
        "within_reference": int(r.within_reference),
    } for r in table]
    _write_rows(out / "equivalence.csv", ["m1", "gamma", "m2", "within_reference"], eq_rows)
    _write_manifest(out, hashlib.sha256(
        f"verify:{args.gamma}:{args.points}:{args.trials}:{args.seed}".encode()).hexdigest(),
        started, ["preservation.csv", "equivalence.csv"])

    bad_trials = [t for t in trials if not t.ok]
    bad_eq = [r for r in table if not r.within_reference]
    print(f"preservation: {len(trials) - len(bad_trials)}/{len(trials)} trials held the "
          f">= 1/2 bound (projected_dim={trials[0].projected_dim})")
    print(f"equivalence: {len(table) - len(bad_eq)}/{len(table)} grid points satisfied "
          f"m2 <= m1")
    if bad_trials or bad_eq:
        print("VIOLATIONS FOUND", file=sys.stderr)
    return 0


def cmd_timing(args: argparse.Namespace) -> int:
    n_grid = _parse_int_list(args.n_grid) if args.n_grid else [128, 256, 512]
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    started = datetime.now(timezone.utc).isoformat()
    rows = timing.measure(n_grid, m=args.target_dim, master_seed=args.seed or 0)
    _write_rows(out / "timing.csv",
                ["mechanism", "phase", "input_dim", "target_dim", "seconds_per_tuple"],
                [dataclasses.asdict(r) for r in rows])
    slope_rows = []
    for mech in ("nrp", "brp", "asup", "pca"):
        slope = timing.loglog_slope(rows, mech)
        slope_rows.append({"mechanism": mech, "phase": "sanitize", "slope": slope})
        print(f"{mech}: per-tuple log-log slope vs n = {slope:.3f}")
    _write_rows(out / "slopes.csv", ["mechanism", "phase", "slope"], slope_rows)
    _write_manifest(out, hashlib.sha256(str(n_grid).encode()).hexdigest(), started,
                    ["timing.csv", "slopes.csv"])
    return 0


def cmd_ingest(args: argparse.Namespace) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    started = datetime.now(timezone.utc).isoformat()
    schema = dataio.DatasetSchema.from_json(args.schema)
    result = dataio.load_csv(args.data, schema, shift_nonnegative=not args.raw)
    names = [c.name for c in schema.retained]
    summary = dataio.summarize(result.tuples, names)
    dataio.write_csv(result.tuples, out / "processed.csv", names)
    record = {
        "count": summary.count,
        "columns": summary.column_names,
        "minima": [float(v) for v in summary.minima],
        "maxima": [float(v) for v in summary.maxima],
        "means": [float(v) for v in summary.means],
        "max_tuple_norm": summary.max_tuple_norm,
        "column_shifts": [float(v) for v in result.column_shifts],
        "private_positions": sorted(schema.private_positions),
    }
    (out / "summary.json").write_text(json.dumps(record, indent=2, sort_keys=True) + "\n",
                                      encoding="utf-8")
    _write_manifest(out, hashlib.sha256(Path(args.data).read_bytes()).hexdigest(), started,
                    ["processed.csv", "summary.json"])
    print(f"loaded {summary.count} tuples x {len(names)} columns; "
          f"max tuple norm {summary.max_tuple_norm:.6g}")
    return 0


def _parse_int_list(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="privsan",
        description="Privacy sanitization benchmark: norm-bounded random projection "
                    "against fixed-projection, component and noise baselines.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, mechanism_flag=True):
        p.add_argument("--config", help="JSON config file (keys mirror ExperimentConfig)")
        p.add_argument("--seed", type=int, help="master seed override")
        p.add_argument("--out", default="out", help="output directory")
        if mechanism_flag:
            p.add_argument("--mechanism",
                           choices=["nrp", "nrp-unbounded", "brp", "pca", "asup", "identity"])
            p.add_argument("--radius-fraction", type=float, dest="radius_fraction")
            p.add_argument("--k-neighbors", type=int, dest="k_neighbors")

    p_run = sub.add_parser("run", help="run one experiment and write its report")
    common(p_run)
    p_run.set_defaults(fn=cmd_run)

    p_sweep = sub.add_parser("sweep", help="mechanism x agent-count grid")
    common(p_sweep)
    p_sweep.add_argument("--agents", help="comma-separated agent counts")
    p_sweep.add_argument("--mechanisms", help="comma-separated mechanism list")
    p_sweep.set_defaults(fn=cmd_sweep)

    p_ver = sub.add_parser("verify", help="distance-preservation and equivalence checks")
    p_ver.add_argument("--gamma", type=float, default=0.2)
    p_ver.add_argument("--points", type=int, default=100)
    p_ver.add_argument("--trials", type=int, default=50)
    p_ver.add_argument("--seed", type=int, default=0)
    p_ver.add_argument("--out", default="out")
    p_ver.set_defaults(fn=cmd_verify)

    p_tim = sub.add_parser("timing", help="per-tuple sanitization cost model")
    p_tim.add_argument("--n-grid", dest="n_grid", help="comma-separated input dims")
    p_tim.add_argument("--target-dim", type=int, default=20)
    p_tim.add_argument("--seed", type=int, default=0)
    p_tim.add_argument("--out", default="out")
    p_tim.set_defaults(fn=cmd_timing)

    p_ing = sub.add_parser("ingest", help="load a CSV dataset through a schema")
    p_ing.add_argument("--data", required=True, help="CSV file")
    p_ing.add_argument("--schema", required=True, help="schema JSON file")
    p_ing.add_argument("--raw", action="store_true",
                       help="skip the nonnegativity column shifts")
    p_ing.add_argument("--out", default="out")
    p_ing.set_defaults(fn=cmd_ingest)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (ConfigInvalid, SchemaMismatch, GammaOutOfRange, FileNotFoundError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except PrivsanError as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
