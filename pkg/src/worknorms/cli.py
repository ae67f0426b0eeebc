"""Command-line front end: scenario runs, the full matrix, sweeps, similarity.

Every command writes CSV artifacts plus a JSON run manifest into one output
directory, and renders PNG figures unless --no-plots is given. CSVs are
locale independent (period decimal separator, fixed column order, header
row, plain newline endings), so repeated invocations with the same seed
produce byte-identical files.

Settings resolve in three layers: built-in defaults, then a flat key=value
config file (--config; '#' starts a comment, unknown keys are rejected),
then explicit command-line flags. The output directory comes from
--out-dir, else the config file, else the WORKNORMS_OUT_DIR environment
variable, else the current directory.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import datetime
import json
import os
import sys
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from . import __version__, plotting
from .behavior import ManagementStance
from .engine import (
    ENVIRONMENTS,
    SCENARIOS,
    TYPE_NAMES,
    DiagnosticError,
    MetricsSeries,
    ModelParams,
    ReplicateResult,
    ScenarioConfig,
    run_matrix,
    run_replicates,
    scenario,
)
from .sweeps import (
    DIST_SETTINGS,
    SweepResult,
    SweepSpec,
    dist_label,
    environment_similarity,
    h_variance_report,
    run_sweep,
    similarity_from_matrix,
)

__all__ = ["main", "OUT_DIR_ENV", "load_config", "UsageError"]

OUT_DIR_ENV = "WORKNORMS_OUT_DIR"

MANIFEST_NAME = "run_manifest.json"


class UsageError(ValueError):
    """Bad invocation or config input; exits with the usage status (2)."""


# ---------------------------------------------------------------------------
# config files and setting merges
# ---------------------------------------------------------------------------

def _parse_dist(text: str) -> Tuple[float, ...]:
    """A named setting ('uniform') or four comma-separated shares."""
    key = text.strip().lower()
    if key in DIST_SETTINGS:
        return DIST_SETTINGS[key]
    try:
        shares = tuple(float(x) for x in text.split(","))
    except ValueError:
        raise UsageError(f"bad dist value {text!r}: expected a name or four shares")
    if len(shares) != 4:
        raise UsageError(f"bad dist value {text!r}: expected four shares")
    return shares


def _parse_int(key: str, text: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise UsageError(f"bad value for {key}: {text!r} is not an integer")


def _parse_float(key: str, text: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise UsageError(f"bad value for {key}: {text!r} is not a number")


# config keys mirror the model parameters, the scenario fields, the output
# path, and the replicate count; anything else is rejected
_CONFIG_PARSERS = {
    "numagents": lambda v: _parse_int("numagents", v),
    "steps": lambda v: _parse_int("steps", v),
    "numpeers": lambda v: _parse_int("numpeers", v),
    "dist": _parse_dist,
    "kappa": lambda v: _parse_float("kappa", v),
    "tau": lambda v: _parse_float("tau", v),
    "w": lambda v: _parse_float("w", v),
    "h": lambda v: _parse_float("h", v),
    "seed": lambda v: _parse_int("seed", v),
    "overflow": str.strip,
    "norm_formula": str.strip,
    "scenario": lambda v: v.strip().lower(),
    "environment": lambda v: v.strip().lower(),
    "stance": lambda v: v.strip().lower(),
    "mu": lambda v: _parse_int("mu", v),
    "lambda": lambda v: _parse_int("lambda", v),
    "replicates": lambda v: _parse_int("replicates", v),
    "out_dir": str.strip,
}

_PARAM_KEYS = ("numagents", "steps", "numpeers", "dist", "kappa", "tau", "w", "h",
               "seed", "overflow", "norm_formula")


def load_config(path: str) -> Dict[str, object]:
    """Flat key=value file; blank lines and '#' comments are skipped."""
    values: Dict[str, object] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{lineno}: expected key=value, got {raw.strip()!r}")
            key, _, value = line.partition("=")
            key = key.strip().lower()
            if key not in _CONFIG_PARSERS:
                raise UsageError(
                    f"{path}:{lineno}: unknown config key {key!r}; "
                    f"expected one of {sorted(_CONFIG_PARSERS)}"
                )
            values[key] = _CONFIG_PARSERS[key](value.strip())
    return values


def _merge_settings(args: argparse.Namespace) -> Dict[str, object]:
    """Config-file values overlaid with any flags the user actually set."""
    merged: Dict[str, object] = {}
    if getattr(args, "config", None):
        merged.update(load_config(args.config))
    for key in _CONFIG_PARSERS:
        attr = key.replace("-", "_")
        if key == "lambda":
            attr = "lam"
        flag = getattr(args, attr, None)
        if flag is not None:
            merged[key] = _CONFIG_PARSERS[key](flag) if isinstance(flag, str) else flag
    return merged


def _build_params(settings: Dict[str, object]) -> ModelParams:
    kwargs = {k: settings[k] for k in _PARAM_KEYS if k in settings}
    try:
        return ModelParams(**kwargs)
    except ValueError as exc:
        raise UsageError(str(exc))


def _build_scenario(settings: Dict[str, object], default_name: str = "base") -> ScenarioConfig:
    name = str(settings.get("scenario", default_name))
    env = str(settings.get("environment", "global"))
    try:
        cfg = scenario(name, environment=env)
        overrides: Dict[str, object] = {}
        if "stance" in settings:
            overrides["stance"] = ManagementStance(str(settings["stance"]))
        if "mu" in settings:
            overrides["mu"] = settings["mu"]
        if "lambda" in settings:
            overrides["lam"] = settings["lambda"]
        if overrides:
            cfg = dataclasses.replace(cfg, **overrides)
        return cfg
    except ValueError as exc:
        raise UsageError(str(exc))


def _resolve_out_dir(settings: Dict[str, object]) -> str:
    out_dir = str(settings.get("out_dir") or os.environ.get(OUT_DIR_ENV) or ".")
    os.makedirs(out_dir, exist_ok=True)
    return out_dir


# ---------------------------------------------------------------------------
# artifact writers
# ---------------------------------------------------------------------------

SERIES_HEADER: List[str] = (
    ["step"]
    + [f"t_p_{t}" for t in TYPE_NAMES]
    + [f"t_c_{t}" for t in TYPE_NAMES]
    + [f"t_s_{t}" for t in TYPE_NAMES]
    + [f"output_{t}" for t in TYPE_NAMES]
    + ["pct_ogo", "norm_coop", "norm_shirk", "dev_var_coop", "dev_var_shirk",
       "total_reward"]
)


def _num(value: object) -> str:
    return str(float(value))


def _write_csv(path: str, header: Sequence[str], rows: Iterable[Sequence[str]]) -> str:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
    return path


def _series_rows(m: MetricsSeries) -> Iterable[List[str]]:
    for i in range(m.steps):
        row = [str(i + 1)]
        for arr in (m.mean_t_p, m.mean_t_c, m.mean_t_s, m.mean_output_type):
            row.extend(_num(v) for v in arr[i])
        row.extend(
            _num(v)
            for v in (m.pct_ogo[i], m.norm_coop[i], m.norm_shirk[i],
                      m.dev_var_coop[i], m.dev_var_shirk[i], m.total_reward[i])
        )
        yield row


def write_series_csv(path: str, series: MetricsSeries) -> str:
    return _write_csv(path, SERIES_HEADER, _series_rows(series))


def write_comparison_csv(
    path: str,
    matrix: Dict[Tuple[str, str], ReplicateResult],
    environments: Sequence[str],
) -> str:
    header = ["scenario", "environment", "step", "pct_ogo"]
    rows = (
        [name, env, str(i + 1), _num(matrix[(name, env)].mean.pct_ogo[i])]
        for env in environments
        for name in SCENARIOS
        for i in range(matrix[(name, env)].mean.steps)
    )
    return _write_csv(path, header, rows)


def write_similarity_csv(path: str, result) -> str:
    envs = [env for env, _ in result.rows[0].y]
    header = (
        ["scenario"]
        + [f"y_{e}" for e in envs]
        + ["y_mean"]
        + [f"rel_dev_{e}" for e in envs]
        + ["std", "pct_std"]
    )
    rows = []
    for row in result.rows:
        y = dict(row.y)
        dev = dict(row.rel_dev)
        rows.append(
            [row.scenario]
            + [_num(y[e]) for e in envs]
            + [_num(row.y_bar)]
            + [_num(dev[e]) for e in envs]
            + [_num(row.std), _num(row.pct_std)]
        )
    return _write_csv(path, header, rows)


def write_sweep_csv(path: str, sweep: SweepResult) -> str:
    dims = sweep.spec.dimensions
    header = ["scenario", "environment", "type"] + list(dims) + [
        "output_mean", "output_std", "output_median",
        "t_p_mean", "t_c_mean", "t_s_mean",
    ]
    rows = []
    for row in sweep.rows:
        d = row.settings_dict
        rows.append(
            [row.scenario, row.environment, row.type_name]
            + [str(d[dim]) for dim in dims]
            + [_num(v) for v in (row.output_mean, row.output_std, row.output_median,
                                 row.t_p_mean, row.t_c_mean, row.t_s_mean)]
        )
    return _write_csv(path, header, rows)


def write_h_variance_csv(path: str, report) -> str:
    header = ["h", "step", "dev_var_coop", "dev_var_shirk"]
    rows = (
        [_num(h), str(i + 1), _num(report.dev_var_coop[h][i]), _num(report.dev_var_shirk[h][i])]
        for h in report.h_values
        for i in range(len(report.dev_var_coop[h]))
    )
    return _write_csv(path, header, rows)


def _write_manifest(out_dir: str, payload: Dict[str, object]) -> str:
    manifest = {
        "version": __version__,
        "created": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        "seed_scheme": {
            "streams": ["types", "behavior", "order", "peers"],
            "replicate_seed": "base seed + replicate index",
        },
    }
    manifest.update(payload)
    path = os.path.join(out_dir, MANIFEST_NAME)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2)
        fh.write("\n")
    return path


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def _parse_env_list(text: str) -> List[str]:
    envs = [e.strip().lower() for e in text.split(",") if e.strip()]
    for e in envs:
        if e not in ENVIRONMENTS:
            raise UsageError(f"unknown environment {e!r}; expected one of {ENVIRONMENTS}")
    if not envs:
        raise UsageError("empty environment list")
    if len(set(envs)) != len(envs):
        raise UsageError("duplicate environments")
    return envs


def cmd_run(args: argparse.Namespace) -> int:
    settings = _merge_settings(args)
    if "scenario" not in settings:
        raise UsageError("run needs a scenario (--scenario or config file)")
    params = _build_params(settings)
    cfg = _build_scenario(settings)
    replicates = int(settings.get("replicates", 50))
    out_dir = _resolve_out_dir(settings)

    result = run_replicates(cfg, params, n_replicates=replicates)
    artifacts = [write_series_csv(os.path.join(out_dir, f"{cfg.name}.csv"), result.mean)]
    if not args.no_plots:
        artifacts.append(
            plotting.plot_run(result.mean, os.path.join(out_dir, f"{cfg.name}.png"),
                              title=cfg.name)
        )
    _write_manifest(out_dir, {
        "command": "run",
        "scenario": cfg.to_dict(),
        "params": params.to_dict(),
        "replicates": replicates,
        "aggregate_output": result.aggregate_output,
        "diagnostics_ok": True,
        "artifacts": [os.path.basename(a) for a in artifacts],
    })
    terminal = float(result.mean.pct_ogo[-100:].mean())
    print(f"{cfg.name}: Y={result.aggregate_output:.2f} "
          f"terminal %OGO={terminal:.2f} (mean of last 100 steps) -> {out_dir}")
    return 0


def cmd_matrix(args: argparse.Namespace) -> int:
    settings = _merge_settings(args)
    params = _build_params(settings)
    replicates = int(settings.get("replicates", 50))
    out_dir = _resolve_out_dir(settings)
    environments = _parse_env_list(args.environments)

    matrix = run_matrix(params, environments=environments, n_replicates=replicates)
    artifacts = []
    multi = len(environments) > 1
    for env in environments:
        for name in SCENARIOS:
            fname = f"{name}_{env}.csv" if multi else f"{name}.csv"
            artifacts.append(
                write_series_csv(os.path.join(out_dir, fname), matrix[(name, env)].mean)
            )
    artifacts.append(
        write_comparison_csv(os.path.join(out_dir, "comparison.csv"), matrix, environments)
    )
    if multi:
        sim = similarity_from_matrix(matrix, environments, replicates, params.seed)
        artifacts.append(write_similarity_csv(os.path.join(out_dir, "similarity.csv"), sim))
    if not args.no_plots:
        for env in environments:
            artifacts.append(
                plotting.plot_matrix(matrix, os.path.join(out_dir, f"matrix_{env}.png"),
                                     environment=env)
            )
    _write_manifest(out_dir, {
        "command": "matrix",
        "environments": environments,
        "params": params.to_dict(),
        "replicates": replicates,
        "aggregate_output": {
            f"{name}_{env}" if multi else name: matrix[(name, env)].aggregate_output
            for env in environments
            for name in SCENARIOS
        },
        "diagnostics_ok": True,
        "artifacts": [os.path.basename(a) for a in artifacts],
    })
    print(f"matrix: {len(SCENARIOS) * len(environments)} cells x {replicates} replicates "
          f"-> {out_dir}")
    return 0


def _sweep_values(args: argparse.Namespace) -> tuple:
    """The value list for the chosen dimension, honoring --values/--shares."""
    if args.shares is not None and args.dim != "dist":
        raise UsageError("--shares only applies to --dim dist")
    if args.shares is not None and args.values is not None:
        raise UsageError("give either --values or --shares, not both")
    if args.dim == "dist":
        if args.shares is not None:
            major = float(args.shares)
            if not 0.0 < major <= 1.0:
                raise UsageError("--shares must be in (0, 1]")
            minor = (1.0 - major) / 3.0
            skewed = [
                tuple(major if i == k else minor for i in range(4)) for k in range(4)
            ]
            return tuple([DIST_SETTINGS["uniform"]] + skewed)
        if args.values is None:
            return tuple(DIST_SETTINGS)
        return tuple(_parse_dist(v) for v in args.values.split(";"))
    defaults = {"h": (0.1, 0.5, 1.0), "kappa": (0.0, 0.5, 1.0)}
    if args.values is None:
        return defaults[args.dim]
    try:
        return tuple(float(v) for v in args.values.split(","))
    except ValueError:
        raise UsageError(f"bad --values {args.values!r}: expected comma-separated numbers")


def cmd_sweep(args: argparse.Namespace) -> int:
    settings = _merge_settings(args)
    params = _build_params(settings)
    replicates = int(settings.get("replicates", 15))
    out_dir = _resolve_out_dir(settings)
    values = _sweep_values(args)

    try:
        spec = SweepSpec(dimension=args.dim, values=values, replicates=replicates)
    except ValueError as exc:
        raise UsageError(str(exc))
    sweep = run_sweep(spec, params)
    artifacts = [write_sweep_csv(os.path.join(out_dir, f"sweep_{args.dim}.csv"), sweep)]
    report = None
    if args.dim == "h":
        report = h_variance_report(
            params, h_values=values, n_replicates=replicates,
        )
        artifacts.append(write_h_variance_csv(os.path.join(out_dir, "h_variance.csv"), report))
    if not args.no_plots:
        artifacts.append(
            plotting.plot_sweep(sweep, os.path.join(out_dir, f"sweep_{args.dim}.png"))
        )
        if report is not None:
            artifacts.append(
                plotting.plot_h_variance(report, os.path.join(out_dir, "h_variance.png"))
            )
    manifest_values = [dist_label(v) if args.dim == "dist" else v for v in values]
    _write_manifest(out_dir, {
        "command": "sweep",
        "dimension": args.dim,
        "values": manifest_values,
        "params": params.to_dict(),
        "replicates": replicates,
        "runs": spec.run_count,
        "diagnostics_ok": True,
        "artifacts": [os.path.basename(a) for a in artifacts],
    })
    print(f"sweep {args.dim}: {spec.constellation_count} constellations x "
          f"{replicates} replicates -> {out_dir}")
    return 0


def cmd_similarity(args: argparse.Namespace) -> int:
    settings = _merge_settings(args)
    params = _build_params(settings)
    replicates = int(settings.get("replicates", 50))
    out_dir = _resolve_out_dir(settings)
    environments = _parse_env_list(args.environments)
    if len(environments) < 2:
        raise UsageError("similarity needs at least two environments")

    result = environment_similarity(params, n_replicates=replicates,
                                    environments=environments)
    artifacts = [write_similarity_csv(os.path.join(out_dir, "similarity.csv"), result)]
    if not args.no_plots:
        artifacts.append(
            plotting.plot_similarity(result, os.path.join(out_dir, "similarity.png"))
        )
    _write_manifest(out_dir, {
        "command": "similarity",
        "environments": environments,
        "params": params.to_dict(),
        "replicates": replicates,
        "max_abs_rel_dev": result.max_abs_rel_dev,
        "diagnostics_ok": True,
        "artifacts": [os.path.basename(a) for a in artifacts],
    })
    print(f"similarity: max |Y - Ybar| / Ybar = {result.max_abs_rel_dev:.4f} -> {out_dir}")
    return 0


# ---------------------------------------------------------------------------
# parser and entry point
# ---------------------------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key=value config file")
    common.add_argument("--seed", type=int, help="base seed (replicate i uses seed + i)")
    common.add_argument("--replicates", type=int, help="replicates per scenario")
    common.add_argument("--out-dir", dest="out_dir", help="output directory "
                        f"(default: ${OUT_DIR_ENV} or the current directory)")
    common.add_argument("--no-plots", action="store_true", help="skip PNG rendering")
    common.add_argument("--numagents", type=int, help="agents per run")
    common.add_argument("--steps", type=int, help="steps per run")
    common.add_argument("--numpeers", type=int, help="peers per agent (local norms)")
    common.add_argument("--dist", help="type shares: a name like 'uniform' or four "
                        "comma-separated numbers")
    common.add_argument("--kappa", type=float, help="cooperation weight in production")
    common.add_argument("--tau", type=float, help="hours per step")
    common.add_argument("--w", type=float, help="hourly base wage")
    common.add_argument("--h", type=float, help="norm adjustment rate")
    common.add_argument("--overflow", help="time-budget overflow policy")
    common.add_argument("--norm-formula", dest="norm_formula",
                        help="norm update form: weighted or literal")

    parser = argparse.ArgumentParser(
        prog="worknorms",
        description="Agent-based simulator of work-time allocation under social norms.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", parents=[common], help="one scenario, averaged series")
    p_run.add_argument("--scenario", help=f"one of {tuple(SCENARIOS)}")
    p_run.add_argument("--environment", help=f"norm environment, one of {ENVIRONMENTS}")
    p_run.set_defaults(func=cmd_run)

    p_matrix = sub.add_parser("matrix", parents=[common], help="all nine scenarios")
    p_matrix.add_argument("--environments", default="global",
                          help="comma-separated norm environments")
    p_matrix.set_defaults(func=cmd_matrix)

    p_sweep = sub.add_parser("sweep", parents=[common], help="one-dimension sensitivity sweep")
    p_sweep.add_argument("--dim", required=True, choices=("dist", "h", "kappa"),
                         help="swept dimension")
    p_sweep.add_argument("--values", help="comma-separated values "
                         "(dist: ';'-separated names or share quadruples)")
    p_sweep.add_argument("--shares", type=float,
                         help="dist only: majority share; builds uniform + four skewed")
    p_sweep.set_defaults(func=cmd_sweep)

    p_sim = sub.add_parser("similarity", parents=[common],
                           help="aggregate output across norm environments")
    p_sim.add_argument("--environments", default=",".join(ENVIRONMENTS),
                       help="comma-separated norm environments (at least two)")
    p_sim.set_defaults(func=cmd_similarity)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except DiagnosticError as exc:
        print(f"diagnostic failure: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
