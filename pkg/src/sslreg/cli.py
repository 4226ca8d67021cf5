"""Command-line interface.

Four commands: `fit` compares least squares against the
partial-information estimator on user data and reports coefficients,
standard errors and the estimated excess-risk ratio; `se` reports every
available covariance estimate; `toy` replicates the quadratic-model
variance experiment; `simulate` runs a scenario sweep from a grid file.

Every report embeds the fully resolved configuration, including the
seed, so any output can be reproduced from the report alone. Files are
written to a temporary name and renamed into place, so a failing run
never leaves a partial report. Exit codes: 1 for usage or configuration
problems, 2 for data problems, 3 for numerical failures.
"""

import argparse
import json
import os
import sys
import tempfile

import numpy as np

from .dataset import MomentSpec, empirical_moments, load_csv
from .errors import (
    ConfigError,
    DataError,
    ParseError,
    SchemaError,
    SslregError,
)
from .estimators import fit_pi, fit_ti
from .linreg import fit_least_squares, sandwich_cov_lse
from .risk import err_hat_pi, mean_prediction_error, prediction_error_difference
from .simlab import (
    ToySpec,
    grid_from_json,
    scenario_sweep,
    sweep_rows_to_csv,
    toy_variance_experiment,
)
from .variance import (
    BootstrapPlan,
    ResampleScheme,
    av_parametric_pi,
    bootstrap_lse,
    bootstrap_pi,
    variance_bootstrap_pi,
)

THREADS_ENV = "SSLREG_THREADS"


class _Parser(argparse.ArgumentParser):
    """argparse, but usage errors exit with code 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _resolve_threads(flag_value):
    if flag_value is not None:
        value = flag_value
    elif os.environ.get(THREADS_ENV):
        try:
            value = int(os.environ[THREADS_ENV])
        except ValueError:
            raise ConfigError(
                f"{THREADS_ENV} must be an integer, got {os.environ[THREADS_ENV]!r}"
            ) from None
    else:
        value = os.cpu_count() or 1
    if value < 1:
        raise ConfigError(f"thread count must be positive, got {value}")
    return value


def _atomic_write(path, write_fn):
    """Write through a temp file and rename, or to stdout when path is None."""
    if path is None:
        write_fn(sys.stdout)
        return
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".sslreg-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            write_fn(fh)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def _read_text(path, kind_error):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise kind_error(f"cannot read {path}: {exc}") from None


def _load_moments(path, column_names):
    """Moments file: JSON with mean, second_moment and optional columns.

    When "columns" is present the arrays are reordered to the dataset's
    predictor order; otherwise they are taken to follow it already.
    """
    text = _read_text(path, DataError)
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(
            f"{path}: not valid JSON: {exc.msg} (line {exc.lineno})"
        ) from None
    if not isinstance(data, dict) or "mean" not in data or "second_moment" not in data:
        raise SchemaError(f"{path}: moments file needs 'mean' and 'second_moment'")
    mean = np.asarray(data["mean"], dtype=float).reshape(-1)
    second = np.asarray(data["second_moment"], dtype=float)
    if "columns" in data:
        cols = [str(c) for c in data["columns"]]
        if sorted(cols) != sorted(column_names):
            raise SchemaError(
                f"{path}: moment columns {cols} do not match dataset "
                f"columns {list(column_names)}"
            )
        order = [cols.index(name) for name in column_names]
        mean = mean[order]
        second = second[np.ix_(order, order)]
    if mean.size != len(column_names):
        raise SchemaError(
            f"{path}: mean has length {mean.size}, dataset has "
            f"{len(column_names)} predictors"
        )
    try:
        return MomentSpec(mean=mean, second_moment=second)
    except ValueError as exc:
        raise SchemaError(f"{path}: {exc}") from None


def _config_dict(args, threads):
    keys = (
        "command", "labeled", "unlabeled", "label_col", "moments", "grid",
        "alpha", "beta", "n", "m", "reps", "nbs", "seed", "max_reps",
        "target_se", "methods", "out", "format",
    )
    cfg = {}
    for key in keys:
        value = getattr(args, key, None)
        if value is not None:
            cfg[key] = value
    cfg["threads"] = threads
    return cfg


def _json_report(report):
    def write(fh):
        json.dump(report, fh, indent=2, allow_nan=True)
        fh.write("\n")

    return write


def _csv_report(config, rows, fieldnames, footer=None):
    def write(fh):
        import csv as _csv

        fh.write("# config: " + json.dumps(config) + "\n")
        writer = _csv.DictWriter(fh, fieldnames=fieldnames, extrasaction="ignore",
                                 lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow(row)
        for line in footer or ():
            fh.write("# " + line + "\n")

    return write


def _fmt(value):
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return value


def _load_dataset(args):
    try:
        return load_csv(args.labeled, args.unlabeled, label_column=args.label_col)
    except OSError as exc:
        raise DataError(f"cannot read input: {exc}") from None


def cmd_fit(args):
    threads = _resolve_threads(args.threads)
    d = _load_dataset(args)
    n = d.n
    lse = fit_least_squares(d.labeled_x, d.labeled_y)
    pi = fit_pi(d)
    moments = None
    ti = None
    if args.moments:
        moments = _load_moments(args.moments, d.column_names)
        ti = fit_ti(d, moments)

    plan_lse = BootstrapPlan(args.nbs, args.seed, ResampleScheme.PAIRS_LABELED_ONLY)
    plan_pi = BootstrapPlan(args.nbs, args.seed,
                            ResampleScheme.PAIRS_LABELED_PLUS_UNLABELED)
    bs_lse = bootstrap_lse(d, plan_lse)
    vbs, delta = variance_bootstrap_pi(d, plan_pi)
    bs_pi = bootstrap_pi(d, plan_pi)

    se_lse = np.concatenate(
        [[np.sqrt(bs_lse.full_values[0, 0] / n)], bs_lse.standard_errors(n)]
    )
    se_pi = np.concatenate(
        [[np.sqrt(bs_pi.full_values[0, 0] / n)], vbs.standard_errors(n)]
    )
    names = ["(intercept)"] + list(d.column_names)
    beta_lse = np.concatenate([[lse.intercept], lse.slopes])
    beta_pi = pi.coefficient_vector()
    beta_ti = ti.coefficient_vector() if ti is not None else None

    rows = []
    for i, name in enumerate(names):
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = float(se_lse[i] / se_pi[i])
        row = {
            "name": name,
            "beta_lse": float(beta_lse[i]),
            "se_lse": float(se_lse[i]),
            "beta_pi": float(beta_pi[i]),
            "se_pi": float(se_pi[i]),
            "se_pi_method": "pairs-bootstrap" if i == 0 else "variance-bootstrap",
            "se_ratio": ratio,
        }
        if beta_ti is not None:
            row["beta_ti"] = float(beta_ti[i])
        rows.append(row)

    err = err_hat_pi(d, lse, bs_lse, delta)
    m_hat = empirical_moments(d).covariance
    pred_diff = prediction_error_difference(m_hat, bs_lse, vbs, n)
    if d.m > 0:
        mean_pred = mean_prediction_error(d.unlabeled_x, bs_lse, n)
    else:
        mean_pred = None
    advisory = []
    if d.m == 0:
        advisory.append(
            "no unlabeled rows were supplied; the PI estimator coincides "
            "with least squares"
        )

    config = _config_dict(args, threads)
    risk = {
        "err_hat_pi": err,
        "prediction_error_difference": pred_diff,
        "mean_prediction_error": mean_pred,
        "mean_prediction_error_covariance": "bootstrap-lse",
        "bootstrap_replicates": args.nbs,
    }
    if args.format == "json":
        report = {
            "config": config,
            "n": d.n,
            "m": d.m,
            "advisory": advisory,
            "coefficients": rows,
            "risk": risk,
        }
        _atomic_write(args.out, _json_report(report))
    else:
        fieldnames = ["name", "beta_lse", "se_lse", "beta_pi", "se_pi",
                      "se_pi_method", "se_ratio"]
        if beta_ti is not None:
            fieldnames.append("beta_ti")
        footer = [f"n: {d.n}", f"m: {d.m}"]
        footer += [f"{k}: {_fmt(v)}" for k, v in risk.items()]
        footer += [f"advisory: {a}" for a in advisory]
        _atomic_write(args.out, _csv_report(config, rows, fieldnames, footer))


def cmd_se(args):
    threads = _resolve_threads(args.threads)
    d = _load_dataset(args)
    n = d.n
    lse = fit_least_squares(d.labeled_x, d.labeled_y)
    sandwich = sandwich_cov_lse(d.labeled_x, lse.residuals)
    pi = fit_pi(d)
    parametric_pi = av_parametric_pi(d, pi, sandwich)
    plan_lse = BootstrapPlan(args.nbs, args.seed, ResampleScheme.PAIRS_LABELED_ONLY)
    plan_pi = BootstrapPlan(args.nbs, args.seed,
                            ResampleScheme.PAIRS_LABELED_PLUS_UNLABELED)
    bs_lse = bootstrap_lse(d, plan_lse)
    bs_pi = bootstrap_pi(d, plan_pi)
    vbs, delta = variance_bootstrap_pi(d, plan_pi)

    estimates = {
        "sandwich_lse": sandwich,
        "bootstrap_lse": bs_lse,
        "parametric_pi": parametric_pi,
        "bootstrap_pi": bs_pi,
        "variance_bootstrap_pi": vbs,
    }
    rows = []
    for j, name in enumerate(d.column_names):
        row = {"name": name, "beta_lse": float(lse.slopes[j]),
               "beta_pi": float(pi.beta[j])}
        for key, cov in estimates.items():
            row[f"se_{key}"] = float(cov.standard_errors(n)[j])
        rows.append(row)

    config = _config_dict(args, threads)
    if args.format == "json":
        report = {
            "config": config,
            "n": d.n,
            "m": d.m,
            "coefficients": rows,
            "matrices": {
                key: cov.values.tolist() for key, cov in estimates.items()
            },
            "delta_hat": delta.tolist(),
            "replicates": {
                key: cov.replicates for key, cov in estimates.items()
            },
        }
        _atomic_write(args.out, _json_report(report))
    else:
        fieldnames = ["name", "beta_lse", "beta_pi"] + [
            f"se_{key}" for key in estimates
        ]
        footer = [f"n: {d.n}", f"m: {d.m}",
                  "matrices and delta_hat are available with --format json"]
        _atomic_write(args.out, _csv_report(config, rows, fieldnames, footer))


def cmd_toy(args):
    threads = _resolve_threads(args.threads)
    spec = ToySpec(alpha=args.alpha, beta=args.beta, n=args.n, m=args.m)
    result = toy_variance_experiment(spec, reps=args.reps, n_bs=args.nbs,
                                     seed=args.seed)
    summary = result.summary()
    config = _config_dict(args, threads)
    if args.format == "json":
        _atomic_write(args.out, _json_report({"config": config, **summary}))
        return
    rows = []
    for section in ("variance", "difference"):
        for estimator, cell in summary[section].items():
            rows.append({
                "section": section,
                "estimator": estimator,
                "mean": cell["mean"],
                "sd": cell["sd"],
                "frac_negative": cell.get("frac_negative", ""),
            })
    footer = [f"{k}: {_fmt(v)}" for k, v in summary["analytic"].items()]
    fieldnames = ["section", "estimator", "mean", "sd", "frac_negative"]
    _atomic_write(args.out, _csv_report(config, rows, fieldnames, footer))


def cmd_simulate(args):
    threads = _resolve_threads(args.threads)
    if args.out is None and args.format == "csv":
        raise ConfigError("simulate needs --out (it writes a CSV and a summary file)")
    text = _read_text(args.grid, ConfigError)
    grid = grid_from_json(text, default_seed=args.seed)
    methods = tuple(m.strip().upper() for m in args.methods.split(",") if m.strip())
    rows, summary = scenario_sweep(
        grid,
        methods=methods,
        max_reps=args.max_reps,
        target_se=args.target_se,
        threads=threads,
    )
    config = _config_dict(args, threads)
    if args.format == "json":
        report = {"config": config, "rows": rows, "summary": summary}
        _atomic_write(args.out, _json_report(report))
        return

    def write_rows(fh):
        fh.write("# config: " + json.dumps(config) + "\n")
        sweep_rows_to_csv(rows, fh, methods=methods)

    _atomic_write(args.out, write_rows)
    base, _ = os.path.splitext(args.out)
    summary_path = base + ".summary.json"
    _atomic_write(summary_path, _json_report({"config": config, "summary": summary}))
    for method, block in summary["methods"].items():
        overall = block["overall"]
        sys.stdout.write(
            f"{method}: {overall['evaluated']} cells evaluated, "
            f"{overall['below_1']} significantly below 1, "
            f"{overall['above_1']} above\n"
        )


def _add_common(parser, data=False, bootstrap=False):
    parser.add_argument("--seed", type=int, default=0, help="base seed")
    parser.add_argument("--threads", type=int, default=None,
                        help=f"worker threads (default: {THREADS_ENV} or all cores)")
    parser.add_argument("--out", default=None,
                        help="output path (default: stdout)")
    parser.add_argument("--format", choices=("csv", "json"), default="csv",
                        help="report format")
    if data:
        parser.add_argument("--labeled", required=True,
                            help="CSV with predictors and the label column")
        parser.add_argument("--unlabeled", default=None,
                            help="optional CSV with unlabeled predictor rows")
        parser.add_argument("--label-col", dest="label_col", default="y",
                            help="label column name (default: y)")
    if bootstrap:
        parser.add_argument("--nbs", type=int, default=1000,
                            help="bootstrap replicates (default: 1000)")


def _build_parser():
    parser = _Parser(
        prog="sslreg",
        description="Semi-supervised linear regression: estimation, "
                    "standard errors, and simulation experiments.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_fit = sub.add_parser("fit", help="fit LSE and PI, report coefficients and SEs")
    _add_common(p_fit, data=True, bootstrap=True)
    p_fit.add_argument("--moments", default=None,
                       help="JSON file with population moments (enables TI)")
    p_fit.set_defaults(handler=cmd_fit)

    p_se = sub.add_parser("se", help="report all covariance estimates")
    _add_common(p_se, data=True, bootstrap=True)
    p_se.set_defaults(handler=cmd_se)

    p_toy = sub.add_parser("toy", help="replicate the toy-model variance experiment")
    _add_common(p_toy, bootstrap=True)
    p_toy.add_argument("--alpha", type=float, required=True,
                       help="curvature of the quadratic toy model")
    p_toy.add_argument("--beta", type=float, default=1.0, help="linear coefficient")
    p_toy.add_argument("--n", type=int, default=250, help="labeled rows per replicate")
    p_toy.add_argument("--m", type=int, default=1500, help="unlabeled rows per replicate")
    p_toy.add_argument("--reps", type=int, default=100, help="simulation replicates")
    p_toy.set_defaults(handler=cmd_toy)

    p_sim = sub.add_parser("simulate", help="run a scenario sweep from a grid file")
    _add_common(p_sim)
    p_sim.add_argument("--grid", required=True, help="JSON grid file")
    p_sim.add_argument("--methods", default="pi,ti",
                       help="comma-separated subset of pi,ti (default: pi,ti)")
    p_sim.add_argument("--max-reps", dest="max_reps", type=int, default=2000,
                       help="replicate cap per cell (default: 2000)")
    p_sim.add_argument("--target-se", dest="target_se", type=float, default=0.02,
                       help="stop a cell when the ratio SE drops below this")
    p_sim.set_defaults(handler=cmd_simulate)
    return parser


def main(argv=None):
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        args.handler(args)
        return 0
    except ConfigError as exc:
        sys.stderr.write(f"sslreg: configuration error: {exc}\n")
        return 1
    except DataError as exc:
        sys.stderr.write(f"sslreg: data error: {exc}\n")
        return 2
    except SslregError as exc:
        sys.stderr.write(f"sslreg: error: {exc}\n")
        return 3


if __name__ == "__main__":
    sys.exit(main())
