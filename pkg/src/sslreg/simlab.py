"""Monte Carlo laboratory: toy model, scenario grid, excess-risk ratios.

Two generators live here. The toy model

    Y = alpha X^2 + beta X + eps,   X, eps iid standard normal,

has closed-form n-scaled asymptotic slope variances (10 alpha^2 + 1 for
least squares, 6 alpha^2 + 1 with exactly known predictor moments, and
a gap of 4 alpha^2), which makes it the benchmark for every variance
estimator in this package. The scenario generator spans a grid of
sample sizes, predictor laws, error laws and conditional-mean shapes,
and is scored by the excess risk ratio

    ERR = (MSE_method - MSE_BLF) / (MSE_LSE - MSE_BLF)

on a large fixed test set, where BLF is the test set's own least
squares fit. Values below 1 mean the unlabeled rows bought something.

All randomness is keyed: a scenario's seed plus a fixed purpose key
plus the replicate index selects a substream, so every number produced
here is reproducible and independent of evaluation order. Replicates of
the TI method are realized by running the PI fit with m = 500 n freshly
drawn unlabeled rows; the toy helpers use exactly known moments instead.
"""

import itertools
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .dataset import MomentSpec, SemiDataset
from .errors import ConfigError, ContractError, SslregError
from .estimators import fit_pi, fit_ti
from .linreg import fit_least_squares, sandwich_cov_lse
from .rng import substream
from .variance import (
    BootstrapPlan,
    ResampleScheme,
    av_parametric_pi,
    joint_bootstrap_replicates,
)

__all__ = [
    "X_LAWS",
    "ERROR_LAWS",
    "MEAN_SHAPES",
    "ScenarioSpec",
    "ToySpec",
    "ErrEstimate",
    "ToyVarianceResult",
    "toy_asymptotics",
    "generate_toy",
    "generate_scenario",
    "estimate_err",
    "toy_err_ti",
    "toy_variance_experiment",
    "scenario_sweep",
    "sweep_rows_to_csv",
    "grid_from_json",
    "full_grid",
]

X_LAWS = ("gaussian", "lognormal", "exponential", "cubed-gaussian")
ERROR_LAWS = ("gaussian", "heteroskedastic-exp")
MEAN_SHAPES = ("linear", "exp", "cube", "sqrt")
_REAL_LINE_LAWS = ("gaussian", "cubed-gaussian")
_M_RULES = ("equal-n", "twice-n")

# substream purpose keys (second element after the seed)
_KEY_TRAIN_ONCE = 0
_KEY_TEST_ONCE = 1
_KEY_SWEEP_TEST = 2
_KEY_SWEEP_TRAIN = 3
_KEY_TOY_REP = 4
_KEY_TOY_BS_SEED = 5


@dataclass(frozen=True)
class ScenarioSpec:
    """One cell of the simulation grid."""

    n: int
    m_rule: object = "twice-n"
    p: int = 1
    x_law: str = "gaussian"
    error_law: str = "gaussian"
    mean_shape: str = "linear"
    test_size: int = 100000
    seed: int = 0

    def __post_init__(self):
        if self.x_law not in X_LAWS:
            raise ConfigError(f"unknown x_law {self.x_law!r}, expected one of {X_LAWS}")
        if self.error_law not in ERROR_LAWS:
            raise ConfigError(
                f"unknown error_law {self.error_law!r}, expected one of {ERROR_LAWS}"
            )
        if self.mean_shape not in MEAN_SHAPES:
            raise ConfigError(
                f"unknown mean_shape {self.mean_shape!r}, expected one of {MEAN_SHAPES}"
            )
        if isinstance(self.m_rule, str):
            if self.m_rule not in _M_RULES:
                raise ConfigError(
                    f"m_rule must be one of {_M_RULES} or an explicit integer, "
                    f"got {self.m_rule!r}"
                )
        else:
            try:
                fixed = int(self.m_rule)
            except (TypeError, ValueError):
                raise ConfigError(f"m_rule {self.m_rule!r} is not understood") from None
            if fixed < 0:
                raise ConfigError("a fixed m must be non-negative")
            object.__setattr__(self, "m_rule", fixed)
        if int(self.p) < 1:
            raise ConfigError("p must be at least 1")
        if int(self.n) < int(self.p) + 3:
            raise ConfigError(
                f"n must be at least p + 3 = {int(self.p) + 3}, got {self.n}"
            )
        if int(self.test_size) < int(self.p) + 2:
            raise ConfigError("test_size is too small to fit the baseline")
        if int(self.seed) < 0:
            raise ConfigError("seed must be non-negative")
        for name in ("n", "p", "test_size", "seed"):
            object.__setattr__(self, name, int(getattr(self, name)))

    @property
    def resolved_m(self):
        if self.m_rule == "equal-n":
            return self.n
        if self.m_rule == "twice-n":
            return 2 * self.n
        return int(self.m_rule)

    @property
    def sqrt_uses_abs(self):
        """True when the sqrt mean shape is applied to a real-line law.

        The square root of a negative predictor value is taken as the
        root of its absolute value; this flag discloses that convention
        wherever it is active.
        """
        return self.mean_shape == "sqrt" and self.x_law in _REAL_LINE_LAWS

    def as_dict(self):
        rule = self.m_rule if isinstance(self.m_rule, str) else "fixed"
        return {
            "n": self.n,
            "m": self.resolved_m,
            "m_rule": rule,
            "p": self.p,
            "x_law": self.x_law,
            "error_law": self.error_law,
            "mean_shape": self.mean_shape,
            "test_size": self.test_size,
            "seed": self.seed,
            "sqrt_uses_abs": self.sqrt_uses_abs,
        }


@dataclass(frozen=True)
class ToySpec:
    """Parameters of the quadratic toy model."""

    alpha: float
    beta: float
    n: int
    m: int

    def __post_init__(self):
        if int(self.n) < 4:
            raise ConfigError("toy model needs n >= 4")
        if int(self.m) < 0:
            raise ConfigError("m must be non-negative")
        object.__setattr__(self, "alpha", float(self.alpha))
        object.__setattr__(self, "beta", float(self.beta))
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "m", int(self.m))


def toy_asymptotics(alpha):
    """Closed-form n-scaled slope variances of the toy model.

    Returns (least squares, known moments, their difference); the
    partial-information value is the second entry plus nu times the
    third for the nu of interest.
    """
    a2 = float(alpha) ** 2
    return 10.0 * a2 + 1.0, 6.0 * a2 + 1.0, 4.0 * a2


def _toy_draw(spec, gen):
    x = gen.standard_normal(spec.n + spec.m)
    eps = gen.standard_normal(spec.n)
    xl = x[: spec.n]
    y = spec.alpha * xl * xl + spec.beta * xl + eps
    return SemiDataset(
        labeled_x=xl.reshape(-1, 1),
        labeled_y=y,
        unlabeled_x=x[spec.n :].reshape(-1, 1) if spec.m else None,
        column_names=("x",),
    )


def generate_toy(spec, seed):
    """One toy dataset: n labeled rows, m unlabeled rows."""
    return _toy_draw(spec, substream(seed))


def _draw_x(gen, rows, p, law):
    if law == "gaussian":
        return gen.standard_normal((rows, p))
    if law == "lognormal":
        return np.exp(gen.standard_normal((rows, p)))
    if law == "exponential":
        return gen.exponential(1.0, (rows, p))
    if law == "cubed-gaussian":
        z = gen.standard_normal((rows, p))
        return z * z * z
    raise ConfigError(f"unknown x_law {law!r}")


def _shape_values(x, shape):
    if shape == "linear":
        return x
    if shape == "exp":
        return np.exp(x)
    if shape == "cube":
        return x * x * x
    if shape == "sqrt":
        return np.sqrt(np.abs(x))
    raise ConfigError(f"unknown mean_shape {shape!r}")


def _draw_response(gen, x, spec):
    mean = _shape_values(x, spec.mean_shape).sum(axis=1)
    noise = gen.standard_normal(x.shape[0])
    if spec.error_law == "heteroskedastic-exp":
        noise = noise * np.exp(np.linalg.norm(x, axis=1))
    return mean + noise


def _draw_training(spec, gen, m_override=None):
    m = spec.resolved_m if m_override is None else m_override
    x = _draw_x(gen, spec.n + m, spec.p, spec.x_law)
    y = _draw_response(gen, x[: spec.n], spec)
    return SemiDataset(
        labeled_x=x[: spec.n],
        labeled_y=y,
        unlabeled_x=x[spec.n :] if m else None,
    )


def _draw_test(spec, gen):
    x = _draw_x(gen, spec.test_size, spec.p, spec.x_law)
    y = _draw_response(gen, x, spec)
    return x, y


def generate_scenario(spec, seed):
    """One training dataset plus an independent test pair (x, y)."""
    train = _draw_training(spec, substream(seed, _KEY_TRAIN_ONCE))
    test = _draw_test(spec, substream(seed, _KEY_TEST_ONCE))
    return train, test


@dataclass(frozen=True)
class ErrEstimate:
    """An excess-risk-ratio estimate with its provenance."""

    err: float
    se: float
    reps_used: int
    method: str
    unstable: bool = False
    mse_method: float = float("nan")
    mse_lse: float = float("nan")
    mse_blf: float = float("nan")
    mse_kurtosis: float = float("nan")


def _ratio_estimate(mse_m, mse_l, mse_blf, method):
    mse_m = np.asarray(mse_m)
    mse_l = np.asarray(mse_l)
    reps = mse_m.size
    a = float(mse_m.mean())
    b = float(mse_l.mean())
    num = a - mse_blf
    denom = b - mse_blf
    unstable = not denom > 1e-12 * (1.0 + abs(mse_blf))
    if unstable:
        err = float("nan")
        se = float("nan")
    else:
        err = num / denom
        grad = np.array([1.0 / denom, -num / (denom * denom)])
        pair_cov = np.cov(np.vstack([mse_m, mse_l]), ddof=1) / reps
        se = float(np.sqrt(max(grad @ pair_cov @ grad, 0.0)))
    return ErrEstimate(
        err=err,
        se=se,
        reps_used=reps,
        method=method,
        unstable=unstable,
        mse_method=a,
        mse_lse=b,
        mse_blf=mse_blf,
        mse_kurtosis=float(stats.kurtosis(mse_m, fisher=True, bias=True)),
    )


def estimate_err(spec, method, max_reps=2000, target_se=0.02):
    """Excess risk ratio for one grid cell.

    Draws training datasets until the delta-method standard error of the
    ratio falls below `target_se` or `max_reps` is reached. The test set
    is drawn once; its own least-squares fit provides the baseline MSE,
    treated as a constant when the standard error is formed. `method`
    is "PI" (unlabeled rows per the spec's m rule) or "TI" (the same
    fit with 500 n freshly drawn unlabeled rows per replicate).

    A denominator too close to zero is reported through the `unstable`
    flag instead of raising.
    """
    method = str(method).upper()
    if method not in ("PI", "TI"):
        raise ConfigError(f"method must be 'PI' or 'TI', got {method!r}")
    if max_reps < 2:
        raise ConfigError("max_reps must be at least 2")
    if not target_se > 0:
        raise ConfigError("target_se must be positive")
    x_test, y_test = _draw_test(spec, substream(spec.seed, _KEY_SWEEP_TEST))
    blf = fit_least_squares(x_test, y_test)
    mse_blf = float(np.mean(blf.residuals**2))
    m_override = 500 * spec.n if method == "TI" else None

    mse_m, mse_l = [], []
    check_every = 50
    for r in range(max_reps):
        d = _draw_training(spec, substream(spec.seed, _KEY_SWEEP_TRAIN, r), m_override)
        lse = fit_least_squares(d.labeled_x, d.labeled_y)
        est = fit_pi(d)
        mse_l.append(float(np.mean((y_test - lse.predict(x_test)) ** 2)))
        mse_m.append(float(np.mean((y_test - est.predict(x_test)) ** 2)))
        done = r + 1
        if done >= 2 and (done % check_every == 0 or done == max_reps):
            result = _ratio_estimate(mse_m, mse_l, mse_blf, method)
            if result.unstable or result.se <= target_se:
                return result
    return _ratio_estimate(mse_m, mse_l, mse_blf, method)


def toy_err_ti(alpha, beta, n, reps=2000, test_size=100000, seed=0):
    """Excess risk ratio of the known-moments fit on the toy model.

    Uses fit_ti with the exact standard-normal moments (mean 0, second
    moment 1), so no unlabeled rows are involved. The ratio converges to
    (2 alpha^2 + 1 + sigma2_ti) / (2 alpha^2 + 1 + sigma2_lse).
    """
    if reps < 2:
        raise ConfigError("reps must be at least 2")
    moments = MomentSpec(mean=[0.0], second_moment=[[1.0]])
    test = _toy_draw(ToySpec(alpha, beta, test_size, 0), substream(seed, _KEY_TEST_ONCE))
    x_test, y_test = test.labeled_x, test.labeled_y
    blf = fit_least_squares(x_test, y_test)
    mse_blf = float(np.mean(blf.residuals**2))
    spec = ToySpec(alpha, beta, n, 0)
    mse_m, mse_l = [], []
    for r in range(reps):
        d = _toy_draw(spec, substream(seed, _KEY_TOY_REP, r))
        lse = fit_least_squares(d.labeled_x, d.labeled_y)
        ti = fit_ti(d, moments)
        mse_l.append(float(np.mean((y_test - lse.predict(x_test)) ** 2)))
        mse_m.append(float(np.mean((y_test - ti.predict(x_test)) ** 2)))
    return _ratio_estimate(mse_m, mse_l, mse_blf, "TI")


@dataclass(frozen=True)
class ToyVarianceResult:
    """Per-replicate variance and difference estimates on the toy model.

    `variance_samples` and `difference_samples` map estimator names
    ("parametric", "bootstrap", "variance-bootstrap") to arrays of
    per-replicate scalars. For the difference, the variance-bootstrap
    entry is delta itself, which is nonnegative by construction.
    """

    spec: ToySpec
    reps: int
    n_bs: int
    seed: int
    variance_samples: dict
    difference_samples: dict
    analytic: dict

    def summary(self):
        out = {
            "alpha": self.spec.alpha,
            "beta": self.spec.beta,
            "n": self.spec.n,
            "m": self.spec.m,
            "reps": self.reps,
            "n_bs": self.n_bs,
            "seed": self.seed,
            "analytic": dict(self.analytic),
            "variance": {},
            "difference": {},
        }
        for name, arr in self.variance_samples.items():
            out["variance"][name] = {
                "mean": float(arr.mean()),
                "sd": float(arr.std(ddof=1)),
            }
        for name, arr in self.difference_samples.items():
            out["difference"][name] = {
                "mean": float(arr.mean()),
                "sd": float(arr.std(ddof=1)),
                "frac_negative": float(np.mean(arr < 0.0)),
            }
        return out


def toy_variance_experiment(spec, reps, n_bs=1000, seed=0):
    """The three variance estimators across replicated toy datasets.

    Per replicate: draw a dataset, compute the parametric estimate, run
    one joint bootstrap pass (shared resamples), and record for each
    estimator both the variance estimate for the PI slope and the
    implied estimate of the variance reduction relative to least
    squares. The bootstrap seed of each replicate is drawn from its own
    substream, so the whole experiment is reproducible from `seed`.
    """
    if reps < 2:
        raise ContractError("reps must be at least 2")
    variance = {k: np.empty(reps) for k in ("parametric", "bootstrap", "variance-bootstrap")}
    difference = {k: np.empty(reps) for k in ("parametric", "bootstrap", "variance-bootstrap")}
    n = spec.n
    for r in range(reps):
        d = _toy_draw(spec, substream(seed, _KEY_TOY_REP, r))
        lse = fit_least_squares(d.labeled_x, d.labeled_y)
        sand = sandwich_cov_lse(d.labeled_x, lse.residuals)
        pif = fit_pi(d)
        parm = av_parametric_pi(d, pif, sand).values[0, 0]
        variance["parametric"][r] = parm
        difference["parametric"][r] = sand.values[0, 0] - parm

        bs_seed = int(substream(seed, _KEY_TOY_BS_SEED, r).integers(0, 2**63))
        plan = BootstrapPlan(
            replicate_count=n_bs,
            seed=bs_seed,
            scheme=ResampleScheme.PAIRS_LABELED_PLUS_UNLABELED,
        )
        lse_reps, pi_reps = joint_bootstrap_replicates(d, plan)
        slopes_l = lse_reps[:, 1]
        slopes_p = pi_reps[:, 1]
        av_l = n * slopes_l.var(ddof=1)
        av_p = n * slopes_p.var(ddof=1)
        delta = n * (slopes_p - slopes_l).var(ddof=1)
        variance["bootstrap"][r] = av_p
        difference["bootstrap"][r] = av_l - av_p
        variance["variance-bootstrap"][r] = av_l - delta
        difference["variance-bootstrap"][r] = delta

    s_lse, s_ti, s_diff = toy_asymptotics(spec.alpha)
    nu = spec.n / (spec.n + spec.m)
    analytic = {
        "sigma2_lse": s_lse,
        "sigma2_ti": s_ti,
        "sigma2_diff": s_diff,
        "nu": nu,
        "sigma2_pi": s_ti + nu * s_diff,
        "variance_reduction": (1.0 - nu) * s_diff,
    }
    return ToyVarianceResult(
        spec=spec,
        reps=reps,
        n_bs=n_bs,
        seed=seed,
        variance_samples=variance,
        difference_samples=difference,
        analytic=analytic,
    )


def _run_cell(index, spec, methods, max_reps, target_se):
    row = {"cell": index}
    row.update(spec.as_dict())
    for method in methods:
        tag = method.lower()
        try:
            est = estimate_err(spec, method, max_reps=max_reps, target_se=target_se)
        except SslregError as exc:
            row[f"error_{tag}"] = str(exc)
            continue
        row[f"err_{tag}"] = est.err
        row[f"se_{tag}"] = est.se
        row[f"reps_{tag}"] = est.reps_used
        row[f"unstable_{tag}"] = est.unstable
        row[f"kurtosis_{tag}"] = est.mse_kurtosis
        row[f"mse_{tag}"] = est.mse_method
        row[f"mse_lse_{tag}"] = est.mse_lse
        row["mse_blf"] = est.mse_blf
    return row


def scenario_sweep(grid, methods=("PI", "TI"), max_reps=2000, target_se=0.02, threads=1):
    """Run estimate_err over a grid of scenarios.

    Returns (rows, summary). Each row is a flat dict for one cell; a
    failing cell records its error message instead of aborting the
    sweep. The summary counts, per method and per n, how many cells sit
    significantly (2 standard errors) below or above 1. Results do not
    depend on `threads` because every draw is keyed by the cell's seed.
    """
    grid = list(grid)
    if not grid:
        raise ConfigError("scenario grid is empty")
    methods = tuple(str(m).upper() for m in methods)
    for m in methods:
        if m not in ("PI", "TI"):
            raise ConfigError(f"unknown method {m!r}")
    if not methods:
        raise ConfigError("need at least one method")
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            futures = [
                pool.submit(_run_cell, i, spec, methods, max_reps, target_se)
                for i, spec in enumerate(grid)
            ]
            rows = [f.result() for f in futures]
    else:
        rows = [
            _run_cell(i, spec, methods, max_reps, target_se)
            for i, spec in enumerate(grid)
        ]
    return rows, summarize_sweep(rows, methods)


def summarize_sweep(rows, methods):
    """Counts and proportions of cells significantly away from ERR = 1."""
    summary = {"significance": "err plus/minus 2 se versus 1", "methods": {}}
    for method in methods:
        tag = method.lower()
        per_n = {}
        totals = {"cells": 0, "failed": 0, "unstable": 0,
                  "evaluated": 0, "below_1": 0, "above_1": 0}
        for row in rows:
            bucket = per_n.setdefault(
                row["n"],
                {"cells": 0, "failed": 0, "unstable": 0,
                 "evaluated": 0, "below_1": 0, "above_1": 0},
            )
            for acc in (totals, bucket):
                acc["cells"] += 1
            if f"error_{tag}" in row:
                for acc in (totals, bucket):
                    acc["failed"] += 1
                continue
            if row.get(f"unstable_{tag}"):
                for acc in (totals, bucket):
                    acc["unstable"] += 1
                continue
            err = row[f"err_{tag}"]
            se = row[f"se_{tag}"]
            below = err + 2.0 * se < 1.0
            above = err - 2.0 * se > 1.0
            for acc in (totals, bucket):
                acc["evaluated"] += 1
                acc["below_1"] += int(below)
                acc["above_1"] += int(above)
        for acc in [totals] + list(per_n.values()):
            evaluated = acc["evaluated"]
            acc["prop_below_1"] = acc["below_1"] / evaluated if evaluated else float("nan")
            acc["prop_above_1"] = acc["above_1"] / evaluated if evaluated else float("nan")
        summary["methods"][tag] = {
            "overall": totals,
            "by_n": {str(n): per_n[n] for n in sorted(per_n)},
        }
    return summary


_SWEEP_COLUMNS = (
    "cell", "n", "m", "m_rule", "p", "x_law", "error_law", "mean_shape",
    "test_size", "seed", "sqrt_uses_abs", "mse_blf",
)
_METHOD_COLUMNS = (
    "err", "se", "reps", "unstable", "kurtosis", "mse", "mse_lse", "error",
)


def sweep_rows_to_csv(rows, fh, methods=("PI", "TI")):
    """Write sweep rows as CSV with a stable column order."""
    import csv as _csv

    columns = list(_SWEEP_COLUMNS)
    for method in methods:
        tag = str(method).lower()
        columns.extend(f"{name}_{tag}" for name in _METHOD_COLUMNS)
    writer = _csv.DictWriter(fh, fieldnames=columns, extrasaction="ignore",
                             lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow(row)


def full_grid(seed=0, test_size=100000):
    """All 768 grid cells, seeds assigned consecutively from `seed`."""
    cells = []
    combos = itertools.product(
        (12, 25, 50, 100, 250, 500),
        _M_RULES,
        (1, 4),
        X_LAWS,
        ERROR_LAWS,
        MEAN_SHAPES,
    )
    for i, (n, m_rule, p, x_law, error_law, mean_shape) in enumerate(combos):
        cells.append(
            ScenarioSpec(
                n=n,
                m_rule=m_rule,
                p=p,
                x_law=x_law,
                error_law=error_law,
                mean_shape=mean_shape,
                test_size=test_size,
                seed=seed + i,
            )
        )
    return cells


_CELL_KEYS = {
    "n", "m", "m_rule", "p", "x_law", "error_law", "mean_shape", "test_size", "seed",
}


def _cell_to_spec(cell, index, defaults):
    if not isinstance(cell, dict):
        raise ConfigError(f"grid cell {index} must be an object, got {type(cell).__name__}")
    unknown = set(cell) - _CELL_KEYS
    if unknown:
        raise ConfigError(
            f"grid cell {index} has unknown keys: {', '.join(sorted(unknown))}"
        )
    merged = dict(defaults)
    merged.update(cell)
    if "m" in merged and "m_rule" in merged:
        raise ConfigError(f"grid cell {index} sets both 'm' and 'm_rule'")
    if "m" in merged:
        merged["m_rule"] = merged.pop("m")
    merged.setdefault("seed", defaults.get("base_seed", 0) + index)
    merged.pop("base_seed", None)
    try:
        return ScenarioSpec(**merged)
    except TypeError as exc:
        raise ConfigError(f"grid cell {index}: {exc}") from None
    except ConfigError as exc:
        raise ConfigError(f"grid cell {index}: {exc}") from None


def grid_from_json(text, default_seed=0):
    """Parse a grid file into scenario specs.

    Accepted layouts: a JSON list of cell objects; an object with a
    "cells" list; or an object with a "grid" mapping whose values are
    lists to be crossed (keys n, m or m_rule, p, x_law, error_law,
    mean_shape). Optional top-level "test_size" and "seed" apply to all
    cells; cells without an explicit seed get consecutive seeds.
    """
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"grid file is not valid JSON: {exc.msg}", line=exc.lineno) from None

    defaults = {}
    if isinstance(data, dict):
        if "test_size" in data:
            defaults["test_size"] = data["test_size"]
        defaults["base_seed"] = data.get("seed", default_seed)
    else:
        defaults["base_seed"] = default_seed

    if isinstance(data, list):
        cells = data
    elif isinstance(data, dict) and "cells" in data:
        cells = data["cells"]
        if not isinstance(cells, list):
            raise ConfigError("'cells' must be a list")
    elif isinstance(data, dict) and "grid" in data:
        axes = data["grid"]
        if not isinstance(axes, dict):
            raise ConfigError("'grid' must be an object of axis lists")
        unknown = set(axes) - {"n", "m", "m_rule", "p", "x_law", "error_law", "mean_shape"}
        if unknown:
            raise ConfigError(f"unknown grid axes: {', '.join(sorted(unknown))}")
        axis_names = [k for k in ("n", "m", "m_rule", "p", "x_law", "error_law", "mean_shape")
                      if k in axes]
        if not axis_names:
            raise ConfigError("'grid' needs at least one axis")
        axis_values = []
        for k in axis_names:
            vals = axes[k]
            if not isinstance(vals, list) or not vals:
                raise ConfigError(f"grid axis '{k}' must be a non-empty list")
            axis_values.append(vals)
        cells = [
            dict(zip(axis_names, combo)) for combo in itertools.product(*axis_values)
        ]
    else:
        raise ConfigError(
            "grid file must be a list of cells or an object with 'cells' or 'grid'"
        )
    if not cells:
        raise ConfigError("grid file contains no cells")
    return [_cell_to_spec(cell, i, defaults) for i, cell in enumerate(cells)]
