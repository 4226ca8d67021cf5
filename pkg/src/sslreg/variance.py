"""Covariance estimators for the partial-information slope vector.

Three routes to the n-scaled asymptotic covariance:

* parametric: combine the per-coordinate auxiliary-regression residuals
  with the robust sandwich for the least-squares fit;
* pairs bootstrap: resample labeled pairs (and unlabeled rows) with
  replacement, refit, take n times the covariance across replicates;
* variance bootstrap: bootstrap the *difference* between the PI and LSE
  coefficients on shared resamples. Its covariance, delta, estimates
  how much variance the unlabeled rows remove, and is subtracted from
  the bootstrapped LSE covariance. Because delta is itself an empirical
  covariance it is positive semidefinite, so this estimator can never
  claim that using unlabeled data made things worse.

Replicate r always draws from the substream keyed (seed, r): first the
n labeled indices, then (only when unlabeled rows exist and the scheme
asks for them) the m unlabeled indices. Drawing the labeled indices
first means replicate r resamples the same labeled pairs no matter
which estimators are being computed, which is what makes the identity
"bootstrap LSE minus variance bootstrap equals delta" hold exactly for
a shared seed. A replicate whose resample is numerically singular is
redrawn from the same substream, at most 100 times.

Everything here is deterministic given (data, plan); replicates are
computed sequentially, and the keyed substreams mean a parallel
execution would produce bit-identical results in any order.
"""

import enum
from dataclasses import dataclass

import numpy as np

from .dataset import SemiDataset
from .errors import ContractError, NumericalError
from .estimators import fit_pi
from .linreg import CovMatrix, CovMethod, fit_least_squares
from .rng import substream

__all__ = [
    "ResampleScheme",
    "BootstrapPlan",
    "joint_bootstrap_replicates",
    "bootstrap_lse",
    "bootstrap_pi",
    "variance_bootstrap_pi",
    "av_parametric_pi",
]

_MAX_REDRAWS = 100


class ResampleScheme(enum.Enum):
    PAIRS_LABELED_ONLY = "pairs-labeled-only"
    PAIRS_LABELED_PLUS_UNLABELED = "pairs-labeled-plus-unlabeled"


@dataclass(frozen=True)
class BootstrapPlan:
    """How to resample: replicate count, base seed, and which blocks."""

    replicate_count: int = 1000
    seed: int = 0
    scheme: ResampleScheme = ResampleScheme.PAIRS_LABELED_PLUS_UNLABELED

    def __post_init__(self):
        if int(self.replicate_count) < 2:
            raise ContractError("replicate_count must be at least 2")
        if int(self.seed) < 0:
            raise ContractError("seed must be non-negative")
        if not isinstance(self.scheme, ResampleScheme):
            raise ContractError(f"scheme must be a ResampleScheme, got {self.scheme!r}")
        object.__setattr__(self, "replicate_count", int(self.replicate_count))
        object.__setattr__(self, "seed", int(self.seed))


def _replicate_coefs(d, plan, want_lse, want_pi):
    """Coefficient vectors (intercept first) across bootstrap replicates."""
    n, m = d.n, d.m
    xl, yl, xu = d.labeled_x, d.labeled_y, d.unlabeled_x
    draw_unlabeled = want_pi and m > 0
    reps = plan.replicate_count
    lse = np.empty((reps, d.p + 1)) if want_lse else None
    pi = np.empty((reps, d.p + 1)) if want_pi else None
    for r in range(reps):
        gen = substream(plan.seed, r)
        for _ in range(_MAX_REDRAWS):
            il = gen.integers(0, n, n)
            iu = gen.integers(0, m, m) if draw_unlabeled else None
            try:
                if want_lse:
                    f = fit_least_squares(xl[il], yl[il])
                    lse_row = np.concatenate([[f.intercept], f.slopes])
                if want_pi:
                    resampled = SemiDataset(
                        labeled_x=xl[il],
                        labeled_y=yl[il],
                        unlabeled_x=xu[iu] if iu is not None else None,
                        column_names=d.column_names,
                    )
                    pi_row = fit_pi(resampled).coefficient_vector()
            except NumericalError:
                continue
            break
        else:
            raise NumericalError(
                f"bootstrap replicate {r}: resample still singular "
                f"after {_MAX_REDRAWS} redraws"
            )
        if want_lse:
            lse[r] = lse_row
        if want_pi:
            pi[r] = pi_row
    return lse, pi


def _scaled_cov(rows, n):
    """n times the empirical covariance (ddof 1) of replicate rows."""
    centered = rows - rows.mean(axis=0)
    return (centered.T @ centered) * (n / (rows.shape[0] - 1))


def _require_scheme(plan, scheme, op):
    if plan.scheme is not scheme:
        raise ContractError(f"{op} requires scheme {scheme.value}, got {plan.scheme.value}")


def joint_bootstrap_replicates(d, plan):
    """LSE and PI coefficient vectors on shared resamples.

    Returns two (replicate_count, p + 1) arrays, intercept in column 0.
    Within each replicate both estimators see the same labeled resample;
    the unlabeled resample enters the PI fit only.
    """
    _require_scheme(plan, ResampleScheme.PAIRS_LABELED_PLUS_UNLABELED,
                    "joint_bootstrap_replicates")
    return _replicate_coefs(d, plan, want_lse=True, want_pi=True)


def bootstrap_lse(d, plan):
    """Pairs bootstrap covariance of the least-squares coefficients."""
    _require_scheme(plan, ResampleScheme.PAIRS_LABELED_ONLY, "bootstrap_lse")
    lse, _ = _replicate_coefs(d, plan, want_lse=True, want_pi=False)
    full = _scaled_cov(lse, d.n)
    return CovMatrix(
        values=full[1:, 1:],
        method=CovMethod.BOOTSTRAP_LSE,
        replicates=plan.replicate_count,
        full_values=full,
    )


def bootstrap_pi(d, plan):
    """Pairs bootstrap covariance of the PI coefficients.

    Resamples n labeled pairs from the labeled block and m rows from the
    unlabeled block per replicate. With m = 0 the replicate fits collapse
    to least squares, so the output matches bootstrap_lse under the same
    seed, replicate for replicate.
    """
    _require_scheme(plan, ResampleScheme.PAIRS_LABELED_PLUS_UNLABELED, "bootstrap_pi")
    _, pi = _replicate_coefs(d, plan, want_lse=False, want_pi=True)
    full = _scaled_cov(pi, d.n)
    return CovMatrix(
        values=full[1:, 1:],
        method=CovMethod.BOOTSTRAP_PI,
        replicates=plan.replicate_count,
        full_values=full,
    )


def variance_bootstrap_pi(d, plan):
    """Variance-bootstrap covariance: bootstrapped LSE minus delta.

    Returns (cov, delta) where delta is n times the covariance of the
    per-replicate difference between the PI and LSE slope vectors, and
    cov.values is the bootstrapped LSE slope covariance minus delta.
    """
    _require_scheme(plan, ResampleScheme.PAIRS_LABELED_PLUS_UNLABELED,
                    "variance_bootstrap_pi")
    lse, pi = _replicate_coefs(d, plan, want_lse=True, want_pi=True)
    av_lse = _scaled_cov(lse, d.n)[1:, 1:]
    delta = _scaled_cov(pi[:, 1:] - lse[:, 1:], d.n)
    cov = CovMatrix(
        values=av_lse - delta,
        method=CovMethod.VARIANCE_BOOTSTRAP_PI,
        replicates=plan.replicate_count,
    )
    return cov, delta


def av_parametric_pi(d, pi_fit, lse_sandwich):
    """Parametric covariance for the PI slopes.

    Blends the second moments of the auxiliary-regression residuals
    (call the matrix C) with the LSE sandwich S using nu = n / (n + m):
    off the diagonal the entry is C + nu (S - C); on the diagonal the
    excess S - C is clamped at zero before blending, so the estimate
    never exceeds the larger of the two ingredients.
    """
    if pi_fit.estimator_tag != "PI":
        raise ContractError("av_parametric_pi needs a PI fit")
    if lse_sandwich.method is not CovMethod.PARAMETRIC_LSE:
        raise ContractError("lse_sandwich must come from sandwich_cov_lse")
    p = d.p
    if pi_fit.p != p or lse_sandwich.p != p:
        raise ContractError("dimension mismatch between dataset, fit and sandwich")
    resid = np.column_stack(
        [rec.intercept_model_residuals for rec in pi_fit.per_coordinate]
    )
    if resid.shape[0] != d.n:
        raise ContractError("fit residuals do not match the dataset's labeled rows")
    nu = d.n / (d.n + d.m)
    if abs(pi_fit.nu_hat - nu) > 1e-12:
        raise ContractError("pi_fit was computed on a different labeled/unlabeled split")
    c = (resid.T @ resid) / d.n
    s = lse_sandwich.values
    out = c + nu * (s - c)
    diag = c.diagonal() + nu * np.maximum(s.diagonal() - c.diagonal(), 0.0)
    np.fill_diagonal(out, diag)
    return CovMatrix(values=out, method=CovMethod.PARAMETRIC_PI, replicates=0)
