"""Slope estimation from labeled data plus extra predictor information.

The idea: for each coordinate j, multiply the regression model through
by the adjusted regressor X_{j·} scaled by its mean square. That turns
the j-th slope into the *intercept* of an auxiliary regression of

    W_j = Y X_{j·} / E(X_{j·}²)

on the p + 1 centered covariates

    U_1 = X_{j·} / E(X_{j·}²),
    U_{k+1} = X_k X_{j·} / E(X_{j·}²)        (k ≠ j),
    U_{j+1} = X_j X_{j·} / E(X_{j·}²) - 1.

Every expectation in this construction refers to the distribution of X
only. Supplying exact population moments gives the total-information
estimator (tag TI); replacing each expectation by its pooled empirical
analogue over all n + m rows gives the partial-information estimator
(tag PI). The auxiliary regression itself always runs on the n labeled
rows, and the slope estimate is its fitted intercept,

    beta_j = mean(W_j) - a_hat mean(U_1) - sum_k b_hat_k mean(U_{k+1}),

with means over the labeled sample. The overall intercept is
ybar - beta · xbar, again with labeled means.

Both estimators share one pipeline; only the moment source differs.
"""

from dataclasses import dataclass

import numpy as np

from .dataset import MomentSpec
from .errors import (
    ContractError,
    DegenerateRegressorError,
    EstimationError,
    NumericalError,
    RankDeficiencyError,
    UnderDeterminedError,
)
from .linreg import adjust_regressor, fit_least_squares

__all__ = [
    "EMPIRICAL_POOLED",
    "InterceptModelData",
    "CoordinateModel",
    "SslFit",
    "build_intercept_model",
    "fit_ti",
    "fit_pi",
]

EMPIRICAL_POOLED = "empirical-pooled"


@dataclass(frozen=True)
class InterceptModelData:
    """Auxiliary regression data for one coordinate.

    `w` has length n, `u` is n by (p + 1) with columns U_1 ... U_{p+1}.
    Under the pooled moment source every U column has full-sample mean
    zero by construction; the labeled-sample means generally do not
    vanish, and the slope estimate lives exactly in that gap.
    """

    w: np.ndarray
    u: np.ndarray
    coordinate: int


@dataclass(frozen=True)
class CoordinateModel:
    """Fitted auxiliary regression for one coordinate."""

    a_hat: float
    b_hat: np.ndarray
    intercept_model_residuals: np.ndarray


@dataclass(frozen=True)
class SslFit:
    """A fitted TI or PI estimator."""

    beta: np.ndarray
    intercept: float
    per_coordinate: tuple
    estimator_tag: str
    nu_hat: float

    def __post_init__(self):
        if self.estimator_tag not in ("TI", "PI"):
            raise ContractError("estimator_tag must be 'TI' or 'PI'")
        beta = np.array(self.beta, dtype=float, copy=True).reshape(-1)
        beta.setflags(write=False)
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "intercept", float(self.intercept))
        object.__setattr__(self, "per_coordinate", tuple(self.per_coordinate))
        object.__setattr__(self, "nu_hat", float(self.nu_hat))

    @property
    def p(self):
        return self.beta.size

    def predict(self, x):
        x = np.asarray(x, dtype=float)
        if x.ndim == 1:
            x = x.reshape(-1, 1)
        return self.intercept + x @ self.beta

    def coefficient_vector(self):
        """Intercept followed by the slopes, as one array."""
        return np.concatenate([[self.intercept], self.beta])


def _population_adjustment(moments, j):
    """Partialling coefficients and mean square from population moments.

    Solves E(vecX_{-j} vecX_{-j}ᵀ) c = E(vecX_{-j} X_j) where vecX_{-j}
    is (1, X_k for k ≠ j), assembled from the supplied mean and second
    moment. Returns (c, E X_{j·}²).
    """
    mu = moments.mean
    s = moments.second_moment
    others = [k for k in range(mu.size) if k != j]
    gram = np.empty((len(others) + 1, len(others) + 1))
    gram[0, 0] = 1.0
    gram[0, 1:] = mu[others]
    gram[1:, 0] = mu[others]
    gram[1:, 1:] = s[np.ix_(others, others)]
    rhs = np.concatenate([[mu[j]], s[others, j]])
    try:
        coef = np.linalg.solve(gram, rhs)
    except np.linalg.LinAlgError:
        raise RankDeficiencyError(
            f"population moment matrix for coordinate {j} is singular"
        ) from None
    # E X_{j.}^2 = E X_j^2 - c' E(vecX_{-j} X_j), using the normal equations
    mean_square = float(s[j, j] - coef @ rhs)
    if not mean_square > 1e-20 * max(float(s[j, j]), np.finfo(float).tiny):
        raise DegenerateRegressorError(
            f"population adjusted regressor for coordinate {j} has zero mean square"
        )
    return coef, mean_square


def build_intercept_model(d, j, moments):
    """W and U columns for coordinate j on the labeled rows.

    `moments` is either a MomentSpec (population moments; the TI path)
    or the string "empirical-pooled" (moments from all n + m rows; the
    PI path).
    """
    p = d.p
    if not 0 <= j < p:
        raise ContractError(f"coordinate {j} out of range for p={p}")
    xl = d.labeled_x
    if isinstance(moments, MomentSpec):
        if moments.p != p:
            raise ContractError(
                f"moments cover {moments.p} predictors, dataset has {p}"
            )
        coef, mean_square = _population_adjustment(moments, j)
        others = [k for k in range(p) if k != j]
        adjusted = xl[:, j] - coef[0] - xl[:, others] @ coef[1:]
    elif moments == EMPIRICAL_POOLED:
        adj = adjust_regressor(d.full_x, j, restrict_to=slice(0, d.n))
        adjusted = adj.values
        mean_square = adj.mean_square
    else:
        raise ContractError(
            "moments must be a MomentSpec or the string 'empirical-pooled', "
            f"got {moments!r}"
        )
    scaled = adjusted / mean_square
    w = d.labeled_y * scaled
    u = np.empty((d.n, p + 1))
    u[:, 0] = scaled
    u[:, 1:] = xl * scaled[:, None]
    u[:, j + 1] -= 1.0
    return InterceptModelData(w=w, u=u, coordinate=j)


def _fit_with_moments(d, moments, tag):
    n, p = d.n, d.p
    if n < p + 3:
        raise UnderDeterminedError(
            f"need at least p + 3 = {p + 3} labeled rows for the "
            f"auxiliary regressions, have {n}"
        )
    beta = np.empty(p)
    records = []
    for j in range(p):
        try:
            model = build_intercept_model(d, j, moments)
            fit = fit_least_squares(model.u, model.w, with_intercept=True)
        except NumericalError as exc:
            raise EstimationError(
                f"coordinate {j} ('{d.column_names[j]}'): {exc}"
            ) from exc
        beta[j] = model.w.mean() - fit.slopes @ model.u.mean(axis=0)
        records.append(
            CoordinateModel(
                a_hat=float(fit.slopes[0]),
                b_hat=fit.slopes[1:].copy(),
                intercept_model_residuals=fit.residuals,
            )
        )
    intercept = float(d.labeled_y.mean() - beta @ d.labeled_x.mean(axis=0))
    return SslFit(
        beta=beta,
        intercept=intercept,
        per_coordinate=tuple(records),
        estimator_tag=tag,
        nu_hat=n / (n + d.m),
    )


def fit_ti(d, moments):
    """Total-information fit: population predictor moments are known."""
    if not isinstance(moments, MomentSpec):
        raise ContractError("fit_ti requires a MomentSpec")
    return _fit_with_moments(d, moments, "TI")


def fit_pi(d):
    """Partial-information fit: moments pooled over all n + m rows.

    With m = 0 this reproduces the least-squares slopes exactly, because
    every U column then has zero labeled-sample mean and the fitted
    intercept of each auxiliary regression collapses to mean(W).
    """
    return _fit_with_moments(d, EMPIRICAL_POOLED, "PI")
