"""Least squares with intercept, partialling out, and the robust sandwich.

Everything here treats the linear model as a working approximation, not
as truth. The sandwich covariance is therefore the misspecification
robust one: bread from the design Gram matrix, meat from squared
residuals. All solves go through orthogonal decompositions (SVD inside
`lstsq`, QR for the sandwich); normal equations are never formed.

Rank policy: a singular value below 1e-10 times the largest one means
the design is treated as rank deficient and an error names a dependent
column, found by column-pivoted QR.
"""

import enum
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import ContractError, RankDeficiencyError, UnderDeterminedError
from .errors import DegenerateRegressorError

__all__ = [
    "CovMethod",
    "CovMatrix",
    "FitResult",
    "AdjustedRegressor",
    "fit_least_squares",
    "adjust_regressor",
    "sandwich_cov_lse",
    "dependent_column_index",
]

_RANK_RTOL = 1e-10


class CovMethod(enum.Enum):
    """Which estimator produced a covariance matrix."""

    PARAMETRIC_LSE = "parametric-lse"
    BOOTSTRAP_LSE = "bootstrap-lse"
    PARAMETRIC_PI = "parametric-pi"
    BOOTSTRAP_PI = "bootstrap-pi"
    VARIANCE_BOOTSTRAP_PI = "variance-bootstrap-pi"


@dataclass(frozen=True)
class CovMatrix:
    """n-scaled asymptotic covariance estimate for the slope vector.

    `values` is the p by p slope block. When the producing estimator also
    tracks the intercept (the sandwich and the pairs bootstraps do), the
    (p+1) by (p+1) matrix including the intercept row is kept in
    `full_values`. `replicates` is 0 for parametric estimators.

    Matrices are symmetrized on construction; positive semidefiniteness
    is a property of the estimators, not enforced here (the variance
    bootstrap subtracts one PSD matrix from another).
    """

    values: np.ndarray
    method: CovMethod
    replicates: int = 0
    full_values: np.ndarray = None

    def __post_init__(self):
        v = np.array(self.values, dtype=float, copy=True)
        if v.ndim == 0:
            v = v.reshape(1, 1)
        if v.ndim != 2 or v.shape[0] != v.shape[1]:
            raise ContractError(f"covariance must be square, got shape {v.shape}")
        if not np.isfinite(v).all():
            raise ContractError("covariance contains non-finite values")
        if not np.allclose(v, v.T, rtol=1e-7, atol=1e-10 * (1 + np.abs(v).max())):
            raise ContractError("covariance is not symmetric")
        v = 0.5 * (v + v.T)
        if not isinstance(self.method, CovMethod):
            raise ContractError(f"method must be a CovMethod, got {self.method!r}")
        if int(self.replicates) < 0:
            raise ContractError("replicates must be non-negative")
        fv = self.full_values
        if fv is not None:
            fv = np.array(fv, dtype=float, copy=True)
            if fv.shape != (v.shape[0] + 1, v.shape[0] + 1):
                raise ContractError(
                    f"full_values shape {fv.shape} does not extend values shape {v.shape}"
                )
            fv = 0.5 * (fv + fv.T)
            fv.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "replicates", int(self.replicates))
        object.__setattr__(self, "full_values", fv)

    @property
    def p(self):
        return self.values.shape[0]

    def standard_errors(self, n):
        """Slope standard errors at sample size n: sqrt(diag / n).

        Negative diagonal entries (possible for the variance bootstrap in
        pathological cases) come out as NaN rather than raising.
        """
        with np.errstate(invalid="ignore"):
            return np.sqrt(np.diag(self.values) / float(n))


_TAGS = ("LSE", "TI", "PI")


@dataclass(frozen=True)
class FitResult:
    """Coefficients and in-sample residuals of one linear fit."""

    intercept: float
    slopes: np.ndarray
    residuals: np.ndarray
    estimator_tag: str = "LSE"

    def __post_init__(self):
        if self.estimator_tag not in _TAGS:
            raise ContractError(f"estimator_tag must be one of {_TAGS}")
        slopes = np.array(self.slopes, dtype=float, copy=True).reshape(-1)
        resid = np.array(self.residuals, dtype=float, copy=True).reshape(-1)
        slopes.setflags(write=False)
        resid.setflags(write=False)
        object.__setattr__(self, "intercept", float(self.intercept))
        object.__setattr__(self, "slopes", slopes)
        object.__setattr__(self, "residuals", resid)

    def predict(self, x):
        x = np.asarray(x, dtype=float)
        if x.ndim == 1:
            x = x.reshape(-1, 1)
        return self.intercept + x @ self.slopes


@dataclass(frozen=True)
class AdjustedRegressor:
    """Column j after partialling out the constant and the other columns.

    `values` holds the adjusted values on the requested rows,
    `mean_square` the average squared adjusted value over all rows used
    for the partialling, and `coefficients` the partialling coefficients
    (constant first, then the other columns in their original order).
    """

    values: np.ndarray
    mean_square: float
    coefficients: np.ndarray


def dependent_column_index(a):
    """Index of a column linearly dependent on the others, via pivoted QR."""
    a = np.asarray(a, dtype=float)
    r, piv = scipy.linalg.qr(a, mode="r", pivoting=True)
    diag = np.abs(np.diag(r))
    if diag.size == 0 or diag[0] == 0.0:
        return int(piv[-1])
    rank = int(np.sum(diag > _RANK_RTOL * diag[0]))
    return int(piv[min(rank, piv.size - 1)])


def _design(x, with_intercept):
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x.reshape(-1, 1)
    if with_intercept:
        return np.column_stack([np.ones(x.shape[0]), x]), x
    return x, x


def fit_least_squares(x, y, with_intercept=True):
    """Ordinary least squares of y on x, intercept included by default.

    Raises UnderDeterminedError when there are fewer rows than
    coefficients, and RankDeficiencyError (naming a dependent column)
    when the design is numerically singular.
    """
    a, x = _design(x, with_intercept)
    y = np.asarray(y, dtype=float).reshape(-1)
    n, ncoef = a.shape
    if y.shape[0] != n:
        raise ContractError(f"x has {n} rows but y has {y.shape[0]}")
    if n < ncoef:
        raise UnderDeterminedError(
            f"{n} rows cannot determine {ncoef} coefficients"
        )
    coef, _, rank, _ = np.linalg.lstsq(a, y, rcond=_RANK_RTOL)
    if rank < ncoef:
        j = dependent_column_index(a)
        if with_intercept:
            which = "intercept column" if j == 0 else f"column {j - 1}"
        else:
            which = f"column {j}"
        raise RankDeficiencyError(
            f"design is rank deficient: {which} is linearly dependent on the others"
        )
    resid = y - a @ coef
    if with_intercept:
        return FitResult(intercept=coef[0], slopes=coef[1:], residuals=resid)
    return FitResult(intercept=0.0, slopes=coef, residuals=resid)


def adjust_regressor(x_full, j, restrict_to=None):
    """Partial column j out of the constant and the remaining columns.

    The partialling coefficients and the mean square are always computed
    over all rows of `x_full`; `restrict_to` (a slice or index array)
    only selects which rows' adjusted values are returned.
    """
    x = np.asarray(x_full, dtype=float)
    if x.ndim == 1:
        x = x.reshape(-1, 1)
    total, p = x.shape
    if not 0 <= j < p:
        raise ContractError(f"column index {j} out of range for {p} columns")
    xj = x[:, j]
    if p == 1:
        # partialling on the constant alone is mean subtraction
        coef = np.array([xj.mean()])
        adjusted = xj - coef[0]
    else:
        others = np.delete(x, j, axis=1)
        a = np.column_stack([np.ones(total), others])
        if total < a.shape[1]:
            raise UnderDeterminedError(
                f"{total} rows cannot support partialling on {a.shape[1]} coefficients"
            )
        coef, _, rank, _ = np.linalg.lstsq(a, xj, rcond=_RANK_RTOL)
        if rank < a.shape[1]:
            k = dependent_column_index(a)
            raise RankDeficiencyError(
                "partialling design for column "
                f"{j} is rank deficient (dependent design column {k})"
            )
        adjusted = xj - a @ coef
    mean_square = float(np.mean(adjusted * adjusted))
    scale = float(np.mean(xj * xj))
    if not mean_square > 1e-20 * max(scale, np.finfo(float).tiny):
        raise DegenerateRegressorError(
            f"adjusted regressor for column {j} has numerically zero mean square"
        )
    if restrict_to is not None:
        adjusted = adjusted[restrict_to]
    return AdjustedRegressor(
        values=adjusted, mean_square=mean_square, coefficients=coef
    )


def sandwich_cov_lse(x, residuals):
    """Misspecification robust covariance of the least squares fit.

    With design X (intercept column prepended) and residuals d, this is

        n (XᵀX)⁻¹ XᵀDX (XᵀX)⁻¹,   D = diag(dᵢ²),

    evaluated through a thin QR of X: with X = QR the whole expression
    collapses to n R⁻¹ (Qᵀ D Q) R⁻ᵀ, so the Gram matrix is never formed.
    Returns the slope block, with the full matrix including the
    intercept kept alongside.
    """
    a, x = _design(x, with_intercept=True)
    d = np.asarray(residuals, dtype=float).reshape(-1)
    n = a.shape[0]
    if d.shape[0] != n:
        raise ContractError(f"{n} design rows but {d.shape[0]} residuals")
    if n < a.shape[1]:
        raise UnderDeterminedError("fewer rows than coefficients")
    sv = np.linalg.svd(a, compute_uv=False)
    if sv[-1] <= _RANK_RTOL * sv[0]:
        k = dependent_column_index(a)
        raise RankDeficiencyError(
            f"design is rank deficient (dependent design column {k})"
        )
    q, r = np.linalg.qr(a)
    meat_q = (q * (d * d)[:, None]).T @ q
    half = scipy.linalg.solve_triangular(r, meat_q, lower=False)
    full = n * scipy.linalg.solve_triangular(r, half.T, lower=False).T
    full = 0.5 * (full + full.T)
    return CovMatrix(
        values=full[1:, 1:],
        method=CovMethod.PARAMETRIC_LSE,
        replicates=0,
        full_values=full,
    )
