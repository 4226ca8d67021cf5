"""Excess risk of a fitted linear predictor and the plug-in risk ratio.

For a slope estimator with n-scaled asymptotic covariance S, the excess
risk over the best linear predictor decomposes into an intercept-related
term plus Trace(M S), M being the predictor covariance. Comparing two
estimators on the same data therefore reduces to comparing traces, and
the ratio of estimated excess risks for PI versus LSE has a plug-in
form built entirely from observable quantities: the response variance,
the pooled predictor covariance, the labeled-sample covariances between
response and predictors, the bootstrapped LSE covariance, and the
variance-bootstrap delta.
"""

from dataclasses import dataclass

import numpy as np

from .dataset import empirical_moments
from .errors import ContractError, DegenerateRiskError
from .linreg import CovMatrix, CovMethod

__all__ = [
    "RiskReport",
    "asymptotic_risk",
    "prediction_error_difference",
    "err_hat_pi",
    "mean_prediction_error",
]


def _cov_values(sigma, p=None):
    values = sigma.values if isinstance(sigma, CovMatrix) else np.asarray(sigma, dtype=float)
    if values.ndim != 2 or values.shape[0] != values.shape[1]:
        raise ContractError(f"covariance must be square, got shape {values.shape}")
    if p is not None and values.shape[0] != p:
        raise ContractError(f"covariance is {values.shape[0]}x{values.shape[0]}, expected {p}x{p}")
    return values


@dataclass(frozen=True)
class RiskReport:
    """Excess-risk decomposition: total = first_term + trace_term."""

    first_term: float
    trace_term: float
    total: float
    err_hat: float = None

    def __post_init__(self):
        if abs(self.total - (self.first_term + self.trace_term)) > 1e-9 * (
            1.0 + abs(self.total)
        ):
            raise ContractError("total must equal first_term + trace_term")


def asymptotic_risk(first_term, m_cov, sigma):
    """Excess risk first_term + Trace(M Sigma).

    `sigma` may be a CovMatrix or a plain square array; `m_cov` is the
    predictor covariance M.
    """
    m_cov = np.asarray(m_cov, dtype=float)
    values = _cov_values(sigma)
    if m_cov.shape != values.shape:
        raise ContractError(
            f"M has shape {m_cov.shape}, covariance has shape {values.shape}"
        )
    trace_term = float(np.trace(m_cov @ values))
    first_term = float(first_term)
    return RiskReport(
        first_term=first_term,
        trace_term=trace_term,
        total=first_term + trace_term,
    )


def prediction_error_difference(m_cov, sigma1, sigma2, n):
    """Trace(M (Sigma1 - Sigma2)) / n.

    The per-observation difference in prediction error between two
    estimators whose n-scaled covariances are sigma1 and sigma2.
    """
    if n < 1:
        raise ContractError("n must be at least 1")
    m_cov = np.asarray(m_cov, dtype=float)
    s1 = _cov_values(sigma1, m_cov.shape[0])
    s2 = _cov_values(sigma2, m_cov.shape[0])
    return float(np.trace(m_cov @ (s1 - s2))) / float(n)


def err_hat_pi(d, lse_fit, av_bs_lse, delta_hat):
    """Plug-in estimate of the PI to LSE excess-risk ratio.

    Shared between numerator and denominator: the labeled response
    variance, the quadratic form of the LSE slopes in the pooled
    predictor covariance, and minus twice the labeled response/predictor
    covariances. The numerator then adds Trace(M (AV_BS - delta)), the
    denominator Trace(M AV_BS). With delta = 0 the ratio is exactly 1;
    with a PSD delta it cannot exceed 1.
    """
    if av_bs_lse.method not in (CovMethod.BOOTSTRAP_LSE, CovMethod.PARAMETRIC_LSE):
        raise ContractError("av_bs_lse must be an LSE covariance estimate")
    p = d.p
    beta = lse_fit.slopes
    if beta.size != p:
        raise ContractError("lse_fit does not match the dataset")
    if lse_fit.residuals.size != d.n:
        raise ContractError("lse_fit was computed on different labeled rows")
    av = _cov_values(av_bs_lse, p)
    delta = np.asarray(delta_hat, dtype=float)
    if delta.shape != (p, p):
        raise ContractError(f"delta_hat must be {p}x{p}, got {delta.shape}")

    y = d.labeled_y
    ybar = y.mean()
    sigma2_y = float(np.mean((y - ybar) ** 2))
    m_hat = empirical_moments(d).covariance
    xl_centered = d.labeled_x - d.labeled_x.mean(axis=0)
    cov_yx = ((y - ybar) @ xl_centered) / d.n
    shared = sigma2_y + beta @ m_hat @ beta - 2.0 * (beta @ cov_yx)
    denominator = shared + float(np.trace(m_hat @ av))
    if denominator <= 0.0:
        raise DegenerateRiskError("excess-risk denominator is not positive")
    numerator = shared + float(np.trace(m_hat @ (av - delta)))
    return float(numerator / denominator)


def mean_prediction_error(x, cov, n):
    """Average of vec(x)ᵀ (C / n) vec(x) over the given predictor rows.

    vec(x) is (1, x); C is the full coefficient covariance including the
    intercept, so `cov.full_values` must be present (the sandwich and
    the pairs bootstraps provide it). Estimates the prediction error of
    the fitted mean at those rows.
    """
    if not isinstance(cov, CovMatrix) or cov.full_values is None:
        raise ContractError(
            "mean_prediction_error needs a CovMatrix carrying full_values "
            "(intercept included)"
        )
    if n < 1:
        raise ContractError("n must be at least 1")
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x.reshape(-1, 1)
    if x.shape[0] == 0:
        raise ContractError("need at least one row")
    if x.shape[1] != cov.p:
        raise ContractError(f"rows have {x.shape[1]} predictors, covariance has {cov.p}")
    vec = np.column_stack([np.ones(x.shape[0]), x])
    quad = np.einsum("ij,jk,ik->i", vec, cov.full_values, vec)
    return float(quad.mean() / n)
