"""Semi-supervised linear regression.

Estimates the best linear predictor of a response from n labeled
observations while exploiting extra information about the predictor
distribution: either exactly known moments (total information, TI) or
m additional unlabeled predictor rows (partial information, PI). Under
a correctly specified linear model the extra information is worthless,
but under misspecification it shrinks the asymptotic variance of the
slopes, and this package also ships the variance estimators, the
excess-risk machinery, and a Monte Carlo laboratory to measure the
effect.
"""

from .dataset import (
    MomentSpec,
    SemiDataset,
    empirical_moments,
    load_csv,
    write_csv,
)
from .errors import (
    ConfigError,
    ContractError,
    DataError,
    DegenerateRegressorError,
    DegenerateRiskError,
    EmptyDataError,
    EstimationError,
    NumericalError,
    ParseError,
    RankDeficiencyError,
    SchemaError,
    SslregError,
    UnderDeterminedError,
)
from .estimators import (
    EMPIRICAL_POOLED,
    CoordinateModel,
    InterceptModelData,
    SslFit,
    build_intercept_model,
    fit_pi,
    fit_ti,
)
from .linreg import (
    AdjustedRegressor,
    CovMatrix,
    CovMethod,
    FitResult,
    adjust_regressor,
    fit_least_squares,
    sandwich_cov_lse,
)
from .risk import (
    RiskReport,
    asymptotic_risk,
    err_hat_pi,
    mean_prediction_error,
    prediction_error_difference,
)
from .rng import substream
from .simlab import (
    ERROR_LAWS,
    MEAN_SHAPES,
    X_LAWS,
    ErrEstimate,
    ScenarioSpec,
    ToySpec,
    ToyVarianceResult,
    estimate_err,
    full_grid,
    generate_scenario,
    generate_toy,
    grid_from_json,
    scenario_sweep,
    summarize_sweep,
    sweep_rows_to_csv,
    toy_asymptotics,
    toy_err_ti,
    toy_variance_experiment,
)
from .variance import (
    BootstrapPlan,
    ResampleScheme,
    av_parametric_pi,
    bootstrap_lse,
    bootstrap_pi,
    joint_bootstrap_replicates,
    variance_bootstrap_pi,
)

__version__ = "0.1.0"

__all__ = [
    "AdjustedRegressor",
    "BootstrapPlan",
    "ConfigError",
    "ContractError",
    "CoordinateModel",
    "CovMatrix",
    "CovMethod",
    "DataError",
    "DegenerateRegressorError",
    "DegenerateRiskError",
    "EMPIRICAL_POOLED",
    "ERROR_LAWS",
    "EmptyDataError",
    "ErrEstimate",
    "EstimationError",
    "FitResult",
    "InterceptModelData",
    "MEAN_SHAPES",
    "MomentSpec",
    "NumericalError",
    "ParseError",
    "RankDeficiencyError",
    "ResampleScheme",
    "RiskReport",
    "ScenarioSpec",
    "SchemaError",
    "SemiDataset",
    "SslFit",
    "SslregError",
    "ToySpec",
    "ToyVarianceResult",
    "UnderDeterminedError",
    "X_LAWS",
    "adjust_regressor",
    "asymptotic_risk",
    "av_parametric_pi",
    "bootstrap_lse",
    "bootstrap_pi",
    "build_intercept_model",
    "empirical_moments",
    "err_hat_pi",
    "estimate_err",
    "fit_least_squares",
    "fit_pi",
    "fit_ti",
    "full_grid",
    "generate_scenario",
    "generate_toy",
    "grid_from_json",
    "joint_bootstrap_replicates",
    "load_csv",
    "mean_prediction_error",
    "prediction_error_difference",
    "sandwich_cov_lse",
    "scenario_sweep",
    "substream",
    "summarize_sweep",
    "sweep_rows_to_csv",
    "toy_asymptotics",
    "toy_err_ti",
    "toy_variance_experiment",
    "variance_bootstrap_pi",
    "write_csv",
]
