"""Long-memory traffic forecasting with ARFIMA(p, eta, d, q) models."""
from .arfima import (
    ARFIMA,
    ArfimaModel,
    Forecast,
    ModelConfig,
    compare,
    fit_arfima,
    forecast,
    parse_model_config,
    rolling_evaluate,
)
from .arma import ARMA, ArmaModel, fit_arma, forecast_arma, select_order, simulate_arma
from .fracdiff import (
    FracDiffSpec,
    FractionalDifferencer,
    apply_fracdiff,
    apply_inverse_fracdiff,
    expansion_coefficients,
    integer_difference,
    integer_undifference,
)
from .hurst import HurstEstimate, RSHurst, estimate_hurst, rs_statistic
from .metrics import EvaluationReport, ReportRow, rmse, rrmse
from .sampling import STANDARD_RATIOS, SamplingRatio, sampling_sweep, systematic_sample
from .timeseries import (
    T1H,
    T2H,
    T5M,
    Granularity,
    NormalizationRecord,
    TimeSeries,
    ingest_csv,
    load_fixture,
    normalize,
    resample,
)

__version__ = "0.1.0"

__all__ = [
    "ARFIMA",
    "ARMA",
    "ArfimaModel",
    "ArmaModel",
    "EvaluationReport",
    "Forecast",
    "FracDiffSpec",
    "FractionalDifferencer",
    "Granularity",
    "HurstEstimate",
    "ModelConfig",
    "NormalizationRecord",
    "STANDARD_RATIOS",
    "RSHurst",
    "ReportRow",
    "SamplingRatio",
    "T1H",
    "T2H",
    "T5M",
    "TimeSeries",
    "apply_fracdiff",
    "apply_inverse_fracdiff",
    "compare",
    "estimate_hurst",
    "expansion_coefficients",
    "fit_arfima",
    "fit_arma",
    "forecast",
    "forecast_arma",
    "ingest_csv",
    "integer_difference",
    "integer_undifference",
    "load_fixture",
    "normalize",
    "parse_model_config",
    "resample",
    "rmse",
    "rolling_evaluate",
    "rrmse",
    "rs_statistic",
    "sampling_sweep",
    "select_order",
    "simulate_arma",
    "systematic_sample",
]
