"""ARFIMA(p, eta, d, q) pipeline: difference, fit, forecast, invert.

Fitting runs ``(1-L)^eta`` -> (optional) R/S estimate of ``d`` -> centring ->
``(1-L)^d`` -> CSS ARMA(p, q). Forecasting reapplies the stored transforms to a
history, runs the ARMA minimum-MSE recursion on the differenced scale, then
undoes each step. ARMA and ARIMA are the ``d = 0`` special cases.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_finite_real, check_non_negative_int, check_positive_int, check_series
from .arma import ArmaModel, css_residuals, fit_arma, forecast_arma
from .fracdiff import (
    FracDiffSpec,
    apply_fracdiff,
    apply_inverse_fracdiff,
    integer_difference,
    integrate_forecasts,
)
from .hurst import MIN_WINDOW, HurstEstimate, estimate_hurst
from .metrics import EvaluationReport, ReportRow
from .timeseries import IDENTITY, NormalizationRecord

__all__ = [
    "ModelConfig",
    "parse_model_config",
    "ArfimaModel",
    "Forecast",
    "ARFIMA",
    "fit_arfima",
    "forecast",
    "rolling_evaluate",
    "WalkForwardResult",
    "compare",
    "D_CLAMP",
]

D_CLAMP = 0.49
DEFAULT_TRAIN_FRACTION = 2 / 3


@dataclass(frozen=True)
class ModelConfig:
    """One model of the comparison: ``kind`` is ``arma``, ``arima`` or ``arfima``."""

    kind: str
    p: int
    q: int
    eta: int = 0
    d: float | str = 0.0

    def __post_init__(self):
        if self.kind not in ("arma", "arima", "arfima"):
            raise ValueError(f"unknown model kind {self.kind!r}")
        check_non_negative_int(self.p, "p")
        check_non_negative_int(self.q, "q")
        check_non_negative_int(self.eta, "eta")
        if self.d != "auto":
            check_finite_real(self.d, "d")

    @property
    def label(self) -> str:
        if self.kind == "arma":
            return f"ARMA({self.p},{self.q})"
        if self.kind == "arima":
            return f"ARIMA({self.p},{self.eta},{self.q})"
        d = self.d if self.d == "auto" else f"{float(self.d):g}"
        suffix = f",eta={self.eta}" if self.eta else ""
        return f"ARFIMA({self.p},{d},{self.q}{suffix})"

    @property
    def spec_string(self) -> str:
        if self.kind == "arma":
            return f"arma:{self.p},{self.q}"
        if self.kind == "arima":
            return f"arima:{self.p},{self.eta},{self.q}"
        d = self.d if self.d == "auto" else f"{float(self.d):g}"
        return f"arfima:{self.p},{d},{self.q}" + (f",{self.eta}" if self.eta else "")


_INT = r"\d+"
_REAL = r"[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?"
_GRAMMAR = {
    "arma": re.compile(rf"({_INT}),({_INT})"),
    "arima": re.compile(rf"({_INT}),({_INT}),({_INT})"),
    "arfima": re.compile(rf"({_INT}),(auto|{_REAL}),({_INT})(?:,({_INT}))?"),
}


def parse_model_config(text: str) -> ModelConfig:
    """Parse ``arma:p,q``, ``arima:p,eta,q`` or ``arfima:p,d|auto,q[,eta]``."""
    kind, sep, body = text.strip().partition(":")
    kind = kind.lower()
    pattern = _GRAMMAR.get(kind)
    match = pattern.fullmatch(body.replace(" ", "")) if (pattern and sep) else None
    if match is None:
        raise ValueError(
            f"malformed model {text!r}; expected arma:p,q | arima:p,eta,q | arfima:p,d-or-auto,q[,eta]"
        )
    g = match.groups()
    if kind == "arma":
        return ModelConfig("arma", int(g[0]), int(g[1]))
    if kind == "arima":
        return ModelConfig("arima", int(g[0]), int(g[2]), eta=int(g[1]))
    d = "auto" if g[1] == "auto" else float(g[1])
    return ModelConfig("arfima", int(g[0]), int(g[2]), eta=int(g[3] or 0), d=d)


@dataclass(frozen=True, eq=False)
class ArfimaModel:
    """Everything needed to forecast from, or re-run, a fitted pipeline.

    ``training`` is the training series on the modelling (normalized) scale.
    ``flags`` merges ARMA fit flags with ``"d_clamped"`` when an estimated
    ``d`` was pulled back into ``[-0.49, 0.49]``.
    """

    spec: FracDiffSpec
    arma: ArmaModel
    training_mean: float
    training: np.ndarray
    normalization: NormalizationRecord = IDENTITY
    hurst: HurstEstimate | None = None
    flags: tuple[str, ...] = ()

    @property
    def d(self) -> float:
        return self.spec.d

    @property
    def eta(self) -> int:
        return self.spec.eta

    def to_dict(self) -> dict:
        return {
            "p": self.arma.p,
            "q": self.arma.q,
            "eta": self.eta,
            "d": self.d,
            "d_estimated": self.hurst is not None,
            "hurst": None if self.hurst is None else self.hurst.to_dict(),
            "training_mean": self.training_mean,
            "normalization": self.normalization.to_dict(),
            "arma": self.arma.to_dict(),
            "flags": list(self.flags),
            "training": [float(v) for v in self.training],
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "ArfimaModel":
        """Rebuild a model from :meth:`to_dict` output.

        Residuals are recomputed from the stored training series, so the result
        forecasts identically to the model that was serialized.
        """
        arma_info = payload["arma"]
        training = np.asarray(payload["training"], dtype=float)
        spec = FracDiffSpec(float(payload["d"]), int(payload["eta"]), truncation=training.size)
        training_mean = float(payload["training_mean"])
        w, _ = integer_difference(training, spec.eta)
        u = apply_fracdiff(w - training_mean, spec.d)
        ar, ma, mean = arma_info["ar"], arma_info["ma"], float(arma_info["mean"])
        arma = ArmaModel(
            int(arma_info["p"]),
            int(arma_info["q"]),
            ar,
            ma,
            mean,
            float(arma_info["sigma2"]),
            css_residuals(u - mean, ar, ma),
            float(arma_info["aic"]),
            tuple(arma_info.get("flags", ())),
        )
        return cls(
            spec,
            arma,
            training_mean,
            training,
            NormalizationRecord.from_dict(payload.get("normalization")),
            None,
            tuple(payload.get("flags", ())),
        )


@dataclass(frozen=True)
class Forecast:
    horizon: int
    values: np.ndarray
    differenced_values: np.ndarray


def fit_arfima(
    series,
    p: int,
    q: int,
    eta: int = 0,
    d: float | str = "auto",
    *,
    normalization: NormalizationRecord | None = None,
    min_window: int = MIN_WINDOW,
    max_window: int | None = None,
    max_evals: int = 500,
) -> ArfimaModel:
    """Fit the ARFIMA(p, eta, d, q) pipeline.

    Parameters
    ----------
    series : array-like or TimeSeries
        Observations on their original scale.
    p, q : int
        ARMA orders applied after differencing.
    eta : int, default=0
        Number of integer differences.
    d : float or "auto", default="auto"
        Fractional order. ``"auto"`` estimates H by R/S on the integer-differenced
        series and uses ``H - 0.5``, clamped to ``[-0.49, 0.49]``.
    normalization : NormalizationRecord, optional
        Applied to the input before anything else; forecasts are mapped back.
    """
    p = check_non_negative_int(p, "p")
    q = check_non_negative_int(q, "q")
    eta = check_non_negative_int(eta, "eta")
    normalization = normalization or IDENTITY
    y = normalization.apply(check_series(series, name="series"))

    w, _ = integer_difference(y, eta)
    flags = []
    hurst = None
    if d == "auto":
        hurst = estimate_hurst(w, min_window, max_window)
        d_value = hurst.d
        if abs(d_value) > D_CLAMP:
            d_value = math.copysign(D_CLAMP, d_value)
            flags.append("d_clamped")
    else:
        d_value = check_finite_real(d, "d")
        if not -0.5 < d_value < 0.5:
            raise ValueError(f"d must lie in (-0.5, 0.5), got {d_value}")

    training_mean = float(w.mean())
    u = apply_fracdiff(w - training_mean, d_value)
    # with d = 0 the centred series has zero mean already; re-estimating it
    # only injects rounding noise
    arma = fit_arma(u, p, q, max_evals=max_evals, demean=d_value != 0.0)
    flags.extend(arma.flags)
    spec = FracDiffSpec(d_value, eta, truncation=y.size)
    return ArfimaModel(spec, arma, training_mean, y, normalization, hurst, tuple(flags))


def _to_modelling_scale(model: ArfimaModel, y: np.ndarray):
    w, record = integer_difference(y, model.eta)
    return apply_fracdiff(w - model.training_mean, model.d), record


def forecast(model: ArfimaModel, horizon: int, history=None) -> Forecast:
    """Forecast ``horizon`` steps after ``history`` (default: the training series).

    ``history`` is on the original scale of the data; it is pushed through the
    model's fitted transforms with the fitted parameters held fixed.
    """
    horizon = check_positive_int(horizon, "horizon")
    if history is None:
        y = model.training
    else:
        y = model.normalization.apply(check_series(history, name="history"))
    if horizon > 10 * y.size:
        raise ValueError(f"horizon {horizon} exceeds 10x the history length {y.size}")
    if y.size <= model.eta:
        raise ValueError(f"history of length {y.size} is too short for eta={model.eta}")

    u, record = _to_modelling_scale(model, y)
    u_hat = forecast_arma(model.arma, u, horizon)
    z = apply_inverse_fracdiff(np.concatenate((u, u_hat)), model.d)[u.size :]
    levels = integrate_forecasts(z + model.training_mean, record.tails)
    values = model.normalization.invert(levels)
    if not np.all(np.isfinite(values)):
        raise OverflowError("forecast left the finite range")
    return Forecast(horizon, values, u_hat)


def _split(n: int, train_fraction: float) -> int:
    if not 0.0 < train_fraction < 1.0:
        raise ValueError(f"train_fraction must lie in (0, 1), got {train_fraction}")
    # round first so that 2/3 * 72 gives 48, not 49
    n_train = min(math.ceil(round(train_fraction * n, 9)), n - 1)
    if n_train < 10:
        raise ValueError(f"split leaves {n_train} training points; need at least 10")
    return n_train


@dataclass(frozen=True, eq=False)
class WalkForwardResult:
    """One-step-ahead predictions over the test region of a single series."""

    config: ModelConfig
    n_train: int
    actual: np.ndarray
    predicted: np.ndarray
    model: ArfimaModel = field(repr=False)

    def to_row(self, condition: str = "", normalization: str = "none") -> ReportRow:
        return ReportRow.score(self.config.label, condition, self.actual, self.predicted, normalization)


def _fit_config(series, config: ModelConfig, **kwargs) -> ArfimaModel:
    d = 0.0 if config.kind in ("arma", "arima") else config.d
    eta = 0 if config.kind == "arma" else config.eta
    return fit_arfima(series, config.p, config.q, eta, d, **kwargs)


def rolling_evaluate(
    series,
    config: ModelConfig | str,
    train_fraction: float = DEFAULT_TRAIN_FRACTION,
    refit_every: int | None = None,
    **fit_kwargs,
) -> WalkForwardResult:
    """Walk-forward one-step-ahead evaluation.

    Fits on the first ``ceil(train_fraction * n)`` points (capped at ``n - 1``),
    then predicts each later point from everything before it. Parameters stay
    fixed unless ``refit_every`` is set, in which case the model is refitted on
    the expanding window every ``refit_every`` steps.
    """
    if isinstance(config, str):
        config = parse_model_config(config)
    y = check_series(series, name="series")
    n_train = _split(y.size, train_fraction)
    if refit_every is not None:
        refit_every = check_positive_int(refit_every, "refit_every")

    model = _fit_config(y[:n_train], config, **fit_kwargs)
    first = model
    predicted = np.empty(y.size - n_train)
    for i, t in enumerate(range(n_train, y.size)):
        if refit_every and i and i % refit_every == 0:
            model = _fit_config(y[:t], config, **fit_kwargs)
        predicted[i] = forecast(model, 1, history=y[:t]).values[0]
    return WalkForwardResult(config, n_train, y[n_train:].copy(), predicted, first)


class ARFIMA(RegressorMixin, BaseEstimator):
    """Scikit-learn style ARFIMA(p, eta, d, q) forecaster.

    Parameters
    ----------
    p, q : int, default=1
        ARMA orders after differencing.
    eta : int, default=0
        Integer differencing order.
    d : float or "auto", default="auto"
        Fractional order, or ``"auto"`` for the R/S estimate.
    scale_by : float or None, default=None
        Divide the series by this constant before fitting.
    min_window, max_window : int
        R/S window ladder bounds, used when ``d="auto"``.
    max_evals : int, default=500

    Attributes
    ----------
    model_ : ArfimaModel
    d_ : float
        The fractional order actually used.
    hurst_ : float or None
    """

    def __init__(
        self,
        p: int = 1,
        q: int = 1,
        eta: int = 0,
        d: float | str = "auto",
        scale_by: float | None = None,
        min_window: int = MIN_WINDOW,
        max_window: int | None = None,
        max_evals: int = 500,
    ):
        self.p = p
        self.q = q
        self.eta = eta
        self.d = d
        self.scale_by = scale_by
        self.min_window = min_window
        self.max_window = max_window
        self.max_evals = max_evals

    def fit(self, y, X=None):
        normalization = None
        if self.scale_by is not None:
            normalization = NormalizationRecord("scale_by", 0.0, check_finite_real(self.scale_by, "scale_by"))
        self.model_ = fit_arfima(
            y,
            self.p,
            self.q,
            self.eta,
            self.d,
            normalization=normalization,
            min_window=self.min_window,
            max_window=self.max_window,
            max_evals=self.max_evals,
        )
        self.d_ = self.model_.d
        self.hurst_ = None if self.model_.hurst is None else self.model_.hurst.h
        self.n_features_in_ = 1
        return self

    def forecast(self, steps: int = 1, history=None) -> Forecast:
        check_is_fitted(self, "model_")
        return forecast(self.model_, steps, history)

    def predict(self, steps: int = 1, history=None) -> np.ndarray:
        """Point forecasts on the original scale."""
        return self.forecast(steps, history).values

    def score(self, y, X=None) -> float:
        """Negative one-step-ahead RMSE over ``y``, which continues the training series."""
        check_is_fitted(self, "model_")
        future = check_series(y)
        history = self.model_.normalization.invert(self.model_.training)
        errors = []
        for value in future:
            errors.append(value - self.predict(1, history)[0])
            history = np.append(history, value)
        return -math.sqrt(float(np.mean(np.square(errors))))


def compare(
    series,
    configs,
    *,
    scale_by: float | None = 1e7,
    train_fraction: float = DEFAULT_TRAIN_FRACTION,
    condition: str = "",
    refit_every: int | None = None,
) -> EvaluationReport:
    """Walk-forward scores for several model configurations on one series.

    The series is divided by ``scale_by`` first (``None`` keeps it as is) and
    errors are measured on that scale. A configuration that fails to fit is
    reported as a failed row rather than aborting the comparison.
    """
    values = check_series(series, name="series")
    record = IDENTITY
    if scale_by is not None:
        record = NormalizationRecord("scale_by", 0.0, check_finite_real(scale_by, "scale_by"))
    scaled = record.apply(values)
    report = EvaluationReport()
    for config in configs:
        if isinstance(config, str):
            config = parse_model_config(config)
        try:
            result = rolling_evaluate(scaled, config, train_fraction, refit_every)
            report.rows.append(result.to_row(condition, record.label))
        except (ValueError, OverflowError, np.linalg.LinAlgError) as exc:
            report.rows.append(ReportRow.failed(config.label, condition, record.label, exc))
    return report
