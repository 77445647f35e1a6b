"""ARMA(p, q) estimation by conditional sum of squares.

Conventions: ``x_t - m = sum_i ar[i] (x_{t-i} - m) + e_t + sum_j ma[j] e_{t-j}``.
Residuals are computed with pre-sample values and innovations set to zero.
"""
from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize
from scipy.signal import lfilter
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_non_negative_int, check_positive_int, check_series

__all__ = [
    "ArmaModel",
    "ARMA",
    "css_residuals",
    "hannan_rissanen",
    "fit_arma",
    "select_order",
    "simulate_arma",
    "forecast_arma",
]

logger = logging.getLogger(__name__)

MAX_EVALS = 500
REL_TOL = 1e-10
MAX_ORDER = 5


@dataclass(frozen=True, eq=False)
class ArmaModel:
    """Fitted (or hand-specified) ARMA model.

    ``flags`` collects non-fatal events from fitting: ``"not_converged"``,
    ``"ar_reflected"`` and ``"ma_reflected"``.
    """

    p: int
    q: int
    ar: tuple[float, ...] = ()
    ma: tuple[float, ...] = ()
    mean: float = 0.0
    sigma2: float = 1.0
    residuals: np.ndarray = field(default_factory=lambda: np.zeros(0))
    aic: float = float("nan")
    flags: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "ar", tuple(float(v) for v in self.ar))
        object.__setattr__(self, "ma", tuple(float(v) for v in self.ma))
        if len(self.ar) != self.p or len(self.ma) != self.q:
            raise ValueError(f"expected {self.p} AR and {self.q} MA coefficients")
        if not self.sigma2 > 0:
            raise ValueError(f"sigma2 must be positive, got {self.sigma2}")
        residuals = np.asarray(self.residuals, dtype=float).copy()
        residuals.setflags(write=False)
        object.__setattr__(self, "residuals", residuals)

    @property
    def n(self) -> int:
        return self.residuals.size

    @property
    def converged(self) -> bool:
        return "not_converged" not in self.flags

    def to_dict(self) -> dict:
        return {
            "p": self.p,
            "q": self.q,
            "ar": list(self.ar),
            "ma": list(self.ma),
            "mean": self.mean,
            "sigma2": self.sigma2,
            "aic": self.aic,
            "n": self.n,
            "flags": list(self.flags),
        }


def _ar_poly(ar) -> np.ndarray:
    return np.concatenate(([1.0], -np.asarray(ar, dtype=float)))


def _ma_poly(ma) -> np.ndarray:
    return np.concatenate(([1.0], np.asarray(ma, dtype=float)))


def css_residuals(centered, ar=(), ma=()) -> np.ndarray:
    """Innovations ``e`` solving ``theta(L) e = phi(L) x`` from zero initial state."""
    return lfilter(_ar_poly(ar), _ma_poly(ma), np.asarray(centered, dtype=float))


def _css(params: np.ndarray, centered: np.ndarray, p: int) -> float:
    resid = css_residuals(centered, params[:p], params[p:])
    value = float(resid @ resid)
    return value if math.isfinite(value) else math.inf


def _lagged(x: np.ndarray, lags: int, start: int) -> np.ndarray:
    return np.column_stack([x[start - i : x.size - i] for i in range(1, lags + 1)])


def hannan_rissanen(centered, p: int, q: int, long_ar_order: int | None = None):
    """Two-stage regression estimate of ``(ar, ma)`` for a zero-mean series.

    A long AR(m) fitted by least squares supplies innovation estimates, then
    ``x_t`` is regressed on its own ``p`` lags and ``q`` lagged innovations.
    ``m`` defaults to ``min(20, n // 4)``. Falls back to zeros when there are too
    few rows for the regression.
    """
    x = np.asarray(centered, dtype=float)
    n = x.size
    if p == 0 and q == 0:
        return np.zeros(0), np.zeros(0)
    if q == 0:
        if n - p <= p:
            return np.zeros(p), np.zeros(0)
        coef, *_ = np.linalg.lstsq(_lagged(x, p, p), x[p:], rcond=None)
        return coef, np.zeros(0)

    m = long_ar_order if long_ar_order is not None else min(20, n // 4)
    m = max(m, max(p, q), 1)
    start = m + max(p, q)
    if n - m <= m or n - start <= p + q:
        return np.zeros(p), np.zeros(q)
    long_coef, *_ = np.linalg.lstsq(_lagged(x, m, m), x[m:], rcond=None)
    innov = np.zeros(n)
    innov[m:] = x[m:] - _lagged(x, m, m) @ long_coef

    blocks = []
    if p:
        blocks.append(_lagged(x, p, start))
    blocks.append(_lagged(innov, q, start))
    coef, *_ = np.linalg.lstsq(np.column_stack(blocks), x[start:], rcond=None)
    return coef[:p], coef[p:]


def _reflect(poly: np.ndarray):
    """Move roots of ``poly`` (ascending powers, constant 1) outside the unit circle.

    Returns the repaired polynomial and whether anything changed.
    """
    if poly.size <= 1:
        return poly, False
    roots = np.roots(poly[::-1])
    moduli = np.abs(roots)
    if np.all(moduli > 1.0):
        return poly, False
    fixed = []
    for root, modulus in zip(roots, moduli):
        if modulus == 0.0:
            raise ValueError("cannot reflect a root at zero")
        if modulus < 1.0:
            root = 1.0 / np.conj(root)
        if abs(abs(root) - 1.0) < 1e-8:
            root = root * 1.0001
        fixed.append(root)
    # prod(1 - z / r_i) has constant term 1
    repaired = np.array([1.0 + 0j])
    for root in fixed:
        repaired = np.convolve(repaired, [1.0, -1.0 / root])
    return repaired.real, True


def fit_arma(
    series, p: int, q: int, *, max_evals: int = MAX_EVALS, tol: float = REL_TOL, demean: bool = True
) -> ArmaModel:
    """Fit ARMA(p, q) by conditional sum of squares.

    The sample mean is removed first unless ``demean`` is false, in which case
    the series is taken as already centred and the stored mean is zero. Nelder-Mead starts from the
    Hannan-Rissanen estimate and stops after ``max_evals`` objective evaluations
    or when the objective improves by less than ``tol`` relative to the start.
    Roots left on or inside the unit circle are reflected and flagged.
    """
    p = check_non_negative_int(p, "p")
    q = check_non_negative_int(q, "q")
    x = check_series(series, min_length=p + q + 2, name="series")
    mean = float(x.mean()) if demean else 0.0
    centered = x - mean
    if not np.any(centered):
        raise ValueError("cannot fit ARMA to a zero-variance series")

    flags = []
    ar0, ma0 = hannan_rissanen(centered, p, q)
    ar0 = -_reflect(_ar_poly(ar0))[0][1:]
    ma0 = _reflect(_ma_poly(ma0))[0][1:]
    start = np.concatenate((ar0, ma0))
    best = start
    if p + q:
        f0 = _css(start, centered, p)
        if not math.isfinite(f0):
            start = np.zeros(p + q)
            f0 = _css(start, centered, p)
        result = minimize(
            _css,
            start,
            args=(centered, p),
            method="Nelder-Mead",
            options={"maxfev": max_evals, "xatol": 1e-8, "fatol": tol * f0},
        )
        best = result.x if result.fun <= f0 else start
        if not result.success:
            flags.append("not_converged")
            logger.warning("ARMA(%d,%d) fit stopped early: %s", p, q, result.message)

    ar_poly, ar_moved = _reflect(_ar_poly(best[:p]))
    ma_poly, ma_moved = _reflect(_ma_poly(best[p:]))
    if ar_moved:
        flags.append("ar_reflected")
    if ma_moved:
        flags.append("ma_reflected")
    ar, ma = -ar_poly[1:], ma_poly[1:]

    resid = css_residuals(centered, ar, ma)
    n = x.size
    sigma2 = float(resid @ resid) / n
    if not sigma2 > 0:
        sigma2 = np.finfo(float).tiny
    aic = n * math.log(sigma2) + 2 * (p + q + 1)
    return ArmaModel(p, q, tuple(ar), tuple(ma), mean, sigma2, resid, aic, tuple(flags))


def select_order(series, max_p: int = 1, max_q: int = 1, **fit_kwargs):
    """Pick ``(p, q)`` on the grid ``0..max_p x 0..max_q`` with the smallest AIC.

    Ties go to the smaller ``p + q``, then the smaller ``p``. Cells that fail to
    fit are skipped.
    """
    max_p = check_non_negative_int(max_p, "max_p")
    max_q = check_non_negative_int(max_q, "max_q")
    if max_p > MAX_ORDER or max_q > MAX_ORDER:
        raise ValueError(f"max_p and max_q are capped at {MAX_ORDER}")
    candidates = []
    last_error = None
    for p, q in itertools.product(range(max_p + 1), range(max_q + 1)):
        try:
            model = fit_arma(series, p, q, **fit_kwargs)
        except ValueError as exc:
            last_error = exc
            continue
        candidates.append((model.aic, p + q, p, q))
    if not candidates:
        raise ValueError(f"no ARMA order on the grid could be fitted: {last_error}")
    _, _, p, q = min(candidates)
    return p, q


def simulate_arma(model: ArmaModel, n: int, seed: int = 42) -> np.ndarray:
    """Draw ``n`` Gaussian ARMA observations after a burn-in of ``10(p+q+1)+50``."""
    n = check_positive_int(n, "n")
    if model.p and np.any(np.abs(np.roots(_ar_poly(model.ar)[::-1])) <= 1.0):
        raise ValueError("AR polynomial has a root on or inside the unit circle")
    burn = 10 * (model.p + model.q + 1) + 50
    rng = np.random.default_rng(seed)
    noise = rng.normal(0.0, math.sqrt(model.sigma2), n + burn)
    path = lfilter(_ma_poly(model.ma), _ar_poly(model.ar), noise)
    return path[burn:] + model.mean


def forecast_arma(model: ArmaModel, history, horizon: int) -> np.ndarray:
    """Minimum mean square error forecasts ``h = 1..horizon`` after ``history``.

    Observed values and innovations are used at or before the forecast origin;
    beyond it, values are replaced by their own forecasts and innovations by
    zero. ``history`` is on the model's scale (the mean is handled here).
    """
    horizon = check_positive_int(horizon, "horizon")
    x = check_series(history, name="history") - model.mean
    innov = css_residuals(x, model.ar, model.ma)
    values = list(x)
    shocks = list(innov)
    T = len(values)
    for j in range(1, horizon + 1):
        t = T + j - 1
        s = 0.0
        for i, phi in enumerate(model.ar, start=1):
            if t - i >= 0:
                s += phi * values[t - i]
        for k, theta in enumerate(model.ma, start=1):
            if t - k >= 0:
                s += theta * shocks[t - k]
        values.append(s)
        shocks.append(0.0)
    return np.asarray(values[T:]) + model.mean


class ARMA(RegressorMixin, BaseEstimator):
    """Scikit-learn style ARMA(p, q) forecaster.

    ``fit(y)`` takes the series as the only input; ``predict(steps)`` returns
    forecasts after the training sample.

    Parameters
    ----------
    p, q : int, default=0
        AR and MA orders.
    max_evals : int, default=500
        Objective evaluation budget for the optimiser.

    Attributes
    ----------
    model_ : ArmaModel
    y_ : ndarray
        Training series.
    """

    def __init__(self, p: int = 0, q: int = 0, max_evals: int = MAX_EVALS):
        self.p = p
        self.q = q
        self.max_evals = max_evals

    def fit(self, y, X=None):
        self.y_ = check_series(y)
        self.model_ = fit_arma(self.y_, self.p, self.q, max_evals=self.max_evals)
        self.n_features_in_ = 1
        return self

    def predict(self, steps: int = 1, history=None) -> np.ndarray:
        check_is_fitted(self, "model_")
        return forecast_arma(self.model_, self.y_ if history is None else history, steps)

    @property
    def residuals_(self) -> np.ndarray:
        check_is_fitted(self, "model_")
        return self.model_.residuals

    @property
    def fitted_values_(self) -> np.ndarray:
        check_is_fitted(self, "model_")
        return self.y_ - self.model_.residuals

    def score(self, y=None, X=None) -> float:
        """Negative in-sample residual RMSE (higher is better)."""
        check_is_fitted(self, "model_")
        return -math.sqrt(self.model_.sigma2)
