"""Rescaled-range (R/S) estimation of the Hurst exponent."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator

from ._validation import check_positive_int, check_series

__all__ = ["HurstEstimate", "RSHurst", "estimate_hurst", "rs_statistic", "window_ladder"]

MIN_WINDOW = 8


@dataclass(frozen=True)
class HurstEstimate:
    """Hurst exponent together with the log-log regression that produced it."""

    h: float
    d: float
    window_sizes: tuple[int, ...]
    log_rs_points: tuple[tuple[float, float], ...]
    regression_slope: float
    regression_intercept: float
    r_squared: float

    def to_dict(self) -> dict:
        return {
            "h": self.h,
            "d": self.d,
            "r_squared": self.r_squared,
            "regression_slope": self.regression_slope,
            "regression_intercept": self.regression_intercept,
            "window_sizes": list(self.window_sizes),
            "log_rs_points": [list(p) for p in self.log_rs_points],
        }


def rs_statistic(segment) -> float:
    """Range of the cumulative mean-centred sum over the population std.

    Raises ``ValueError`` for segments shorter than 2 or with zero variance.
    """
    x = check_series(segment, min_length=2, name="segment")
    std = float(np.std(x))
    if std == 0.0:
        raise ValueError("R/S undefined for a zero-variance segment")
    path = np.cumsum(x - x.mean())
    return float((path.max() - path.min()) / std)


def window_ladder(min_window: int, max_window: int) -> list[int]:
    sizes = []
    n = min_window
    while n <= max_window:
        sizes.append(n)
        n *= 2
    return sizes


def _ols(xs: np.ndarray, ys: np.ndarray):
    x_mean, y_mean = xs.mean(), ys.mean()
    sxx = float(np.sum((xs - x_mean) ** 2))
    slope = float(np.sum((xs - x_mean) * (ys - y_mean)) / sxx)
    intercept = float(y_mean - slope * x_mean)
    ss_tot = float(np.sum((ys - y_mean) ** 2))
    ss_res = float(np.sum((ys - intercept - slope * xs) ** 2))
    r_squared = 1.0 if ss_tot == 0.0 else max(0.0, 1.0 - ss_res / ss_tot)
    return slope, intercept, r_squared


def estimate_hurst(series, min_window: int = MIN_WINDOW, max_window: int | None = None) -> HurstEstimate:
    """Estimate H by OLS of log mean R/S on log window size.

    Window sizes double from ``min_window`` up to ``max_window`` (default: the
    series length, so the whole series forms the largest window). Each size
    splits the series into disjoint segments from the start; segments with zero
    variance are skipped, and a size with no valid segment is dropped.

    Returns
    -------
    HurstEstimate
        ``h`` is the regression slope and ``d = h - 0.5``.
    """
    x = check_series(series, min_length=16, name="series")
    n = x.size
    min_window = check_positive_int(min_window, "min_window")
    max_window = n if max_window is None else check_positive_int(max_window, "max_window")
    if min_window < MIN_WINDOW:
        raise ValueError(f"min_window must be at least {MIN_WINDOW}, got {min_window}")
    if not min_window < max_window <= n:
        raise ValueError(f"need {min_window} < max_window <= {n}, got max_window={max_window}")

    sizes, points = [], []
    for size in window_ladder(min_window, max_window):
        segments = x[: (n // size) * size].reshape(-1, size)
        values = []
        for segment in segments:
            try:
                values.append(rs_statistic(segment))
            except ValueError:
                continue
        if values:
            sizes.append(size)
            points.append((float(np.log(size)), float(np.log(np.mean(values)))))
    if len(points) < 3:
        raise ValueError(
            f"only {len(points)} usable window sizes between {min_window} and {max_window}; need 3"
        )

    arr = np.array(points)
    slope, intercept, r_squared = _ols(arr[:, 0], arr[:, 1])
    return HurstEstimate(
        h=slope,
        d=slope - 0.5,
        window_sizes=tuple(sizes),
        log_rs_points=tuple(points),
        regression_slope=slope,
        regression_intercept=intercept,
        r_squared=r_squared,
    )


class RSHurst(BaseEstimator):
    """Estimator wrapper around :func:`estimate_hurst`.

    Parameters
    ----------
    min_window : int, default=8
    max_window : int or None, default=None
        None uses the full series length.

    Attributes
    ----------
    estimate_ : HurstEstimate
    hurst_ : float
    d_ : float
        Fractional differencing order implied by ``hurst_``.
    """

    def __init__(self, min_window: int = MIN_WINDOW, max_window: int | None = None):
        self.min_window = min_window
        self.max_window = max_window

    def fit(self, y, X=None):
        self.estimate_ = estimate_hurst(y, self.min_window, self.max_window)
        self.hurst_ = self.estimate_.h
        self.d_ = self.estimate_.d
        return self
