"""Fractional (1-L)^d and integer (1-L)^eta differencing with exact inverses.

Pre-sample values are taken as zero and every output point uses the full
available history, so ``apply_fracdiff`` is multiplication by a lower
triangular Toeplitz matrix. That makes forward, inverse and composition exact
up to floating point on the shared truncation.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_finite_real, check_non_negative_int, check_positive_int, check_series
from .timeseries import wrap_like

__all__ = [
    "FracDiffSpec",
    "DifferenceRecord",
    "FractionalDifferencer",
    "expansion_coefficients",
    "apply_fracdiff",
    "apply_inverse_fracdiff",
    "integer_difference",
    "integer_undifference",
    "integrate_forecasts",
]


def expansion_coefficients(d: float, count: int) -> np.ndarray:
    """Lag weights of (1-L)^d: ``w[0] = 1``, ``w[k] = w[k-1] * (k-1-d) / k``."""
    d = check_finite_real(d, "d")
    count = check_positive_int(count, "count")
    if abs(d) > 1:
        raise ValueError(f"|d| must not exceed 1, got {d}")
    weights = np.empty(count)
    weights[0] = 1.0
    for k in range(1, count):
        weights[k] = weights[k - 1] * (k - 1 - d) / k
    return weights


@dataclass(frozen=True)
class FracDiffSpec:
    """Fractional order ``d`` and integer order ``eta`` with their lag weights."""

    d: float
    eta: int = 0
    truncation: int = 1
    coefficients: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        check_non_negative_int(self.eta, "eta")
        coefficients = expansion_coefficients(self.d, self.truncation + 1)
        coefficients.setflags(write=False)
        object.__setattr__(self, "coefficients", coefficients)


def _convolve_history(x: np.ndarray, weights: np.ndarray) -> np.ndarray:
    # out[t] = sum_{k=0}^{t} weights[k] * x[t-k], ascending k
    n = x.size
    out = np.zeros(n)
    for k in np.flatnonzero(weights[:n]):
        out[k:] += weights[k] * x[: n - k]
    return out


def apply_fracdiff(series, d: float):
    """Apply (1-L)^d with zero pre-sample values; output length equals input length."""
    x = check_series(series, name="series")
    weights = expansion_coefficients(d, x.size)
    return wrap_like(series, _convolve_history(x, weights))


def apply_inverse_fracdiff(series, d: float):
    """Apply (1-L)^(-d), undoing :func:`apply_fracdiff` with the same ``d``."""
    return apply_fracdiff(series, -check_finite_real(d, "d"))


@dataclass(frozen=True)
class DifferenceRecord:
    """Leading values dropped by each of the ``eta`` difference passes.

    ``heads[i]`` is the first element of the series before pass ``i + 1``.
    """

    eta: int
    heads: tuple[float, ...] = ()
    tails: tuple[float, ...] = ()


def integer_difference(series, eta: int):
    """Apply (1-L) ``eta`` times. Returns ``(differenced, record)``.

    ``record.tails`` holds the last value of every intermediate level, which is
    what forecast integration needs; ``record.heads`` reconstructs the input.
    """
    eta = check_non_negative_int(eta, "eta")
    x = check_series(series, name="series")
    if x.size <= eta:
        raise ValueError(f"series of length {x.size} is too short for eta={eta}")
    heads, tails = [], []
    level = x
    for _ in range(eta):
        heads.append(float(level[0]))
        tails.append(float(level[-1]))
        level = np.diff(level)
    return wrap_like(series, level), DifferenceRecord(eta, tuple(heads), tuple(tails))


def integer_undifference(series, record: DifferenceRecord):
    """Exact inverse of :func:`integer_difference` from its record."""
    level = check_series(series, min_length=0, name="series")
    for head in reversed(record.heads):
        level = np.concatenate(([head], head + np.cumsum(level)))
    return wrap_like(series, level)


def integrate_forecasts(forecasts, tails) -> np.ndarray:
    """Carry forecasts on the ``eta``-times differenced scale back up to levels.

    ``tails[i]`` is the last observed value at differencing level ``i``.
    """
    level = np.asarray(forecasts, dtype=float)
    for tail in reversed(tails):
        level = tail + np.cumsum(level)
    return level


class FractionalDifferencer(TransformerMixin, BaseEstimator):
    """Transformer applying (1-L)^eta then (1-L)^d to a single series.

    ``fit`` records what the inverse needs: the integer-difference heads and,
    when ``center`` is set, the mean removed before fractional differencing.

    Parameters
    ----------
    d : float, default=0.0
    eta : int, default=0
    center : bool, default=False
        Subtract the mean of the integer-differenced training series before
        applying (1-L)^d.
    """

    def __init__(self, d: float = 0.0, eta: int = 0, center: bool = False):
        self.d = d
        self.eta = eta
        self.center = center

    def fit(self, y, X=None):
        x = check_series(y)
        differenced, self.record_ = integer_difference(x, self.eta)
        self.mean_ = float(differenced.mean()) if self.center else 0.0
        self.n_features_in_ = 1
        return self

    def transform(self, y):
        check_is_fitted(self, "record_")
        differenced, _ = integer_difference(check_series(y), self.eta)
        return apply_fracdiff(differenced - self.mean_, self.d)

    def inverse_transform(self, y):
        """Invert the fractional step, restore the mean and re-integrate with the fitted heads."""
        check_is_fitted(self, "record_")
        level = apply_inverse_fracdiff(check_series(y), self.d) + self.mean_
        return integer_undifference(level, self.record_)
