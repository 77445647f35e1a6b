"""Systematic N:1 sampling and the sampling-ratio sensitivity sweep."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._validation import check_non_negative_int, check_positive_int, check_series
from .arfima import DEFAULT_TRAIN_FRACTION, compare
from .metrics import EvaluationReport
from .timeseries import TimeSeries

__all__ = ["SamplingRatio", "STANDARD_RATIOS", "systematic_sample", "thin_counts", "sampling_sweep", "spread"]


@dataclass(frozen=True, order=True)
class SamplingRatio:
    """Keep one unit in ``n_to_one``."""

    n_to_one: int

    def __post_init__(self):
        check_positive_int(self.n_to_one, "n_to_one")

    @property
    def label(self) -> str:
        return f"{self.n_to_one}:1"

    @classmethod
    def parse(cls, text) -> "SamplingRatio":
        if isinstance(text, SamplingRatio):
            return text
        head = str(text).strip().split(":")[0]
        if not head.isdigit():
            raise ValueError(f"bad sampling ratio {text!r}")
        return cls(int(head))


STANDARD_RATIOS = tuple(SamplingRatio(n) for n in (1024, 256, 64, 8, 1))


def thin_counts(counts, n: int, offset: int = 0) -> np.ndarray:
    """Count-domain systematic thinning.

    Interval ``i`` keeps ``S(C_i) - S(C_{i-1})`` units, where ``C`` is the running
    total and ``S(c) = floor((c - offset) / n + 1/2)``. The rounding remainder is
    therefore carried forward and the kept total is ``round(total / n)`` for
    ``offset = 0``.
    """
    values = check_series(counts, name="counts")
    if n == 1:
        return values.copy()
    cumulative = np.cumsum(values)
    kept = np.maximum(np.floor((cumulative - offset) / n + 0.5), 0.0)
    return np.diff(kept, prepend=0.0)


def systematic_sample(data, ratio, offset: int = 0):
    """Systematic N:1 sampling.

    A :class:`TimeSeries` is treated as per-interval counts and thinned with
    :func:`thin_counts`; the result keeps its granularity. Any other sequence is
    treated as individual events and every N-th one from ``offset`` is kept.
    """
    ratio = SamplingRatio.parse(ratio)
    n = ratio.n_to_one
    offset = check_non_negative_int(offset, "offset")
    if offset >= n:
        raise ValueError(f"offset must lie in [0, {n}), got {offset}")
    if isinstance(data, TimeSeries):
        return data.with_values(thin_counts(data.values, n, offset))
    events = np.asarray(data, dtype=float)
    if events.ndim != 1:
        raise ValueError("events must be one-dimensional")
    return events[offset::n].copy()


def sampling_sweep(
    series: TimeSeries,
    configs,
    ratios=STANDARD_RATIOS,
    *,
    scale_by: float | None = 1e7,
    train_fraction: float = DEFAULT_TRAIN_FRACTION,
    offset: int = 0,
) -> EvaluationReport:
    """Score every model at every sampling ratio.

    Each cell thins the series, multiplies the kept counts by N to estimate the
    original volume, then runs the walk-forward comparison. Rows are ordered by
    ratio, then model, and carry the ratio label as their condition. A cell that
    cannot be fitted becomes a failed row.
    """
    if not isinstance(series, TimeSeries):
        series = TimeSeries(series)
    report = EvaluationReport()
    for ratio in map(SamplingRatio.parse, ratios):
        thinned = systematic_sample(series, ratio, offset % ratio.n_to_one)
        estimate = thinned.values * ratio.n_to_one
        cell = compare(
            estimate,
            configs,
            scale_by=scale_by,
            train_fraction=train_fraction,
            condition=ratio.label,
        )
        report.rows.extend(cell.rows)
    return report


def spread(report: EvaluationReport, label: str, metric: str = "rrmse") -> float:
    """Max minus min of ``metric`` for one model across conditions; NaN if any cell failed."""
    values = [getattr(row, metric) for row in report if row.label == label]
    if not values or any(math.isnan(v) for v in values):
        return math.nan
    return max(values) - min(values)
