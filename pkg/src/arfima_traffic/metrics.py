"""Forecast error metrics and evaluation reports."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

__all__ = ["rmse", "rrmse", "ReportRow", "EvaluationReport", "REPORT_HEADER"]

REPORT_HEADER = ("label", "condition", "rmse", "rrmse", "n", "normalization")


def _pair(actual, predicted):
    actual = np.asarray(actual, dtype=float).ravel()
    predicted = np.asarray(predicted, dtype=float).ravel()
    if actual.size != predicted.size:
        raise ValueError(f"length mismatch: {actual.size} actual vs {predicted.size} predicted")
    if actual.size == 0:
        raise ValueError("metrics need at least one pair")
    return actual, predicted


def rmse(actual, predicted) -> float:
    """Root mean square error."""
    actual, predicted = _pair(actual, predicted)
    return math.sqrt(float(np.mean((actual - predicted) ** 2)))


def rrmse(actual, predicted) -> float:
    """Root mean square of the errors relative to the actual values.

    Raises ``ValueError`` if any actual value is zero.
    """
    actual, predicted = _pair(actual, predicted)
    if np.any(actual == 0.0):
        raise ValueError("relative error is undefined where the actual value is zero")
    return math.sqrt(float(np.mean(((actual - predicted) / actual) ** 2)))


@dataclass(frozen=True)
class ReportRow:
    label: str
    condition: str
    rmse: float
    rrmse: float
    n: int
    normalization: str
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.error is None

    @classmethod
    def score(cls, label, condition, actual, predicted, normalization="none") -> "ReportRow":
        return cls(label, condition, rmse(actual, predicted), rrmse(actual, predicted), len(actual), normalization)

    @classmethod
    def failed(cls, label, condition, normalization, error) -> "ReportRow":
        return cls(label, condition, math.nan, math.nan, 0, normalization, str(error))


def _fmt(value: float) -> str:
    return "nan" if math.isnan(value) else repr(float(value))


@dataclass
class EvaluationReport:
    """Ordered rows of (model, condition) scores."""

    rows: list[ReportRow] = field(default_factory=list)

    def __iter__(self):
        return iter(self.rows)

    def __len__(self) -> int:
        return len(self.rows)

    def find(self, label: str, condition: str = "") -> ReportRow:
        for row in self.rows:
            if row.label == label and row.condition == condition:
                return row
        raise KeyError((label, condition))

    def to_csv(self, comments: list[str] | tuple = ()) -> str:
        """CSV with the fixed header; failed rows carry ``nan`` scores and ``n = 0``."""
        buffer = io.StringIO()
        for line in comments:
            buffer.write(f"# {line}\n")
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(REPORT_HEADER)
        for row in self.rows:
            writer.writerow([row.label, row.condition, _fmt(row.rmse), _fmt(row.rrmse), row.n, row.normalization])
        return buffer.getvalue()

    def pivot(self, metric: str = "rrmse") -> tuple[list[str], list[str], np.ndarray]:
        """Table of ``metric`` with conditions as rows and labels as columns."""
        if metric not in ("rmse", "rrmse"):
            raise ValueError(f"unknown metric {metric!r}")
        conditions = list(dict.fromkeys(row.condition for row in self.rows))
        labels = list(dict.fromkeys(row.label for row in self.rows))
        table = np.full((len(conditions), len(labels)), np.nan)
        for row in self.rows:
            table[conditions.index(row.condition), labels.index(row.label)] = getattr(row, metric)
        return conditions, labels, table

    def pivot_csv(self, metric: str = "rrmse", comments: list[str] | tuple = ()) -> str:
        conditions, labels, table = self.pivot(metric)
        buffer = io.StringIO()
        for line in comments:
            buffer.write(f"# {line}\n")
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(["condition", *labels])
        for condition, values in zip(conditions, table):
            writer.writerow([condition, *(_fmt(v) for v in values)])
        return buffer.getvalue()
