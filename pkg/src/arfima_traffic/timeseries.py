"""Series container, file ingestion, granularity resampling and normalization."""
from __future__ import annotations

import csv
import json
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from ._validation import check_finite_real, check_positive_int, check_series

__all__ = [
    "Granularity",
    "T5M",
    "T1H",
    "T2H",
    "TimeSeries",
    "NormalizationRecord",
    "ingest_csv",
    "normalize",
    "resample",
    "load_series",
    "series_from_json",
    "series_to_json",
    "load_fixture",
    "FIXTURES",
]

_DIRECTIVE = re.compile(r"#\s*granularity\s*[=:]\s*(\d+)", re.IGNORECASE)

FIXTURES = ("day1", "day2", "day3", "day123")


@dataclass(frozen=True)
class Granularity:
    """Interval length of a series, in seconds."""

    seconds: int

    def __post_init__(self):
        check_positive_int(self.seconds, "granularity seconds")

    @property
    def label(self) -> str:
        return _LABELS.get(self.seconds, f"T{self.seconds}s")


T5M = Granularity(300)
T1H = Granularity(3600)
T2H = Granularity(7200)
_LABELS = {300: "T5m", 3600: "T1h", 7200: "T2h"}


def _as_granularity(value) -> Granularity:
    return value if isinstance(value, Granularity) else Granularity(int(value))


@dataclass(frozen=True, eq=False)
class TimeSeries:
    """Ordered, finite, immutable observations at a fixed granularity.

    Parameters
    ----------
    values : array-like of shape (n,)
        Observations in time order. Copied and frozen on construction.
    granularity : Granularity or int, default=T1H
        Interval length; a bare integer is read as seconds.
    origin : float, default=0.0
        Timestamp of the first observation in epoch seconds. Informational only.
    """

    values: np.ndarray
    granularity: Granularity = T1H
    origin: float = 0.0

    def __post_init__(self):
        arr = check_series(self.values, name="values").copy()
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)
        object.__setattr__(self, "granularity", _as_granularity(self.granularity))
        object.__setattr__(self, "origin", float(self.origin))

    def __len__(self) -> int:
        return self.values.size

    def __array__(self, dtype=None, copy=None):
        return np.array(self.values, dtype=dtype)

    def __eq__(self, other) -> bool:
        if not isinstance(other, TimeSeries):
            return NotImplemented
        return (
            self.granularity == other.granularity
            and self.origin == other.origin
            and np.array_equal(self.values, other.values)
        )

    __hash__ = None

    def with_values(self, values) -> "TimeSeries":
        """Same granularity and origin, new observations."""
        return TimeSeries(values, self.granularity, self.origin)


def wrap_like(template, values):
    """Return ``values`` as a TimeSeries if ``template`` was one, else as an array."""
    if isinstance(template, TimeSeries):
        return template.with_values(values)
    return np.asarray(values, dtype=float)


@dataclass(frozen=True)
class NormalizationRecord:
    """Affine map ``(x - offset) / scale`` and its exact inverse."""

    mode: str = "none"
    offset: float = 0.0
    scale: float = 1.0
    extra: dict = field(default_factory=dict, compare=False)

    def apply(self, values) -> np.ndarray:
        return (np.asarray(values, dtype=float) - self.offset) / self.scale

    def invert(self, values) -> np.ndarray:
        return np.asarray(values, dtype=float) * self.scale + self.offset

    @property
    def label(self) -> str:
        if self.mode == "scale_by":
            return f"scale_by:{self.scale:g}"
        if self.mode == "zscore":
            return f"zscore:mean={self.offset:.10g},std={self.scale:.10g}"
        return "none"

    def to_dict(self) -> dict:
        return {"mode": self.mode, "offset": self.offset, "scale": self.scale}

    @classmethod
    def from_dict(cls, payload: dict | None) -> "NormalizationRecord":
        if not payload:
            return cls()
        return cls(payload["mode"], float(payload["offset"]), float(payload["scale"]))


IDENTITY = NormalizationRecord()


def normalize(series: TimeSeries, *, scale_by: float | None = None, zscore: bool = False):
    """Rescale a series and return ``(scaled, record)``.

    Exactly one of ``scale_by`` (divide by a constant) or ``zscore`` (subtract the
    mean, divide by the population standard deviation) must be given.
    """
    if (scale_by is None) == (not zscore):
        raise ValueError("give exactly one of scale_by or zscore=True")
    values = check_series(series)
    if zscore:
        std = float(np.std(values))
        if std == 0.0:
            raise ValueError("zero-variance series cannot be z-scored")
        record = NormalizationRecord("zscore", float(np.mean(values)), std)
    else:
        scale = check_finite_real(scale_by, "scale_by")
        if scale == 0.0:
            raise ValueError("scale_by must be non-zero")
        record = NormalizationRecord("scale_by", 0.0, scale)
    return wrap_like(series, record.apply(values)), record


def resample(series: TimeSeries, target) -> TimeSeries:
    """Aggregate to a coarser granularity by summing whole windows.

    The trailing partial window, if any, is dropped.
    """
    target = _as_granularity(target)
    source = series.granularity.seconds
    if target.seconds < source:
        raise ValueError(
            f"cannot refine {series.granularity.label} to {target.label}; only aggregation is supported"
        )
    if target.seconds % source:
        raise ValueError(f"target {target.seconds}s is not an integer multiple of {source}s")
    width = target.seconds // source
    n_out = len(series) // width
    if n_out == 0:
        raise ValueError(f"series of length {len(series)} is shorter than one {target.label} window")
    sums = series.values[: n_out * width].reshape(n_out, width).sum(axis=1)
    return TimeSeries(sums, target, series.origin)


def _parse_float(cell: str) -> float | None:
    try:
        value = float(cell)
    except ValueError:
        return None
    return value if np.isfinite(value) else None


def ingest_csv(path, column=1, granularity=None, origin: float = 0.0) -> TimeSeries:
    """Read one column of a CSV file as a TimeSeries.

    ``column`` is a header name or a zero-based index. With an index, a first row
    that does not parse as a number is taken as the header. A single-column file
    falls back to column 0 when the default index does not exist.

    Lines starting with ``#`` are comments; ``# granularity=<seconds>`` sets the
    granularity unless the ``granularity`` argument overrides it. The default is
    one hour. Errors report 1-based physical row numbers.
    """
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"no such file: {path}")

    directive = None
    rows = []
    with path.open(newline="") as handle:
        for lineno, row in enumerate(csv.reader(handle), start=1):
            if not row or all(not cell.strip() for cell in row):
                continue
            if row[0].lstrip().startswith("#"):
                match = _DIRECTIVE.search(",".join(row))
                if match:
                    directive = int(match.group(1))
                continue
            rows.append((lineno, [cell.strip() for cell in row]))

    if not rows:
        raise ValueError(f"{path}: no data rows")

    if isinstance(column, str) and not column.lstrip("-").isdigit():
        header = rows[0][1]
        if column not in header:
            raise ValueError(f"{path}: column {column!r} not in header {header}")
        index = header.index(column)
        rows = rows[1:]
    else:
        index = int(column)
        if index == 1 and all(len(cells) == 1 for _, cells in rows):
            index = 0
        first_lineno, first = rows[0]
        if index < len(first) and _parse_float(first[index]) is None and not _looks_numeric(first[index]):
            rows = rows[1:]

    values = []
    for lineno, cells in rows:
        if index >= len(cells) or cells[index] == "":
            raise ValueError(f"{path}: row {lineno}: missing value in column {column!r}")
        value = _parse_float(cells[index])
        if value is None:
            raise ValueError(f"{path}: row {lineno}: non-numeric value {cells[index]!r}")
        values.append(value)
    if not values:
        raise ValueError(f"{path}: column {column!r} is empty")

    seconds = granularity if granularity is not None else (directive or T1H.seconds)
    return TimeSeries(values, seconds, origin)


def _looks_numeric(cell: str) -> bool:
    # "nan"/"inf" parse as floats but are bad data rather than a header.
    return cell.lower().lstrip("+-") in {"nan", "inf", "infinity"}


def series_to_json(series: TimeSeries, **extra) -> dict:
    payload = {
        "granularity_seconds": series.granularity.seconds,
        "origin": series.origin,
        "values": [float(v) for v in series.values],
    }
    payload.update(extra)
    return payload


def series_from_json(payload: dict) -> TimeSeries:
    missing = {"granularity_seconds", "values"} - payload.keys()
    if missing:
        raise ValueError(f"series JSON lacks fields: {sorted(missing)}")
    return TimeSeries(payload["values"], int(payload["granularity_seconds"]), payload.get("origin", 0.0))


def load_series(path, column=1, granularity=None) -> TimeSeries:
    """Load a series from ``.json`` (series format) or CSV, chosen by extension."""
    path = Path(path)
    if path.suffix.lower() == ".json":
        if not path.is_file():
            raise FileNotFoundError(f"no such file: {path}")
        series = series_from_json(json.loads(path.read_text()))
        if granularity is not None:
            series = TimeSeries(series.values, granularity, series.origin)
        return series
    return ingest_csv(path, column=column, granularity=granularity)


def fixture_path(name: str):
    if name not in FIXTURES:
        raise ValueError(f"unknown fixture {name!r}; choose from {FIXTURES}")
    return resources.files("arfima_traffic") / "data" / f"{name}.csv"


def load_fixture(name: str = "day123") -> TimeSeries:
    """Hourly traffic of the three-day backbone trace (``day1``..``day3`` or ``day123``)."""
    with resources.as_file(fixture_path(name)) as path:
        return ingest_csv(path, column="traffic", granularity=T1H.seconds)
