"""Command line front end.

Every output embeds a provenance record (toolkit version, seed, normalization,
subcommand arguments) and is written atomically. Identical arguments give
byte-identical output.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

from . import __version__
from .arfima import ArfimaModel, compare, fit_arfima, forecast, parse_model_config
from .arma import select_order
from .fracdiff import (
    DifferenceRecord,
    apply_fracdiff,
    apply_inverse_fracdiff,
    integer_difference,
    integer_undifference,
)
from .hurst import MIN_WINDOW, estimate_hurst
from .sampling import SamplingRatio, sampling_sweep
from .timeseries import NormalizationRecord, TimeSeries, load_series, normalize, series_to_json

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_MODEL_SPEC = 3
EXIT_IO = 4
EXIT_DATA = 5
EXIT_NUMERIC = 6

EPILOG = """\
exit codes:
  0  success
  2  usage error (unknown subcommand, bad flag)
  3  malformed model string
  4  file could not be read or written
  5  invalid input data or parameters
  6  numerical failure (overflow, singular system)

model strings:  arma:p,q | arima:p,eta,q | arfima:p,d-or-auto,q[,eta]
"""


class ModelSpecError(ValueError):
    pass


def _parse_models(texts):
    configs = []
    for text in texts:
        for piece in text.split():
            try:
                configs.append(parse_model_config(piece))
            except ValueError as exc:
                raise ModelSpecError(str(exc)) from None
    return configs


def _parse_normalization(text: str) -> NormalizationRecord | None:
    text = text.strip().lower()
    if text == "none":
        return None
    mode, _, value = text.partition(":")
    if mode == "scale_by" and value:
        scale = float(value)
        if scale == 0 or not np.isfinite(scale):
            raise ValueError("scale_by must be finite and non-zero")
        return NormalizationRecord("scale_by", 0.0, scale)
    raise ValueError(f"normalization must be 'none' or 'scale_by:<x>', got {text!r}")


def _provenance(args) -> dict:
    arguments = {
        key: value
        for key, value in sorted(vars(args).items())
        if key not in ("handler", "seed")
    }
    return {
        "toolkit": f"arfima_traffic {__version__}",
        "subcommand": args.command,
        "seed": args.seed,
        "normalization": getattr(args, "normalization", "none"),
        "arguments": arguments,
    }


def _comment_lines(args) -> list[str]:
    prov = _provenance(args)
    return [
        f"toolkit={prov['toolkit']}",
        f"subcommand={prov['subcommand']}",
        f"seed={prov['seed']}",
        f"normalization={prov['normalization']}",
        "arguments=" + json.dumps(prov["arguments"], sort_keys=True),
    ]


def _dump_json(payload: dict) -> str:
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def write_output(text: str, path: str | None) -> None:
    """Write ``text`` to ``path`` via temp file + rename, or to stdout."""
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    target = Path(path)
    directory = target.parent if str(target.parent) else Path(".")
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=f".{target.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as handle:
            handle.write(text)
        os.replace(tmp, target)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _load(args) -> TimeSeries:
    return load_series(args.input, column=args.column, granularity=args.granularity)


def cmd_ingest(args) -> None:
    series = _load(args)
    extra = {"provenance": _provenance(args)}
    if args.normalization == "zscore":
        series, record = normalize(series, zscore=True)
        extra["normalization_record"] = record.to_dict()
    else:
        record = _parse_normalization(args.normalization)
        if record is not None:
            series, record = normalize(series, scale_by=record.scale)
            extra["normalization_record"] = record.to_dict()
    write_output(_dump_json(series_to_json(series, **extra)), args.output)


def cmd_hurst(args) -> None:
    series = _load(args)
    est = estimate_hurst(series, args.min_window, args.max_window)
    lines = [f"# {line}" for line in _comment_lines(args)]
    lines += ["quantity,value", f"h,{est.h!r}", f"d,{est.d!r}", f"r_squared,{est.r_squared!r}", ""]
    lines.append("window,log_n,log_rs")
    for size, (log_n, log_rs) in zip(est.window_sizes, est.log_rs_points):
        lines.append(f"{size},{log_n!r},{log_rs!r}")
    write_output("\n".join(lines) + "\n", args.output)


def cmd_fracdiff(args) -> None:
    path = Path(args.input)
    series = _load(args)
    payload = json.loads(path.read_text()) if path.suffix.lower() == ".json" else {}
    extra = {"provenance": _provenance(args), "d": args.d, "eta": args.eta, "inverse": args.inverse}
    if args.inverse:
        heads = payload.get("difference_record", {}).get("heads")
        if heads is None:
            heads = [0.0] * args.eta
        if len(heads) != args.eta:
            raise ValueError(f"difference record holds {len(heads)} values but --eta is {args.eta}")
        level = apply_inverse_fracdiff(series.values, args.d)
        out = integer_undifference(level, DifferenceRecord(args.eta, tuple(heads)))
    else:
        differenced, record = integer_difference(series.values, args.eta)
        out = apply_fracdiff(differenced, args.d)
        extra["difference_record"] = {"eta": record.eta, "heads": list(record.heads)}
    result = TimeSeries(out, series.granularity, series.origin)
    write_output(_dump_json(series_to_json(result, **extra)), args.output)


def _parse_d(text: str):
    return "auto" if text == "auto" else float(text)


def cmd_fit(args) -> None:
    series = _load(args)
    normalization = _parse_normalization(args.normalization)
    d = _parse_d(args.d)
    if args.auto:
        w, _ = integer_difference(normalization.apply(series.values) if normalization else series.values, args.eta)
        if d == "auto":
            d_used = estimate_hurst(w).d
        else:
            d_used = d
        d_used = max(min(d_used, 0.49), -0.49)
        p, q = select_order(apply_fracdiff(w - w.mean(), d_used), args.max_p, args.max_q)
    else:
        if args.p is None or args.q is None:
            raise ValueError("give --p and --q, or --auto")
        p, q = args.p, args.q
    model = fit_arfima(series, p, q, args.eta, d, normalization=normalization)
    payload = model.to_dict()
    payload["provenance"] = _provenance(args)
    payload["granularity_seconds"] = series.granularity.seconds
    write_output(_dump_json(payload), args.output)


def cmd_forecast(args) -> None:
    path = Path(args.model)
    if not path.is_file():
        raise FileNotFoundError(f"no such file: {path}")
    payload = json.loads(path.read_text())
    model = ArfimaModel.from_dict(payload)
    result = forecast(model, args.horizon)
    if args.format == "csv":
        lines = [f"# {line}" for line in _comment_lines(args)]
        lines.append("step,value,differenced_value")
        for step, (value, diff) in enumerate(zip(result.values, result.differenced_values), start=1):
            lines.append(f"{step},{float(value)!r},{float(diff)!r}")
        text = "\n".join(lines) + "\n"
    else:
        text = _dump_json(
            {
                "horizon": result.horizon,
                "values": [float(v) for v in result.values],
                "differenced_values": [float(v) for v in result.differenced_values],
                "provenance": _provenance(args),
            }
        )
    write_output(text, args.output)


def _scale(args) -> float | None:
    record = _parse_normalization(args.normalization)
    return None if record is None else record.scale


def cmd_compare(args) -> None:
    configs = _parse_models(args.models)
    series = _load(args)
    report = compare(series, configs, scale_by=_scale(args), train_fraction=args.train_fraction)
    write_output(report.to_csv(_comment_lines(args)), args.output)


def cmd_sample_sweep(args) -> None:
    configs = _parse_models(args.models)
    ratios = [SamplingRatio.parse(r) for r in args.ratios.split(",") if r.strip()]
    series = _load(args)
    report = sampling_sweep(
        series, configs, ratios, scale_by=_scale(args), train_fraction=args.train_fraction, offset=args.offset
    )
    comments = _comment_lines(args)
    rmse_pivot = report.pivot_csv("rmse", comments + ["metric=rmse"])
    rrmse_pivot = report.pivot_csv("rrmse", comments + ["metric=rrmse"])
    if args.output in (None, "-"):
        write_output(report.to_csv(comments) + "\n" + rmse_pivot + "\n" + rrmse_pivot, None)
        return
    target = Path(args.output)
    write_output(report.to_csv(comments), args.output)
    write_output(rmse_pivot, str(target.with_name(target.stem + ".rmse_pivot.csv")))
    write_output(rrmse_pivot, str(target.with_name(target.stem + ".rrmse_pivot.csv")))


def _add_input(parser) -> None:
    parser.add_argument("input", help="series file (.csv or .json)")
    parser.add_argument("--column", default="1", help="CSV column name or zero-based index (default: 1)")
    parser.add_argument("--granularity", type=int, default=None, help="interval length in seconds")
    parser.add_argument("-o", "--output", default=None, help="output path (default: stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="arfima-traffic",
        description="ARFIMA long-memory traffic forecasting toolkit.",
        epilog=EPILOG,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--seed", type=int, default=42, help="seed recorded in every output (default: 42)")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("ingest", help="convert a CSV column to the JSON series format")
    _add_input(p)
    p.add_argument("--normalization", default="none", help="none | zscore | scale_by:<x>")
    p.set_defaults(handler=cmd_ingest)

    p = sub.add_parser("hurst", help="R/S Hurst exponent and regression table")
    _add_input(p)
    p.add_argument("--min-window", type=int, default=MIN_WINDOW)
    p.add_argument("--max-window", type=int, default=None)
    p.set_defaults(handler=cmd_hurst)

    p = sub.add_parser("fracdiff", help="apply (1-L)^eta (1-L)^d or its inverse")
    _add_input(p)
    p.add_argument("--d", type=float, required=True)
    p.add_argument("--eta", type=int, default=0)
    p.add_argument("--inverse", action="store_true")
    p.set_defaults(handler=cmd_fracdiff)

    p = sub.add_parser("fit", help="fit an ARFIMA/ARIMA/ARMA model and write it as JSON")
    _add_input(p)
    p.add_argument("--p", type=int, default=None)
    p.add_argument("--q", type=int, default=None)
    p.add_argument("--auto", action="store_true", help="choose p and q by AIC")
    p.add_argument("--max-p", type=int, default=1)
    p.add_argument("--max-q", type=int, default=1)
    p.add_argument("--eta", type=int, default=0)
    p.add_argument("--d", default="0", help="fractional order or 'auto' (default: 0)")
    p.add_argument("--normalization", default="none", help="none | scale_by:<x>")
    p.set_defaults(handler=cmd_fit)

    p = sub.add_parser("forecast", help="forecast from a fitted model JSON")
    p.add_argument("model", help="model JSON written by 'fit'")
    p.add_argument("--horizon", type=int, required=True)
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(handler=cmd_forecast)

    for name, handler, text in (
        ("compare", cmd_compare, "walk-forward RMSE/RRMSE table for several models"),
        ("sample-sweep", cmd_sample_sweep, "sampling-ratio sensitivity sweep"),
    ):
        p = sub.add_parser(name, help=text)
        _add_input(p)
        p.add_argument(
            "--models",
            nargs="+",
            default=["arma:0,1", "arima:0,1,1", "arfima:1,auto,1"],
            help="model strings (default: arma:0,1 arima:0,1,1 arfima:1,auto,1)",
        )
        p.add_argument("--normalization", default="scale_by:1e7", help="none | scale_by:<x> (default: scale_by:1e7)")
        p.add_argument("--train-fraction", type=float, default=2 / 3)
        if name == "sample-sweep":
            p.add_argument("--ratios", default="1024,256,64,8,1")
            p.add_argument("--offset", type=int, default=0)
        p.set_defaults(handler=handler)
    return parser


def _fail(code: int, kind: str, exc: BaseException) -> int:
    message = " ".join(str(exc).split()) or type(exc).__name__
    sys.stderr.write(f"error code={code} kind={kind} message={json.dumps(message)}\n")
    return code


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.handler(args)
    except ModelSpecError as exc:
        return _fail(EXIT_MODEL_SPEC, "model", exc)
    except OSError as exc:
        return _fail(EXIT_IO, "io", exc)
    except (OverflowError, FloatingPointError, np.linalg.LinAlgError) as exc:
        return _fail(EXIT_NUMERIC, "numeric", exc)
    except (ValueError, KeyError, json.JSONDecodeError) as exc:
        return _fail(EXIT_DATA, "data", exc)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
