"""Acceptance gate: one check per criterion, each reported as a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py`` (lines appear in the terminal
summary) or ``python3 tests/test_acceptance.py``.
"""
import math
import tempfile
import time
from pathlib import Path

import numpy as np
from scipy.special import gamma

from arfima_traffic.arfima import compare, fit_arfima
from arfima_traffic.arma import ArmaModel, fit_arma, forecast_arma, simulate_arma
from arfima_traffic.cli import main
from arfima_traffic.fracdiff import apply_fracdiff, apply_inverse_fracdiff, expansion_coefficients
from arfima_traffic.hurst import estimate_hurst
from arfima_traffic.metrics import rmse, rrmse
from arfima_traffic.sampling import STANDARD_RATIOS, sampling_sweep, spread
from arfima_traffic.timeseries import fixture_path, load_fixture

MODELS = ["arma:0,1", "arima:0,1,1", "arfima:1,auto,1"]
ARMA, ARIMA, ARFIMA = "ARMA(0,1)", "ARIMA(0,1,1)", "ARFIMA(1,auto,1)"
RESULTS = {}


def record(name, ok, detail):
    RESULTS[name] = (ok, detail)
    return ok, detail


def criterion_1():
    series = load_fixture("day123")
    start = time.perf_counter()
    h = estimate_hurst(series).h
    elapsed = time.perf_counter() - start
    ok = 0.77 <= h <= 0.97 and elapsed < 1.0
    return record("1 hurst", ok, f"H={h:.4f} in [0.77, 0.97], {elapsed:.3f}s < 1s")


def criterion_2():
    series = load_fixture("day123")
    start = time.perf_counter()
    report = compare(series, MODELS, scale_by=1e7, train_fraction=2 / 3)
    elapsed = time.perf_counter() - start
    a, b, c = report.find(ARFIMA), report.find(ARMA), report.find(ARIMA)
    ok = (
        a.n == 24
        and a.rmse < b.rmse
        and a.rmse < c.rmse
        and a.rrmse < b.rrmse
        and a.rrmse < c.rrmse
        and elapsed < 10.0
    )
    detail = (
        f"RMSE arfima={a.rmse:.4f} arma={b.rmse:.4f} arima={c.rmse:.4f}; "
        f"RRMSE arfima={a.rrmse:.4f} arma={b.rrmse:.4f} arima={c.rrmse:.4f}; {elapsed:.2f}s < 10s"
    )
    return record("2 model ordering", ok, detail)


def criterion_3():
    series = load_fixture("day123")
    start = time.perf_counter()
    report = sampling_sweep(series, MODELS, STANDARD_RATIOS, scale_by=1e7)
    elapsed = time.perf_counter() - start
    s = {label: spread(report, label) for label in (ARMA, ARIMA, ARFIMA)}
    ok = len(report) == 15 and s[ARFIMA] < s[ARMA] and s[ARFIMA] < s[ARIMA] and elapsed < 60.0
    detail = f"RRMSE spread arfima={s[ARFIMA]:.3e} arma={s[ARMA]:.3e} arima={s[ARIMA]:.3e}; {elapsed:.2f}s < 60s"
    return record("3 sampling sensitivity", ok, detail)


def criterion_4():
    worst_gamma = 0.0
    for d in (-0.4, -0.1, 0.1, 0.25, 0.4):
        w = expansion_coefficients(d, 21)
        oracle = np.array([gamma(d + 1) * (-1) ** k / (gamma(k + 1) * gamma(d - k + 1)) for k in range(21)])
        worst_gamma = max(worst_gamma, float(np.max(np.abs(w - oracle) / np.abs(oracle))))
    rng = np.random.default_rng(42)
    worst_trip = 0.0
    for d in (0.1, 0.3, 0.45):
        x = rng.standard_normal(256)
        back = apply_inverse_fracdiff(apply_fracdiff(x, d), d)
        worst_trip = max(worst_trip, float(np.max(np.abs(back - x))))
    worst_comp = 0.0
    for d1, d2 in ((0.1, 0.2), (0.3, -0.15), (-0.4, 0.45), (0.25, 0.2)):
        x = rng.standard_normal(256)
        lhs = apply_fracdiff(apply_fracdiff(x, d1), d2)
        worst_comp = max(worst_comp, float(np.max(np.abs(lhs - apply_fracdiff(x, d1 + d2)))))
    ok = worst_gamma <= 1e-10 and worst_trip <= 1e-8 and worst_comp <= 1e-8
    detail = f"gamma rel err {worst_gamma:.1e}, round trip {worst_trip:.1e}, composition {worst_comp:.1e}"
    return record("4 fracdiff exactness", ok, detail)


def criterion_5():
    reps = 20
    ar_hits = sum(
        abs(fit_arma(simulate_arma(ArmaModel(1, 0, (0.5,)), 4000, seed), 1, 0).ar[0] - 0.5) <= 0.05
        for seed in range(reps)
    )
    ma_hits = sum(
        abs(fit_arma(simulate_arma(ArmaModel(0, 1, (), (0.4,)), 4000, seed), 0, 1).ma[0] - 0.4) <= 0.07
        for seed in range(reps)
    )
    d_hits = 0
    for seed in range(reps):
        x = apply_inverse_fracdiff(np.random.default_rng(seed).standard_normal(4096), 0.3)
        d_hits += 0.15 <= fit_arfima(x, 0, 0).d <= 0.45
    need = math.ceil(0.9 * reps)
    ok = min(ar_hits, ma_hits, d_hits) >= need
    return record("5 estimator recovery", ok, f"AR {ar_hits}/{reps}, MA {ma_hits}/{reps}, d {d_hits}/{reps} (need {need})")


def criterion_6():
    phi1, phi2, theta = 0.5, -0.3, 0.4
    x = [1.0, -0.5, 2.0, 0.25, -1.5, 0.75]
    e = []
    for t in range(6):
        value = x[t]
        if t >= 1:
            value -= phi1 * x[t - 1] + theta * e[t - 1]
        if t >= 2:
            value -= phi2 * x[t - 2]
        e.append(value)
    s1 = phi1 * x[5] + phi2 * x[4] + theta * e[5]
    s2 = phi1 * s1 + phi2 * x[5]
    s3 = phi1 * s2 + phi2 * s1
    s4 = phi1 * s3 + phi2 * s2
    s5 = phi1 * s4 + phi2 * s3
    got = forecast_arma(ArmaModel(2, 1, (phi1, phi2), (theta,)), x, 5)
    err = float(np.max(np.abs(got - np.array([s1, s2, s3, s4, s5]))))
    return record("6 forecast oracle", err <= 1e-12, f"max |error| over h=1..5 = {err:.1e}")


def criterion_7():
    checks = [abs(rmse([1, 2], [2, 4]) - math.sqrt(2.5)) <= 1e-12, rrmse([2], [1]) == 0.5]
    try:
        rrmse([0.0, 1.0], [1.0, 1.0])
        checks.append(False)
    except ValueError:
        checks.append(True)
    rng = np.random.default_rng(42)
    for _ in range(50):
        x = rng.uniform(0.5, 10, size=20) * rng.choice([-1, 1], size=20)
        y = x + rng.normal(size=20)
        a = rng.uniform(-100, 100)
        checks.append(abs(rmse(a * x, a * y) - abs(a) * rmse(x, y)) <= 1e-10 * max(1.0, abs(a) * rmse(x, y)))
        checks.append(abs(rrmse(a * x, a * y) - rrmse(x, y)) <= 1e-10)
    return record("7 metric oracles", all(checks), f"{sum(checks)}/{len(checks)} checks")


def criterion_8():
    day = str(fixture_path("day123"))
    with tempfile.TemporaryDirectory() as tmp:
        model = str(Path(tmp) / "model.json")
        commands = [
            ["ingest", day],
            ["hurst", day],
            ["fracdiff", day, "--d", "0.3", "--eta", "1"],
            ["fit", day, "--p", "1", "--q", "1", "--eta", "1", "--d", "auto", "--normalization", "scale_by:1e7"],
            ["compare", day],
            ["sample-sweep", day],
        ]
        mismatched = []
        if main(["fit", day, "--p", "1", "--q", "1", "--d", "auto", "-o", model]) != 0:
            mismatched.append("fit-setup")
        commands.append(["forecast", model, "--horizon", "5"])
        for argv in commands:
            target = Path(tmp) / "out"
            outputs = []
            for _ in range(2):
                if main(argv + ["-o", str(target)]) != 0:
                    mismatched.append(argv[0])
                outputs.append(target.read_bytes() if target.exists() else b"")
                pivots = sorted(Path(tmp).glob("out.*_pivot.csv"))
                outputs[-1] += b"".join(p.read_bytes() for p in pivots)
                for path in [target, *pivots]:
                    path.unlink(missing_ok=True)
            if outputs[0] != outputs[1] or not outputs[0]:
                mismatched.append(argv[0])
    return record("8 determinism", not mismatched, f"{len(commands)} subcommands rerun, mismatches: {mismatched or 'none'}")


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6, criterion_7, criterion_8]


def _check(criterion):
    ok, detail = criterion()
    assert ok, detail


def test_criterion_1_hurst():
    _check(criterion_1)


def test_criterion_2_model_ordering():
    _check(criterion_2)


def test_criterion_3_sampling_sensitivity():
    _check(criterion_3)


def test_criterion_4_fracdiff_exactness():
    _check(criterion_4)


def test_criterion_5_estimator_recovery():
    _check(criterion_5)


def test_criterion_6_forecast_oracle():
    _check(criterion_6)


def test_criterion_7_metric_oracles():
    _check(criterion_7)


def test_criterion_8_determinism():
    _check(criterion_8)


def report_lines():
    return [f"{'PASS' if ok else 'FAIL'}  criterion {name}: {detail}" for name, (ok, detail) in RESULTS.items()]


if __name__ == "__main__":
    import contextlib
    import io

    for criterion in CRITERIA:
        with contextlib.redirect_stdout(io.StringIO()):
            criterion()
    print("\n".join(report_lines()))
    raise SystemExit(0 if all(ok for ok, _ in RESULTS.values()) else 1)
