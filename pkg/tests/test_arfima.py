import math

import numpy as np
import pytest
from sklearn.base import clone

from arfima_traffic.arfima import (
    ARFIMA,
    ArfimaModel,
    ModelConfig,
    _split,
    compare,
    fit_arfima,
    forecast,
    parse_model_config,
    rolling_evaluate,
)
from arfima_traffic.arma import ArmaModel, fit_arma, forecast_arma, simulate_arma
from arfima_traffic.fracdiff import apply_inverse_fracdiff, integer_difference, integrate_forecasts
from arfima_traffic.timeseries import NormalizationRecord

ARMA11 = ArmaModel(1, 1, (0.6,), (0.3,), mean=5.0)


@pytest.fixture(scope="module")
def arma_path():
    return simulate_arma(ARMA11, 300, seed=2)


def simulate_arfima(d, n, seed):
    noise = np.random.default_rng(seed).standard_normal(n)
    return apply_inverse_fracdiff(noise, d)


class TestConfig:
    @pytest.mark.parametrize(
        "text, label",
        [
            ("arma:0,1", "ARMA(0,1)"),
            ("arima:0,1,1", "ARIMA(0,1,1)"),
            ("arfima:1,auto,1", "ARFIMA(1,auto,1)"),
            ("arfima:1,0.3,1,1", "ARFIMA(1,0.3,1,eta=1)"),
            ("ARFIMA: 2, -0.25, 0", "ARFIMA(2,-0.25,0)"),
        ],
    )
    def test_labels(self, text, label):
        assert parse_model_config(text).label == label

    @pytest.mark.parametrize("text", ["arma:0,1", "arima:0,1,1", "arfima:1,auto,1", "arfima:1,0.3,1,2"])
    def test_spec_string_round_trip(self, text):
        config = parse_model_config(text)
        assert parse_model_config(config.spec_string) == config

    def test_arima_slot_order(self):
        config = parse_model_config("arima:2,1,3")
        assert (config.p, config.eta, config.q) == (2, 1, 3)

    @pytest.mark.parametrize("text", ["arma:1", "garch:1,1", "arma:-1,0", "arfima:1,x,1", "arima:0,1", "arma0,1"])
    def test_malformed(self, text):
        with pytest.raises(ValueError):
            parse_model_config(text)

    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            ModelConfig("sarima", 1, 1)


class TestFit:
    def test_pipeline_records(self, trace_values):
        model = fit_arfima(trace_values, 1, 1, eta=1, d="auto")
        assert model.eta == 1
        assert model.hurst is not None
        w, _ = integer_difference(trace_values, 1)
        assert model.training_mean == pytest.approx(w.mean(), rel=1e-15)
        assert -0.5 < model.d < 0.5
        if "d_clamped" not in model.flags:
            assert model.d == model.hurst.d

    def test_clamp_flagged(self, trace_values):
        model = fit_arfima(trace_values[:48], 1, 1)
        assert model.hurst.d > 0.49
        assert model.d == 0.49
        assert "d_clamped" in model.flags

    def test_fixed_d(self, arma_path):
        model = fit_arfima(arma_path, 1, 0, d=0.2)
        assert model.d == 0.2 and model.hurst is None

    def test_d_out_of_band(self, arma_path):
        with pytest.raises(ValueError):
            fit_arfima(arma_path, 1, 0, d=0.6)

    def test_auto_needs_sixteen_points(self):
        with pytest.raises(ValueError):
            fit_arfima(np.arange(15.0) ** 1.5, 0, 0)

    def test_d_recovery(self):
        hits = []
        for seed in range(20):
            model = fit_arfima(simulate_arfima(0.3, 4096, seed), 0, 0)
            hits.append(0.15 <= model.d <= 0.45)
        assert sum(hits) >= 18


class TestReductions:
    def test_arma(self, arma_path):
        pipeline = forecast(fit_arfima(arma_path, 1, 1, eta=0, d=0.0), 5).values
        direct = forecast_arma(fit_arma(arma_path, 1, 1), arma_path, 5)
        np.testing.assert_allclose(pipeline, direct, rtol=0, atol=1e-10)

    def test_arima(self, arma_path):
        y = np.cumsum(arma_path)
        pipeline = forecast(fit_arfima(y, 1, 1, eta=1, d=0.0), 5).values
        w, record = integer_difference(y, 1)
        direct = integrate_forecasts(forecast_arma(fit_arma(w, 1, 1), w, 5), record.tails)
        np.testing.assert_allclose(pipeline, direct, rtol=0, atol=1e-10 * np.max(np.abs(y)))


class TestForecast:
    def test_white_noise_predicts_mean(self, arma_path):
        model = fit_arfima(arma_path, 0, 0, d=0.0)
        f = forecast(model, 4)
        np.testing.assert_allclose(f.differenced_values, model.arma.mean)
        np.testing.assert_allclose(f.values, arma_path.mean(), rtol=1e-14)

    def test_ar1_closed_form(self, arma_path):
        model = fit_arfima(arma_path, 1, 0, d=0.0)
        phi = model.arma.ar[0]
        last = arma_path[-1] - model.training_mean
        expected = [phi**h * last for h in range(1, 5)]
        np.testing.assert_allclose(forecast(model, 4).differenced_values, expected, rtol=1e-12)

    @pytest.mark.parametrize("eta, d", [(0, 0.0), (0, 0.3), (1, 0.2), (1, "auto")])
    def test_in_sample_one_step(self, trace_values, eta, d):
        record = NormalizationRecord("scale_by", 0.0, 1e7)
        model = fit_arfima(trace_values, 1, 1, eta=eta, d=d, normalization=record)
        one_step = forecast(model, 1, history=trace_values[:-1]).values[0]
        fitted = model.training[-1] - model.arma.residuals[-1]
        assert record.apply(one_step) == pytest.approx(fitted, abs=1e-8)

    def test_scale_equivariance(self, arma_path):
        base = forecast(fit_arfima(arma_path, 1, 1, eta=1, d=0.3), 5).values
        scaled = forecast(fit_arfima(3.0 * arma_path, 1, 1, eta=1, d=0.3), 5).values
        np.testing.assert_allclose(scaled, 3.0 * base, rtol=1e-6)

    def test_normalization_is_inverted(self, trace_values):
        raw = fit_arfima(trace_values / 1e7, 1, 1, d=0.2)
        norm = fit_arfima(trace_values, 1, 1, d=0.2, normalization=NormalizationRecord("scale_by", 0.0, 1e7))
        np.testing.assert_allclose(forecast(norm, 3).values, forecast(raw, 3).values * 1e7, rtol=1e-9)

    def test_lengths(self, arma_path):
        f = forecast(fit_arfima(arma_path, 1, 1, d=0.1), 7)
        assert f.horizon == 7 and f.values.shape == (7,) and f.differenced_values.shape == (7,)

    def test_horizon_cap(self, arma_path):
        model = fit_arfima(arma_path, 0, 0, d=0.0)
        with pytest.raises(ValueError):
            forecast(model, 10 * arma_path.size + 1)
        with pytest.raises(ValueError):
            forecast(model, 0)

    def test_serialization_round_trip(self, trace_values):
        model = fit_arfima(trace_values, 1, 1, eta=1, normalization=NormalizationRecord("scale_by", 0.0, 1e7))
        back = ArfimaModel.from_dict(model.to_dict())
        np.testing.assert_array_equal(forecast(back, 6).values, forecast(model, 6).values)
        np.testing.assert_allclose(back.arma.residuals, model.arma.residuals, rtol=0, atol=1e-15)


class TestWalkForward:
    def test_default_split(self):
        assert _split(72, 2 / 3) == 48

    def test_nearly_all_training(self):
        assert 72 - _split(72, 0.99) == 1

    @pytest.mark.parametrize("n, fraction", [(12, 0.5), (72, 0.0), (72, 1.0)])
    def test_degenerate_split(self, n, fraction):
        with pytest.raises(ValueError):
            _split(n, fraction)

    def test_protocol(self, trace_values):
        result = rolling_evaluate(trace_values / 1e7, "arima:0,1,1")
        assert result.n_train == 48
        assert result.actual.size == result.predicted.size == 24
        model = result.model
        for i, t in enumerate(range(48, 72)):
            expected = forecast(model, 1, history=trace_values[:t] / 1e7).values[0]
            assert result.predicted[i] == expected

    def test_refit_changes_later_predictions(self, trace_values):
        fixed = rolling_evaluate(trace_values / 1e7, "arma:1,0")
        refit = rolling_evaluate(trace_values / 1e7, "arma:1,0", refit_every=6)
        assert fixed.predicted[0] == refit.predicted[0]
        assert not np.array_equal(fixed.predicted, refit.predicted)

    def test_generating_model_reaches_noise_floor(self):
        x = simulate_arma(ARMA11, 2000, seed=21)
        result = rolling_evaluate(x, "arma:1,1")
        rmse = math.sqrt(np.mean((result.actual - result.predicted) ** 2))
        assert rmse < 1.2 * math.sqrt(ARMA11.sigma2)


class TestCompare:
    def test_fixture_ordering(self, trace_values):
        report = compare(trace_values, ["arma:0,1", "arima:0,1,1", "arfima:1,auto,1"])
        assert [row.label for row in report] == ["ARMA(0,1)", "ARIMA(0,1,1)", "ARFIMA(1,auto,1)"]
        arfima = report.find("ARFIMA(1,auto,1)")
        for other in ("ARMA(0,1)", "ARIMA(0,1,1)"):
            assert arfima.rmse < report.find(other).rmse
            assert arfima.rrmse < report.find(other).rrmse
        assert all(row.n == 24 and row.normalization == "scale_by:1e+07" for row in report)

    def test_failed_row(self, trace_values):
        report = compare(trace_values[:20], ["arma:0,1", "arfima:1,auto,1"])
        assert report.rows[0].ok
        failed = report.rows[1]
        assert not failed.ok and failed.n == 0 and math.isnan(failed.rmse)


class TestEstimator:
    def test_matches_functional(self, trace_values):
        est = ARFIMA(p=1, q=1, eta=1, scale_by=1e7).fit(trace_values)
        model = fit_arfima(trace_values, 1, 1, 1, normalization=NormalizationRecord("scale_by", 0.0, 1e7))
        np.testing.assert_array_equal(est.predict(4), forecast(model, 4).values)
        assert est.d_ == model.d
        assert est.hurst_ == model.hurst.h

    def test_score(self, trace_values):
        est = ARFIMA(p=0, q=1, eta=1, d=0.0).fit(trace_values[:48])
        result = rolling_evaluate(trace_values, "arima:0,1,1")
        expected = math.sqrt(np.mean((result.actual - result.predicted) ** 2))
        assert est.score(trace_values[48:]) == pytest.approx(-expected, rel=1e-9)

    def test_params(self):
        est = ARFIMA(p=2, d=0.1)
        params = est.get_params()
        assert params["p"] == 2 and params["d"] == 0.1 and params["d"] != "auto"
        assert clone(est).get_params() == params
