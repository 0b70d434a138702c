import json
import math

import numpy as np
import pytest

from src.core.errors import ConfigError, InvalidValue, PlannerError, UnachievableLoss
from src.core.scaling_law import (
    Coefficients,
    ModelConfig,
    chinchilla_baseline,
    chinchilla_baseline_for_params,
    chinchilla_loss,
    flop_account,
    load_presets,
    loss,
    params_for_loss,
    resolve_coefficients,
    tokens_for_loss,
)


@pytest.mark.parametrize(
    "params, tokens, expected",
    [(70e9, 4.26e12, 1.89), (1e9, 27.4e9, 2.53)],
)
def test_loss_matches_published_rows(coefficients, params, tokens, expected):
    assert loss(ModelConfig(params, tokens), coefficients) == pytest.approx(expected, abs=0.005)


def test_loss_decreases_in_both_arguments(coefficients):
    base = loss(ModelConfig(7e9, 1e12), coefficients)
    assert loss(ModelConfig(14e9, 1e12), coefficients) < base
    assert loss(ModelConfig(7e9, 2e12), coefficients) < base
    assert base > coefficients.E


@pytest.mark.parametrize("params, tokens", [(70e9, 4.26e12), (13e9, 577e9), (1e9, 27.4e9)])
def test_inversions_round_trip(coefficients, params, tokens):
    target = loss(ModelConfig(params, tokens), coefficients)
    assert tokens_for_loss(params, target, coefficients) == pytest.approx(tokens, rel=1e-9)
    assert params_for_loss(tokens, target, coefficients) == pytest.approx(params, rel=1e-9)


def test_loss_monotone_on_random_grid(coefficients, rng):
    for params, tokens in zip(10 ** rng.uniform(7, 12, 200), 10 ** rng.uniform(8, 14, 200)):
        base = loss(ModelConfig(float(params), float(tokens)), coefficients)
        assert loss(ModelConfig(float(params) * 1.01, float(tokens)), coefficients) < base
        assert loss(ModelConfig(float(params), float(tokens) * 1.01), coefficients) < base


def test_inversions_round_trip_on_random_grid(coefficients, rng):
    for params, tokens in zip(10 ** rng.uniform(7, 12, 200), 10 ** rng.uniform(8, 14, 200)):
        params, tokens = float(params), float(tokens)
        target = loss(ModelConfig(params, tokens), coefficients)
        assert tokens_for_loss(params, target, coefficients) == pytest.approx(tokens, rel=1e-9)
        assert params_for_loss(tokens, target, coefficients) == pytest.approx(params, rel=1e-9)


def test_params_for_loss_published_rows(coefficients):
    # Rounded published losses are close enough on the parameter side.
    assert params_for_loss(27.4e9, 2.53, coefficients) == pytest.approx(1e9, rel=0.02)


@pytest.mark.parametrize(
    "call",
    [
        lambda c: tokens_for_loss(1e9, 1.69, c),
        lambda c: params_for_loss(1e12, 1.69, c),
        lambda c: tokens_for_loss(1e6, 1.70, c),
        lambda c: chinchilla_baseline(1.69, c),
        lambda c: chinchilla_baseline(1.0, c),
    ],
)
def test_unreachable_losses_raise(coefficients, call):
    with pytest.raises(UnachievableLoss):
        call(coefficients)


def test_flop_account_published_totals():
    assert flop_account(ModelConfig(70e9, 4.26e12), 1e13).total_flops == pytest.approx(
        3.19e24, rel=0.01
    )
    assert flop_account(ModelConfig(41.6e9, 7.92e12), 1e13).total_flops == pytest.approx(
        2.81e24, rel=0.01
    )


def test_flop_account_without_inference():
    account = flop_account(ModelConfig(7e9, 1e12), 0.0)
    assert account.inference_flops == 0.0
    assert account.total_flops == account.train_flops == 6.0 * 7e9 * 1e12


def test_flop_account_rejects_negative_demand():
    with pytest.raises(InvalidValue):
        flop_account(ModelConfig(7e9, 1e12), -1.0)


@pytest.mark.parametrize("params, tokens", [(70e9, 4.26e12), (1e9, 27.4e9), (13e9, 577e9)])
def test_chinchilla_baseline_matches_published_columns(coefficients, params, tokens):
    cfg = chinchilla_baseline(chinchilla_loss(params, coefficients), coefficients)
    assert cfg.params == pytest.approx(params, rel=1e-9)
    assert cfg.train_tokens == pytest.approx(tokens, rel=0.02)


def test_chinchilla_baseline_from_rounded_loss(coefficients):
    cfg = chinchilla_baseline(2.53, coefficients)
    assert cfg.params == pytest.approx(1e9, rel=0.02)
    assert cfg.train_tokens == pytest.approx(27.4e9, rel=0.02)


def test_chinchilla_baseline_splits_reducible_loss(coefficients):
    c = coefficients
    target = 2.1
    cfg = chinchilla_baseline(target, c)
    data_term = c.B / cfg.train_tokens ** c.beta
    assert data_term / (target - c.E) == pytest.approx(c.alpha / (c.alpha + c.beta), rel=1e-12)
    assert loss(cfg, c) == pytest.approx(target, rel=1e-12)


def test_chinchilla_baseline_is_stationary(coefficients, rng):
    c = coefficients
    for target in rng.uniform(c.E + 0.05, 4.0, size=100):
        cfg = chinchilla_baseline(float(target), c)
        params_side = c.alpha * c.A * cfg.params ** -c.alpha
        tokens_side = c.beta * c.B * cfg.train_tokens ** -c.beta
        assert abs(params_side - tokens_side) / params_side < 1e-6


def test_no_cheaper_training_run_on_the_contour(coefficients, rng):
    c = coefficients
    target = float(rng.uniform(c.E + 0.1, 3.0))
    cfg = chinchilla_baseline(target, c)
    best = 6.0 * cfg.params * cfg.train_tokens
    for factor in np.geomspace(0.2, 5.0, 100):
        params = cfg.params * float(factor)
        tokens = tokens_for_loss(params, target, c)
        assert 6.0 * params * tokens >= best * (1.0 - 1e-12)


def test_chinchilla_baseline_for_params(coefficients):
    cfg = chinchilla_baseline_for_params(30e9, coefficients)
    assert cfg.params == pytest.approx(30e9, rel=1e-9)
    assert cfg.train_tokens == pytest.approx(1.56e12, rel=0.02)


def test_chinchilla_loss_is_decreasing(coefficients):
    losses = [chinchilla_loss(size, coefficients) for size in (1e9, 7e9, 30e9, 70e9)]
    assert losses == sorted(losses, reverse=True)
    assert all(value > coefficients.E for value in losses)


class TestCoefficients:
    def test_default_values(self):
        c = Coefficients.default()
        assert (c.A, c.B, c.E, c.alpha, c.beta) == (406.4, 410.7, 1.69, 0.336, 0.283)

    @pytest.mark.parametrize(
        "overrides",
        [{"A": 0.0}, {"B": -1.0}, {"E": -0.1}, {"alpha": 0.0}, {"beta": 2.0}, {"A": math.nan}],
    )
    def test_invalid_values(self, overrides):
        values = {**Coefficients.default().to_dict(), **overrides}
        with pytest.raises(InvalidValue):
            Coefficients(**values)

    def test_invalid_value_is_value_error_and_planner_error(self):
        with pytest.raises(ValueError):
            Coefficients(A=-1.0, B=1.0, E=1.0, alpha=0.3, beta=0.3)
        assert issubclass(InvalidValue, PlannerError)

    def test_json_round_trip(self, tmp_path):
        c = Coefficients(A=17.07, B=35.8, E=0.95, alpha=0.13, beta=0.16)
        path = tmp_path / "fitted.json"
        path.write_text(c.to_json(), encoding="utf-8")
        assert resolve_coefficients(str(path)) == c

    def test_from_dict_missing_key(self):
        with pytest.raises(ConfigError, match="beta"):
            Coefficients.from_dict({"A": 1.0, "B": 1.0, "E": 1.0, "alpha": 0.3})

    def test_from_dict_rejects_non_numbers(self):
        values = {**Coefficients.default().to_dict(), "alpha": "0.3"}
        with pytest.raises(ConfigError):
            Coefficients.from_dict(values)
        values = {**Coefficients.default().to_dict(), "E": True}
        with pytest.raises(ConfigError):
            Coefficients.from_dict(values)

    def test_document_rejects_nan(self, tmp_path):
        path = tmp_path / "fitted.json"
        path.write_text('{"A": NaN, "B": 1, "E": 1, "alpha": 0.3, "beta": 0.3}', encoding="utf-8")
        with pytest.raises(ConfigError):
            resolve_coefficients(str(path))


def test_model_config_rejects_non_positive():
    with pytest.raises(InvalidValue):
        ModelConfig(params=0.0, train_tokens=1e9)
    with pytest.raises(InvalidValue):
        ModelConfig(params=1e9, train_tokens=math.inf)


def test_presets():
    presets = load_presets()
    assert set(presets) >= {"chinchilla", "le100", "le250", "le500", "all-data"}
    assert presets["chinchilla"] == Coefficients.default()
    assert presets["le100"].alpha == 0.08
    assert presets["all-data"].E == 1.45


def test_resolve_coefficients(tmp_path):
    assert resolve_coefficients(None) == Coefficients.default()
    assert resolve_coefficients("le250").beta == 0.16

    path = tmp_path / "fitted.json"
    path.write_text(json.dumps({"A": 10, "B": 20, "E": 1.5, "alpha": 0.2, "beta": 0.25}))
    assert resolve_coefficients(str(path)) == Coefficients(
        A=10.0, B=20.0, E=1.5, alpha=0.2, beta=0.25
    )

    with pytest.raises(OSError):
        resolve_coefficients(str(tmp_path / "missing.json"))
