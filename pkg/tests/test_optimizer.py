import math

import numpy as np
import pytest

from src.core.errors import InvalidValue, NoConvergence, NoSignChange, UnachievableLoss
from src.core.optimizer import (
    SWEEP_COLUMNS,
    TradeoffObjective,
    lagrange_root_fn,
    recover_params,
    solve_optimal,
    solve_root,
    sweep_ratios,
    sweep_to_csv,
    sweep_to_frame,
)
from src.core.scaling_law import (
    ModelConfig,
    chinchilla_baseline,
    chinchilla_loss,
    loss,
    tokens_for_loss,
)

# (chinchilla size, inference tokens, optimal params, optimal tokens, reduction)
COMPUTE_ROWS = [
    (1e9, 50e9, 633e6, 46.8e9, 0.091),
    (7e9, 200e9, 5.4e9, 367e9, 0.026),
    (13e9, 1e12, 8.32e9, 967e9, 0.085),
    (30e9, 5e12, 16.4e9, 3.27e12, 0.16),
    (70e9, 10e12, 41.6e9, 7.92e12, 0.12),
]


class TestTradeoffObjective:
    def test_compute_weights(self):
        obj = TradeoffObjective.compute(1e13)
        assert obj.per_token_weight == 6.0
        assert obj.per_param_weight == 2e13
        assert obj.rho == pytest.approx(1e13 / 3)

    def test_rejects_bad_weights(self):
        with pytest.raises(InvalidValue):
            TradeoffObjective(per_token_weight=0.0, per_param_weight=1.0)
        with pytest.raises(InvalidValue):
            TradeoffObjective(per_token_weight=6.0, per_param_weight=-1.0)

    def test_evaluate(self):
        obj = TradeoffObjective.compute(1e13)
        assert obj.evaluate(ModelConfig(70e9, 4.26e12)) == pytest.approx(3.19e24, rel=0.01)


class TestLagrangeRootFn:
    def test_data_term_coefficient(self, coefficients):
        g, _ = lagrange_root_fn(2.53, 0.0, coefficients)
        assert g(1.0) - (coefficients.E - 2.53) == pytest.approx(756.6, abs=0.5)

    def test_published_root(self, coefficients):
        g, _ = lagrange_root_fn(2.53, 50e9 / 3, coefficients)
        assert g(46.8e9) == pytest.approx(0.0, abs=0.005)

    def test_strictly_decreasing(self, coefficients):
        g, g_prime = lagrange_root_fn(2.0, 1e11, coefficients)
        values = [g(d) for d in np.geomspace(1e8, 1e14, 50)]
        assert all(later < earlier for earlier, later in zip(values, values[1:]))
        assert all(g_prime(d) < 0 for d in np.geomspace(1e8, 1e14, 50))

    def test_derivative_matches_finite_difference(self, coefficients):
        g, g_prime = lagrange_root_fn(2.0, 1e11, coefficients)
        d = 3e11
        h = d * 1e-6
        assert g_prime(d) == pytest.approx((g(d + h) - g(d - h)) / (2 * h), rel=1e-6)

    def test_rejects_unreachable_loss(self, coefficients):
        with pytest.raises(UnachievableLoss):
            lagrange_root_fn(coefficients.E, 1.0, coefficients)


class TestSolveRoot:
    def test_linear_function(self):
        root = solve_root(lambda d: 2.0 - d, lambda d: -1.0, hint=1.0)
        assert root == pytest.approx(2.0, abs=1e-10)

    def test_hint_above_root(self):
        root = solve_root(lambda d: 2.0 - d, lambda d: -1.0, hint=1000.0)
        assert root == pytest.approx(2.0, abs=1e-10)

    def test_no_sign_change(self):
        with pytest.raises(NoSignChange):
            solve_root(lambda d: 1.0 + 1.0 / d, lambda d: -1.0 / d ** 2, hint=1.0)

    def test_iteration_budget(self):
        g = lambda d: math.log(3.0) - math.log(d)
        with pytest.raises(NoConvergence):
            # A derivative of the wrong magnitude forces slow bisection steps.
            solve_root(g, lambda d: -1e-30, hint=1.0, rel_tol=1e-300, max_iter=3)

    def test_rejects_bad_hint(self):
        with pytest.raises(InvalidValue):
            solve_root(lambda d: 1.0 - d, lambda d: -1.0, hint=0.0)

    @pytest.mark.parametrize("size, demand, tokens", [(70e9, 1e13, 7.92e12), (30e9, 5e12, 3.27e12)])
    def test_published_roots(self, coefficients, size, demand, tokens):
        target = chinchilla_loss(size, coefficients)
        rho = demand / 3
        g, g_prime = lagrange_root_fn(target, rho, coefficients)
        hint = chinchilla_baseline(target, coefficients).train_tokens
        root = solve_root(g, g_prime, hint, residual_scale=target - coefficients.E)
        assert root == pytest.approx(tokens, rel=0.02)
        assert abs(g(root)) < 1e-10 * (target - coefficients.E)

    def test_zero_rho_root_is_baseline(self, coefficients):
        target = 2.2
        g, g_prime = lagrange_root_fn(target, 0.0, coefficients)
        root = solve_root(g, g_prime, hint=1e9, residual_scale=target - coefficients.E)
        baseline = chinchilla_baseline(target, coefficients)
        assert root == pytest.approx(baseline.train_tokens, rel=1e-6)


class TestRecoverParams:
    def test_published_rows(self, coefficients):
        assert recover_params(46.8e9, 50e9 / 3, coefficients) == pytest.approx(633e6, rel=0.02)
        assert recover_params(7.92e12, 1e13 / 3, coefficients) == pytest.approx(41.6e9, rel=0.02)

    def test_zero_rho_gives_baseline(self, coefficients):
        baseline = chinchilla_baseline(2.3, coefficients)
        assert recover_params(baseline.train_tokens, 0.0, coefficients) == pytest.approx(
            baseline.params, rel=1e-9
        )


class TestSolveOptimal:
    @pytest.mark.parametrize("size, demand, params, tokens, reduction", COMPUTE_ROWS)
    def test_compute_table_rows(self, coefficients, size, demand, params, tokens, reduction):
        plan = solve_optimal(
            chinchilla_loss(size, coefficients), TradeoffObjective.compute(demand), coefficients
        )
        assert plan.optimal.params == pytest.approx(params, rel=0.02)
        assert plan.optimal.train_tokens == pytest.approx(tokens, rel=0.02)
        assert plan.reduction_fraction == pytest.approx(reduction, abs=0.01)
        assert plan.baseline.params == pytest.approx(size, rel=1e-9)

    def test_seven_b_quality_narrative(self, coefficients):
        plan = solve_optimal(
            chinchilla_loss(7e9, coefficients), TradeoffObjective.compute(1e11), coefficients
        )
        assert plan.optimal.params == pytest.approx(6e9, rel=0.03)
        assert plan.optimal.train_tokens / plan.baseline.train_tokens == pytest.approx(1.18, rel=0.03)

    def test_thirty_b_quality_narrative(self, coefficients):
        plan = solve_optimal(
            chinchilla_loss(30e9, coefficients), TradeoffObjective.compute(1e13), coefficients
        )
        assert plan.optimal.params == pytest.approx(13.6e9, rel=0.03)
        assert plan.reduction_fraction == pytest.approx(0.28, abs=0.015)

    def test_zero_demand_echoes_baseline(self, coefficients):
        plan = solve_optimal(2.13, TradeoffObjective.compute(0.0), coefficients)
        assert plan.optimal == plan.baseline
        assert plan.reduction_fraction == 0.0
        assert plan.residual == 0.0

    def test_plan_stays_on_the_loss_contour(self, coefficients):
        plan = solve_optimal(2.05, TradeoffObjective.compute(1e12), coefficients)
        assert loss(plan.optimal, coefficients) == pytest.approx(2.05, rel=1e-9)
        assert plan.objective.evaluate(plan.optimal) == plan.objective_value

    def test_to_dict_round_trip(self, coefficients):
        plan = solve_optimal(1.96, TradeoffObjective.compute(5e12), coefficients)
        payload = plan.to_dict()
        assert payload["optimal_params"] == plan.optimal.params
        assert payload["reduction_fraction"] == plan.reduction_fraction
        assert payload["optimal_tokens_per_param"] == plan.optimal.tokens_per_param
        assert payload["rho"] == plan.objective.rho

    def test_unreachable_loss(self, coefficients):
        with pytest.raises(UnachievableLoss):
            solve_optimal(1.5, TradeoffObjective.compute(1e12), coefficients)

    def test_closed_form_equivalence_without_demand(self, coefficients, rng):
        obj = TradeoffObjective.compute(0.0)
        for target in rng.uniform(coefficients.E + 0.05, 4.0, size=1000):
            plan = solve_optimal(float(target), obj, coefficients)
            baseline = chinchilla_baseline(float(target), coefficients)
            assert plan.optimal.params == pytest.approx(baseline.params, rel=1e-6)
            assert plan.optimal.train_tokens == pytest.approx(baseline.train_tokens, rel=1e-6)

    def test_no_cheaper_point_on_the_contour(self, coefficients, rng):
        c = coefficients
        for _ in range(100):
            target = float(rng.uniform(c.E + 0.05, 4.0))
            rho = float(10 ** rng.uniform(6, 14))
            obj = TradeoffObjective(per_token_weight=1.0, per_param_weight=rho)
            plan = solve_optimal(target, obj, c)

            smallest = (c.A / (target - c.E)) ** (1.0 / c.alpha)
            for params in smallest * np.geomspace(1.0001, 1e4, 200):
                tokens = tokens_for_loss(float(params), target, c)
                value = obj.evaluate(ModelConfig(float(params), tokens))
                assert value >= plan.objective_value * (1.0 - 1e-9)

    def test_monotone_in_demand(self, coefficients, rng):
        demands = np.geomspace(1e6, 1e15, 50)
        for target in rng.uniform(coefficients.E + 0.05, 3.5, size=50):
            plans = [
                solve_optimal(float(target), TradeoffObjective.compute(float(d)), coefficients)
                for d in demands
            ]
            for before, after in zip(plans, plans[1:]):
                assert after.optimal.params <= before.optimal.params * (1 + 1e-9)
                assert after.optimal.train_tokens >= before.optimal.train_tokens * (1 - 1e-9)

    def test_stationarity_at_the_optimum(self, coefficients, rng):
        c = coefficients
        for _ in range(100):
            target = float(rng.uniform(c.E + 0.05, 4.0))
            rho = float(10 ** rng.uniform(6, 14))
            plan = solve_optimal(target, TradeoffObjective(1.0, rho), c)
            n, d = plan.optimal.params, plan.optimal.train_tokens
            params_side = c.A * n ** -c.alpha
            tokens_side = (c.beta * c.B / c.alpha) * (d ** -c.beta + rho * d ** (-c.beta - 1))
            assert abs(params_side - tokens_side) / params_side < 1e-6
            assert abs(loss(plan.optimal, c) - target) / target < 1e-8

    def test_identical_inputs_give_identical_plans(self, coefficients):
        for target, demand in ((1.96, 1e13), (2.53, 5e10), (2.2, 0.0)):
            first = solve_optimal(target, TradeoffObjective.compute(demand), coefficients)
            second = solve_optimal(target, TradeoffObjective.compute(demand), coefficients)
            assert first == second
            assert first.to_dict() == second.to_dict()


class TestSweep:
    def test_zero_demand_cells_are_unity(self, coefficients):
        cells = sweep_ratios([2.0, 2.5], [0.0], TradeoffObjective.compute, coefficients)
        for cell in cells:
            assert (cell.flops_ratio, cell.params_ratio, cell.tokens_ratio) == (1.0, 1.0, 1.0)

    def test_seven_b_cell(self, coefficients):
        (cell,) = sweep_ratios(
            [chinchilla_loss(7e9, coefficients)], [1e11], TradeoffObjective.compute, coefficients
        )
        assert cell.tokens_ratio == pytest.approx(1.18, abs=0.02)
        assert cell.params_ratio == pytest.approx(6 / 7, abs=0.02)

    def test_thirty_b_cell(self, coefficients):
        (cell,) = sweep_ratios(
            [chinchilla_loss(30e9, coefficients)], [1e13], TradeoffObjective.compute, coefficients
        )
        assert cell.flops_ratio == pytest.approx(0.72, abs=0.02)
        assert cell.optimal_params == pytest.approx(13.6e9, rel=0.03)

    def test_invalid_cells_do_not_abort(self, coefficients):
        cells = sweep_ratios([1.0, 2.0], [1e12], TradeoffObjective.compute, coefficients)
        assert [cell.valid for cell in cells] == [False, True]
        assert "irreducible" in cells[0].error
        assert cells[0].flops_ratio is None

        csv_text = sweep_to_csv(cells)
        header, bad_row, good_row = csv_text.strip().splitlines()
        assert header == ",".join(SWEEP_COLUMNS)
        assert bad_row.split(",")[2:5] == ["NA", "NA", "NA"]
        assert "NA" not in good_row

    def test_row_major_order(self, coefficients):
        cells = sweep_ratios([2.0, 2.5], [0.0, 1e12, 1e13], TradeoffObjective.compute, coefficients)
        assert [(cell.loss, cell.demand) for cell in cells] == [
            (2.0, 0.0), (2.0, 1e12), (2.0, 1e13), (2.5, 0.0), (2.5, 1e12), (2.5, 1e13),
        ]

    def test_empty_grid(self, coefficients):
        with pytest.raises(InvalidValue):
            sweep_ratios([], [1.0], TradeoffObjective.compute, coefficients)

    def test_full_grid_integrity(self, coefficients):
        losses = [chinchilla_loss(float(s), coefficients) for s in np.geomspace(1e9, 70e9, 100)]
        demands = [float(d) for d in np.geomspace(1e9, 1e15, 100)]
        frame = sweep_to_frame(
            sweep_ratios(losses, demands, TradeoffObjective.compute, coefficients)
        )
        assert len(frame) == 10_000
        assert not frame.isna().any().any()
        assert (frame["flops_ratio"] <= 1.0 + 1e-12).all()
        assert (frame["flops_ratio"] > 0.0).all()
        assert (frame["params_ratio"] <= 1.0 + 1e-9).all()
        assert (frame["tokens_ratio"] >= 1.0 - 1e-9).all()
