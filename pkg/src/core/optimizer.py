"""
Inference-adjusted optimal (N, D) under a fixed-loss constraint.

The objective is ``a*N*D + b*N``: training cost grows with N*D, lifetime
inference cost with N alone. Eliminating the Lagrange multiplier leaves a
single equation g(D) = 0 in the training tokens, with rho = b/a:

    g(D) = (E - l) + (beta*B/alpha + B) * D^-beta + rho * (beta*B/alpha) * D^(-beta-1)

g is strictly decreasing on D > 0, so the root is unique. It is found with a
Newton iteration in x = ln(D), bracketed and falling back to bisection.
Both the FLOP objective (a=6, b=2*D_inf) and the dollar objective share it.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, Iterable, List, Optional, Tuple

import pandas as pd

from src.core.errors import InvalidValue, NoConvergence, NoSignChange, PlannerError
from src.core.scaling_law import (
    Coefficients,
    ModelConfig,
    require_above_asymptote,
    chinchilla_baseline,
)

logger = logging.getLogger(__name__)

RootFn = Callable[[float], float]

ROOT_REL_TOL = 1e-10
ROOT_MAX_ITER = 200
BRACKET_GROWTH = 4.0
BRACKET_MAX_STEPS = 200
BRACKET_REL_WIDTH = 1e-12

SWEEP_COLUMNS = [
    "loss",
    "demand",
    "flops_ratio",
    "params_ratio",
    "tokens_ratio",
    "optimal_params",
    "optimal_tokens",
    "baseline_params",
    "baseline_tokens",
]


@dataclass(frozen=True)
class TradeoffObjective:
    """Objective weights: ``per_token_weight * N * D + per_param_weight * N``."""

    per_token_weight: float
    per_param_weight: float
    rho: float = field(init=False)

    def __post_init__(self):
        a = float(self.per_token_weight)
        b = float(self.per_param_weight)
        if not (math.isfinite(a) and a > 0):
            raise InvalidValue(f"per_token_weight must be positive, got {a}")
        if not (math.isfinite(b) and b >= 0):
            raise InvalidValue(f"per_param_weight must be nonnegative, got {b}")
        object.__setattr__(self, "per_token_weight", a)
        object.__setattr__(self, "per_param_weight", b)
        object.__setattr__(self, "rho", b / a)

    @classmethod
    def compute(cls, inference_tokens: float) -> "TradeoffObjective":
        """Total FLOPs: 6 per parameter per training token, 2 per parameter per inference token."""
        return cls(per_token_weight=6.0, per_param_weight=2.0 * inference_tokens)

    def evaluate(self, cfg: ModelConfig) -> float:
        return (
            self.per_token_weight * cfg.params * cfg.train_tokens
            + self.per_param_weight * cfg.params
        )


@dataclass(frozen=True)
class OptimalPlan:
    optimal: ModelConfig
    target_loss: float
    objective_value: float
    baseline: ModelConfig
    baseline_objective: float
    reduction_fraction: float
    residual: float
    objective: TradeoffObjective

    def to_dict(self) -> Dict[str, Any]:
        return {
            "target_loss": self.target_loss,
            "optimal_params": self.optimal.params,
            "optimal_tokens": self.optimal.train_tokens,
            "optimal_tokens_per_param": self.optimal.tokens_per_param,
            "objective_value": self.objective_value,
            "baseline_params": self.baseline.params,
            "baseline_tokens": self.baseline.train_tokens,
            "baseline_tokens_per_param": self.baseline.tokens_per_param,
            "baseline_objective": self.baseline_objective,
            "reduction_fraction": self.reduction_fraction,
            "residual": self.residual,
            "per_token_weight": self.objective.per_token_weight,
            "per_param_weight": self.objective.per_param_weight,
            "rho": self.objective.rho,
        }


def lagrange_root_fn(
        target_loss: float, rho: float, c: Coefficients
) -> Tuple[RootFn, RootFn]:
    """
    Root equation for the optimal training tokens and its exact derivative.

    Raises:
        UnachievableLoss: target_loss <= E
    """
    target_loss = require_above_asymptote(target_loss, c)
    rho = float(rho)
    if not (math.isfinite(rho) and rho >= 0):
        raise InvalidValue(f"rho must be nonnegative, got {rho}")

    offset = c.E - target_loss
    data_weight = c.beta * c.B / c.alpha
    leading = data_weight + c.B
    beta = c.beta

    def g(tokens: float) -> float:
        power = tokens ** -beta
        return offset + leading * power + rho * data_weight * power / tokens

    def g_prime(tokens: float) -> float:
        power = tokens ** -beta
        return (
            -beta * leading * power / tokens
            - rho * data_weight * (beta + 1.0) * power / (tokens * tokens)
        )

    return g, g_prime


def _bracket_log(g: RootFn, x0: float, f0: float) -> Tuple[float, float]:
    """Expand geometrically from ``x0`` until g changes sign; returns (x_pos, x_neg)."""
    step = math.log(BRACKET_GROWTH)
    direction = 1.0 if f0 > 0 else -1.0
    anchor = x0
    for expansion in range(1, BRACKET_MAX_STEPS + 1):
        probe = x0 + direction * step * expansion
        value = g(math.exp(probe))
        if math.isnan(value):
            break
        if (value > 0) != (f0 > 0) or value == 0:
            logger.debug("Bracketed root after %d expansions", expansion)
            return (anchor, probe) if f0 > 0 else (probe, anchor)
        anchor = probe
    raise NoSignChange(
        f"no sign change within {BRACKET_MAX_STEPS} x{BRACKET_GROWTH:g} steps of {math.exp(x0):.4g}"
    )


def solve_root(
        g: RootFn,
        g_prime: RootFn,
        hint: float,
        residual_scale: float = 1.0,
        rel_tol: float = ROOT_REL_TOL,
        max_iter: int = ROOT_MAX_ITER,
) -> float:
    """
    Positive root of a strictly decreasing ``g`` starting from ``hint``.

    Newton steps are taken in log-space and replaced by bisection whenever
    they would leave the current bracket. Stops once ``|g| < rel_tol *
    residual_scale`` or the bracket shrinks below 1e-12 relative width.

    Raises:
        NoSignChange: bracketing failed
        NoConvergence: ``max_iter`` iterations without meeting the tolerance
    """
    hint = float(hint)
    if not (math.isfinite(hint) and hint > 0):
        raise InvalidValue(f"hint must be positive, got {hint}")
    tolerance = rel_tol * abs(residual_scale)

    x = math.log(hint)
    f = g(hint)
    if abs(f) < tolerance:
        return hint
    x_pos, x_neg = _bracket_log(g, x, f)

    for iteration in range(max_iter):
        tokens = math.exp(x)
        f = g(tokens)
        if abs(f) < tolerance:
            logger.debug("Root %.6g after %d iterations (residual %.3g)", tokens, iteration, f)
            return tokens
        if f > 0:
            x_pos = x
        else:
            x_neg = x
        if abs(x_neg - x_pos) < BRACKET_REL_WIDTH:
            return tokens

        slope = g_prime(tokens) * tokens
        x_next = x - f / slope if slope != 0 and math.isfinite(slope) else math.nan
        low, high = min(x_pos, x_neg), max(x_pos, x_neg)
        if not low < x_next < high:
            x_next = 0.5 * (low + high)
        x = x_next

    raise NoConvergence(
        f"root finder did not converge in {max_iter} iterations "
        f"(last residual {f:.3g}, bracket [{math.exp(min(x_pos, x_neg)):.6g}, "
        f"{math.exp(max(x_pos, x_neg)):.6g}])"
    )


def recover_params(root_tokens: float, rho: float, c: Coefficients) -> float:
    """Parameter count that satisfies the stationarity condition at ``root_tokens``."""
    root_tokens = float(root_tokens)
    if not (math.isfinite(root_tokens) and root_tokens > 0):
        raise InvalidValue(f"root_tokens must be positive, got {root_tokens}")
    power = root_tokens ** -c.beta
    params_term = (c.beta * c.B / c.alpha) * (power + rho * power / root_tokens)
    return (c.A / params_term) ** (1.0 / c.alpha)


def solve_optimal(
        target_loss: float, obj: TradeoffObjective, c: Coefficients
) -> OptimalPlan:
    """
    Minimize ``obj`` over configurations whose loss equals ``target_loss``.

    Raises:
        UnachievableLoss: target_loss <= E
        NoConvergence: the root finder gave up
    """
    target_loss = require_above_asymptote(target_loss, c)
    baseline = chinchilla_baseline(target_loss, c)
    baseline_objective = obj.evaluate(baseline)

    if obj.rho == 0:
        optimal, residual = baseline, 0.0
    else:
        g, g_prime = lagrange_root_fn(target_loss, obj.rho, c)
        tokens = solve_root(
            g, g_prime, baseline.train_tokens, residual_scale=target_loss - c.E
        )
        optimal = ModelConfig(params=recover_params(tokens, obj.rho, c), train_tokens=tokens)
        residual = g(tokens)

    objective_value = obj.evaluate(optimal)
    if objective_value > baseline_objective:
        # Only reachable at round-off level for rho close to zero.
        optimal, objective_value = baseline, baseline_objective

    return OptimalPlan(
        optimal=optimal,
        target_loss=target_loss,
        objective_value=objective_value,
        baseline=baseline,
        baseline_objective=baseline_objective,
        reduction_fraction=1.0 - objective_value / baseline_objective,
        residual=residual,
        objective=obj,
    )


@dataclass(frozen=True)
class SweepCell:
    loss: float
    demand: float
    flops_ratio: Optional[float] = None
    params_ratio: Optional[float] = None
    tokens_ratio: Optional[float] = None
    optimal_params: Optional[float] = None
    optimal_tokens: Optional[float] = None
    baseline_params: Optional[float] = None
    baseline_tokens: Optional[float] = None
    error: Optional[str] = None

    @property
    def valid(self) -> bool:
        return self.error is None


def _sweep_cell(
        target_loss: float,
        demand: float,
        obj_builder: Callable[[float], TradeoffObjective],
        c: Coefficients,
) -> SweepCell:
    try:
        plan = solve_optimal(target_loss, obj_builder(demand), c)
    except PlannerError as exc:
        logger.warning("Sweep cell (loss=%g, demand=%g) invalid: %s", target_loss, demand, exc)
        return SweepCell(loss=target_loss, demand=demand, error=str(exc))
    return SweepCell(
        loss=target_loss,
        demand=demand,
        flops_ratio=plan.objective_value / plan.baseline_objective,
        params_ratio=plan.optimal.params / plan.baseline.params,
        tokens_ratio=plan.optimal.train_tokens / plan.baseline.train_tokens,
        optimal_params=plan.optimal.params,
        optimal_tokens=plan.optimal.train_tokens,
        baseline_params=plan.baseline.params,
        baseline_tokens=plan.baseline.train_tokens,
    )


def sweep_ratios(
        loss_grid: Iterable[float],
        demand_grid: Iterable[float],
        obj_builder: Callable[[float], TradeoffObjective],
        c: Coefficients,
) -> List[SweepCell]:
    """
    Optimal-to-baseline ratios for every (loss, demand) cell, row-major by loss.

    Cells are independent; a failing cell is marked invalid instead of
    aborting the sweep.
    """
    losses = [float(v) for v in loss_grid]
    demands = [float(v) for v in demand_grid]
    if not losses or not demands:
        raise InvalidValue("sweep grids must be non-empty")

    cells = [
        _sweep_cell(target_loss, demand, obj_builder, c)
        for target_loss in losses
        for demand in demands
    ]
    invalid = sum(1 for cell in cells if not cell.valid)
    logger.info("Swept %d cells (%d invalid)", len(cells), invalid)
    return cells


def sweep_to_frame(cells: Iterable[SweepCell]) -> pd.DataFrame:
    """Tabulate sweep cells in CSV column order; invalid cells hold NaN."""
    rows = [
        {column: getattr(cell, column) for column in SWEEP_COLUMNS} for cell in cells
    ]
    return pd.DataFrame(rows, columns=SWEEP_COLUMNS, dtype=float)


def sweep_to_csv(cells: Iterable[SweepCell]) -> str:
    return sweep_to_frame(cells).to_csv(index=False, na_rep="NA")
