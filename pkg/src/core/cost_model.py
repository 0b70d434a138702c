"""
Dollar-cost objective: device prices, peak throughput, utilization and demand.

Training costs ``6*N*D * C_tr / U_tr``; inference costs
``2*N * C_inf * (D_inp / U_inp + D_out / U_out)`` where C is the price of one
operation at full utilization. Inference precision enters only through the
inference peak throughput (the INT8 rate by default).
"""

import logging
import math
from dataclasses import asdict, dataclass
from typing import Any, Dict, Mapping, Optional, Tuple

from src.core.errors import ConfigError, InvalidValue
from src.core.optimizer import OptimalPlan, TradeoffObjective, solve_optimal
from src.core.scaling_law import Coefficients, ModelConfig
from src.utils.file_loader import load_json_document

logger = logging.getLogger(__name__)

SECONDS_PER_HOUR = 3600.0
DEFAULT_REQUEST_SHAPE = (70.0, 215.0)


def _positive(name: str, value: float) -> float:
    value = float(value)
    if not (math.isfinite(value) and value > 0):
        raise InvalidValue(f"{name} must be positive, got {value}")
    return value


def _nonnegative(name: str, value: float) -> float:
    value = float(value)
    if not (math.isfinite(value) and value >= 0):
        raise InvalidValue(f"{name} must be nonnegative, got {value}")
    return value


def _fraction(name: str, value: float) -> float:
    value = float(value)
    if not (math.isfinite(value) and 0 < value <= 1):
        raise InvalidValue(f"{name} must lie in (0, 1], got {value}")
    return value


@dataclass(frozen=True)
class HardwareProfile:
    """Device-hour prices (USD) and peak operations per second."""

    train_price_per_hour: float
    train_peak_ops: float
    inf_price_per_hour: float
    inf_peak_ops: float

    def __post_init__(self):
        for key, value in asdict(self).items():
            object.__setattr__(self, key, _positive(key, value))

    @classmethod
    def default(cls) -> "HardwareProfile":
        # Training: A100-80GB, dense BF16. Inference: A100-40GB, INT8.
        return cls(
            train_price_per_hour=1.50,
            train_peak_ops=3.12e14,
            inf_price_per_hour=1.10,
            inf_peak_ops=6.24e14,
        )

    @property
    def train_cost_per_op(self) -> float:
        return cost_per_op(self.train_price_per_hour, self.train_peak_ops)

    @property
    def inf_cost_per_op(self) -> float:
        return cost_per_op(self.inf_price_per_hour, self.inf_peak_ops)


@dataclass(frozen=True)
class MfuProfile:
    """Model FLOPs utilization for training, prompt processing and generation."""

    train_mfu: float = 0.5
    input_mfu: float = 0.5
    output_mfu: float = 0.01

    def __post_init__(self):
        for key, value in asdict(self).items():
            object.__setattr__(self, key, _fraction(key, value))


@dataclass(frozen=True)
class InferenceDemand:
    """Lifetime request volume and the average request shape."""

    requests: float
    input_tokens_per_request: float = DEFAULT_REQUEST_SHAPE[0]
    output_tokens_per_request: float = DEFAULT_REQUEST_SHAPE[1]

    def __post_init__(self):
        for key, value in asdict(self).items():
            object.__setattr__(self, key, _nonnegative(key, value))

    @classmethod
    def from_totals(cls, total_input: float, total_output: float) -> "InferenceDemand":
        """Raw lifetime token counts, expressed as a single aggregate request."""
        return cls(
            requests=1.0,
            input_tokens_per_request=total_input,
            output_tokens_per_request=total_output,
        )

    @classmethod
    def from_total_tokens(
            cls,
            total_tokens: float,
            shape: Tuple[float, float] = DEFAULT_REQUEST_SHAPE,
    ) -> "InferenceDemand":
        """Requests implied by a lifetime token volume at the given request shape."""
        input_tokens, output_tokens = shape
        per_request = _positive("tokens per request", input_tokens + output_tokens)
        return cls(
            requests=_nonnegative("total_tokens", total_tokens) / per_request,
            input_tokens_per_request=input_tokens,
            output_tokens_per_request=output_tokens,
        )

    def with_requests(self, requests: float) -> "InferenceDemand":
        return InferenceDemand(
            requests=requests,
            input_tokens_per_request=self.input_tokens_per_request,
            output_tokens_per_request=self.output_tokens_per_request,
        )

    @property
    def total_input(self) -> float:
        return self.requests * self.input_tokens_per_request

    @property
    def total_output(self) -> float:
        return self.requests * self.output_tokens_per_request

    @property
    def total_tokens(self) -> float:
        return self.total_input + self.total_output


@dataclass(frozen=True)
class CostBreakdown:
    train_cost: float
    input_cost: float
    output_cost: float
    total_cost: float


@dataclass(frozen=True)
class CostPlan:
    plan: OptimalPlan
    train_cost: float
    input_cost: float
    output_cost: float
    total_cost: float
    baseline_total_cost: float
    savings_fraction: float
    baseline_breakdown: CostBreakdown

    def to_dict(self) -> Dict[str, Any]:
        payload = self.plan.to_dict()
        payload.update(
            train_cost=self.train_cost,
            input_cost=self.input_cost,
            output_cost=self.output_cost,
            total_cost=self.total_cost,
            baseline_train_cost=self.baseline_breakdown.train_cost,
            baseline_input_cost=self.baseline_breakdown.input_cost,
            baseline_output_cost=self.baseline_breakdown.output_cost,
            baseline_total_cost=self.baseline_total_cost,
            savings_fraction=self.savings_fraction,
        )
        return payload


@dataclass(frozen=True)
class CostConfig:
    hardware: HardwareProfile
    mfu: MfuProfile
    demand: InferenceDemand

    @classmethod
    def default(cls) -> "CostConfig":
        return cls(
            hardware=HardwareProfile.default(),
            mfu=MfuProfile(),
            demand=InferenceDemand(requests=0.0),
        )


def cost_per_op(price_per_hour: float, peak_ops: float) -> float:
    """USD per operation at full utilization."""
    return _positive("price_per_hour", price_per_hour) / (
        SECONDS_PER_HOUR * _positive("peak_ops", peak_ops)
    )


def cost_objective(
        hw: HardwareProfile, mfu: MfuProfile, demand: InferenceDemand
) -> TradeoffObjective:
    """Objective weights in USD: per parameter per training token, and per parameter."""
    per_token = 6.0 * hw.train_cost_per_op / mfu.train_mfu
    per_param = 2.0 * hw.inf_cost_per_op * (
        demand.total_input / mfu.input_mfu + demand.total_output / mfu.output_mfu
    )
    return TradeoffObjective(per_token_weight=per_token, per_param_weight=per_param)


def evaluate_cost(
        cfg: ModelConfig, hw: HardwareProfile, mfu: MfuProfile, demand: InferenceDemand
) -> CostBreakdown:
    """Dollar cost of training ``cfg`` and serving ``demand`` with it."""
    train_cost = 6.0 * cfg.params * cfg.train_tokens * hw.train_cost_per_op / mfu.train_mfu
    input_cost = 2.0 * cfg.params * demand.total_input * hw.inf_cost_per_op / mfu.input_mfu
    output_cost = 2.0 * cfg.params * demand.total_output * hw.inf_cost_per_op / mfu.output_mfu
    return CostBreakdown(
        train_cost=train_cost,
        input_cost=input_cost,
        output_cost=output_cost,
        total_cost=train_cost + input_cost + output_cost,
    )


def solve_cost_optimal(
        target_loss: float,
        hw: HardwareProfile,
        mfu: MfuProfile,
        demand: InferenceDemand,
        c: Coefficients,
) -> CostPlan:
    """
    Cheapest configuration reaching ``target_loss`` for the given demand.

    Raises:
        UnachievableLoss: target_loss <= E
        NoConvergence: the root finder gave up
    """
    plan = solve_optimal(target_loss, cost_objective(hw, mfu, demand), c)
    optimal = evaluate_cost(plan.optimal, hw, mfu, demand)
    baseline = evaluate_cost(plan.baseline, hw, mfu, demand)
    savings = 1.0 - optimal.total_cost / baseline.total_cost
    logger.debug(
        "Cost plan at loss %.6g: %.4g USD vs baseline %.4g USD", target_loss,
        optimal.total_cost, baseline.total_cost,
    )
    return CostPlan(
        plan=plan,
        train_cost=optimal.train_cost,
        input_cost=optimal.input_cost,
        output_cost=optimal.output_cost,
        total_cost=optimal.total_cost,
        baseline_total_cost=baseline.total_cost,
        savings_fraction=max(savings, 0.0),
        baseline_breakdown=baseline,
    )


def _check_number(section: str, field_name: str, value: Any) -> None:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"config field {section}.{field_name} must be a number, got {value!r}")


def _section(document: Mapping[str, Any], key: str, default: Any) -> Any:
    """Overlay one config section on its default; unspecified fields are kept."""
    section = document.get(key)
    if section is None:
        return default
    if not isinstance(section, dict):
        raise ConfigError(f"config section {key!r} must be a JSON object")
    unknown = set(section) - set(asdict(default))
    if unknown:
        raise ConfigError(f"config section {key!r}: unknown fields {', '.join(sorted(unknown))}")
    for field_name, value in section.items():
        _check_number(key, field_name, value)
    return type(default)(**{**asdict(default), **section})


def cost_config_from_dict(document: Mapping[str, Any]) -> CostConfig:
    """Build a CostConfig; absent sections keep their defaults."""
    unknown = set(document) - {"hardware", "mfu", "demand"}
    if unknown:
        raise ConfigError(f"unknown config sections: {', '.join(sorted(unknown))}")
    defaults = CostConfig.default()
    demand_section = document.get("demand")
    if isinstance(demand_section, dict) and (
            "total_input" in demand_section or "total_output" in demand_section
    ):
        if set(demand_section) - {"total_input", "total_output"}:
            raise ConfigError(
                "config section 'demand': raw totals cannot be mixed with request fields"
            )
        for field_name, value in demand_section.items():
            _check_number("demand", field_name, value)
        document = dict(document)
        totals = InferenceDemand.from_totals(
            total_input=demand_section.get("total_input", 0.0),
            total_output=demand_section.get("total_output", 0.0),
        )
        document["demand"] = asdict(totals)
    return CostConfig(
        hardware=_section(document, "hardware", defaults.hardware),
        mfu=_section(document, "mfu", defaults.mfu),
        demand=_section(document, "demand", defaults.demand),
    )


def load_cost_config(file_path: Optional[str]) -> CostConfig:
    """Load the hardware/mfu/demand document at ``file_path`` (defaults when None)."""
    if file_path is None:
        return CostConfig.default()
    config = cost_config_from_dict(load_json_document(file_path))
    logger.info("Loaded cost config from %s", file_path)
    return config
