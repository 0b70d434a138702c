"""
Fit the five loss-law coefficients to observed training runs.

The law is fitted in log space: with A, B, E = exp(a), exp(b), exp(e),

    log L_hat = LSE(a - alpha*log N, b - beta*log D, e)

and the Huber loss of ``log L_hat - log L`` is summed over runs and minimized
by L-BFGS-B from every point of a starting grid. The lowest objective among
converged starts wins; ties go to the earliest grid start.
"""

import enum
import itertools
import logging
import math
from dataclasses import dataclass, field
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy.optimize import OptimizeResult, minimize

from src.core.errors import (
    InsufficientData,
    InvalidValue,
    NoConvergence,
    RunLogError,
)
from src.core.scaling_law import Coefficients
from src.utils.file_loader import load_csv_frame

logger = logging.getLogger(__name__)

RUN_LOG_COLUMNS = ("params", "tokens", "loss")
PROTOCOL_THRESHOLDS = (100.0, 250.0, 500.0, math.inf)
MIN_RUNS = 6


class FitStatus(enum.Enum):
    """Outcome of one grid start. Only CONVERGED starts can win a fit."""

    CONVERGED = "converged"
    MAX_ITER = "max_iter"
    STALLED = "stalled"
    """Line search failed or the optimizer reported another abnormal stop."""

    DIVERGED = "diverged"
    """Objective or parameters became non-finite."""

    @classmethod
    def from_result(cls, result: OptimizeResult) -> "FitStatus":
        if not (np.isfinite(result.fun) and np.all(np.isfinite(result.x))):
            return cls.DIVERGED
        if result.success:
            return cls.CONVERGED
        if result.status == 1:
            return cls.MAX_ITER
        return cls.STALLED


@dataclass(frozen=True)
class StartOutcome:
    index: int
    objective_value: float
    status: FitStatus
    coefficients: Optional[Coefficients]


@dataclass(frozen=True)
class TrainingRun:
    params: float
    train_tokens: float
    final_loss: float

    def __post_init__(self):
        for key in ("params", "train_tokens", "final_loss"):
            value = float(getattr(self, key))
            if not (math.isfinite(value) and value > 0):
                raise InvalidValue(f"{key} must be positive and finite, got {value}")
            object.__setattr__(self, key, value)

    @property
    def tokens_per_param(self) -> float:
        return self.train_tokens / self.params


@dataclass(frozen=True)
class FitParams:
    """Log-space parameterization: A, B, E = exp(a), exp(b), exp(e)."""

    a: float
    b: float
    e: float
    alpha: float
    beta: float

    def to_array(self) -> np.ndarray:
        return np.array([self.a, self.b, self.e, self.alpha, self.beta], dtype=float)

    @classmethod
    def from_array(cls, values: Sequence[float]) -> "FitParams":
        a, b, e, alpha, beta = (float(v) for v in values)
        return cls(a=a, b=b, e=e, alpha=alpha, beta=beta)

    @classmethod
    def from_coefficients(cls, c: Coefficients) -> "FitParams":
        return cls(a=math.log(c.A), b=math.log(c.B), e=math.log(c.E), alpha=c.alpha, beta=c.beta)

    def to_coefficients(self) -> Coefficients:
        """Raises InvalidValue when the exponents fall outside (0, 2)."""
        return Coefficients(
            A=math.exp(self.a), B=math.exp(self.b), E=math.exp(self.e),
            alpha=self.alpha, beta=self.beta,
        )


def default_grid() -> Tuple[FitParams, ...]:
    """Full cross product: 3 x 3 x 3 x 4 x 4 = 432 starting points."""
    exponents = (0.1, 0.3, 0.5, 0.7)
    scales = (math.log(10.0), math.log(100.0), math.log(500.0))
    floors = (math.log(0.5), math.log(1.0), math.log(2.0))
    return tuple(
        FitParams(a=a, b=b, e=e, alpha=alpha, beta=beta)
        for a, b, e, alpha, beta in itertools.product(scales, scales, floors, exponents, exponents)
    )


@dataclass(frozen=True)
class FitConfig:
    huber_delta: float = 1e-3
    grid: Tuple[FitParams, ...] = field(default_factory=default_grid)
    max_iterations: int = 500
    gradient_tolerance: float = 1e-9

    def __post_init__(self):
        if not (math.isfinite(self.huber_delta) and self.huber_delta > 0):
            raise InvalidValue(f"huber_delta must be positive, got {self.huber_delta}")
        if not self.grid:
            raise InvalidValue("starting grid must be non-empty")
        if self.max_iterations <= 0:
            raise InvalidValue(f"max_iterations must be positive, got {self.max_iterations}")
        if not self.gradient_tolerance > 0:
            raise InvalidValue(
                f"gradient_tolerance must be positive, got {self.gradient_tolerance}"
            )
        object.__setattr__(self, "grid", tuple(self.grid))


@dataclass(frozen=True)
class FitReport:
    coefficients: Coefficients
    objective_value: float
    winning_start: FitParams
    runs_used: int
    max_ratio_filter: Optional[float]
    winning_index: int
    status: FitStatus
    starts_converged: int

    def to_dict(self) -> dict:
        return {
            "coefficients": self.coefficients.to_dict(),
            "objective_value": self.objective_value,
            "winning_start": vars(self.winning_start).copy(),
            "winning_index": self.winning_index,
            "runs_used": self.runs_used,
            "max_ratio_filter": (
                None if self.max_ratio_filter is None or math.isinf(self.max_ratio_filter)
                else self.max_ratio_filter
            ),
            "status": self.status.value,
            "starts_converged": self.starts_converged,
        }


def lse3(x1: float, x2: float, x3: float) -> float:
    """log(exp(x1) + exp(x2) + exp(x3)) without overflow."""
    top = max(x1, x2, x3)
    return top + math.log(math.exp(x1 - top) + math.exp(x2 - top) + math.exp(x3 - top))


def huber(delta: float, r: float) -> float:
    """Quadratic inside ``|r| <= delta``, linear outside; C1 at the seam."""
    if not delta > 0:
        raise InvalidValue(f"delta must be positive, got {delta}")
    magnitude = abs(r)
    if magnitude <= delta:
        return 0.5 * r * r
    return delta * (magnitude - 0.5 * delta)


class _RunArrays:
    """Log-transformed runs in a canonical order, so sums ignore input order."""

    def __init__(self, runs: Iterable[TrainingRun]):
        ordered = sorted(runs, key=lambda run: (run.params, run.train_tokens, run.final_loss))
        if not ordered:
            raise InvalidValue("at least one training run is required")
        self.log_n = np.log([run.params for run in ordered])
        self.log_d = np.log([run.train_tokens for run in ordered])
        self.log_l = np.log([run.final_loss for run in ordered])
        self.count = len(ordered)

    def value_and_gradient(self, x: np.ndarray, delta: float) -> Tuple[float, np.ndarray]:
        a, b, e, alpha, beta = x
        t1 = a - alpha * self.log_n
        t2 = b - beta * self.log_d
        t3 = np.full_like(t1, e)
        top = np.maximum(np.maximum(t1, t2), t3)
        w1 = np.exp(t1 - top)
        w2 = np.exp(t2 - top)
        w3 = np.exp(t3 - top)
        total = w1 + w2 + w3
        residual = top + np.log(total) - self.log_l

        magnitude = np.abs(residual)
        penalty = np.where(
            magnitude <= delta, 0.5 * residual * residual, delta * (magnitude - 0.5 * delta)
        )
        slope = np.clip(residual, -delta, delta)
        p1 = slope * w1 / total
        p2 = slope * w2 / total
        p3 = slope * w3 / total
        gradient = np.array([
            np.sum(p1),
            np.sum(p2),
            np.sum(p3),
            -np.sum(p1 * self.log_n),
            -np.sum(p2 * self.log_d),
        ])
        return float(np.sum(penalty)), gradient


def objective(p: FitParams, runs: Sequence[TrainingRun], delta: float) -> float:
    """Summed Huber loss of log-loss residuals."""
    value, _ = _RunArrays(runs).value_and_gradient(p.to_array(), delta)
    return value


def objective_gradient(p: FitParams, runs: Sequence[TrainingRun], delta: float) -> np.ndarray:
    """Analytic gradient of ``objective`` in the order (a, b, e, alpha, beta)."""
    _, gradient = _RunArrays(runs).value_and_gradient(p.to_array(), delta)
    return gradient


def filter_by_ratio(
        runs: Iterable[TrainingRun], max_tokens_per_param: float
) -> List[TrainingRun]:
    """Runs with at most ``max_tokens_per_param`` tokens per parameter, order kept."""
    if not max_tokens_per_param > 0:
        raise InvalidValue(f"max_tokens_per_param must be positive, got {max_tokens_per_param}")
    return [run for run in runs if run.tokens_per_param <= max_tokens_per_param]


def _check_sufficient(runs: Sequence[TrainingRun]) -> None:
    distinct_n = len({run.params for run in runs})
    distinct_d = len({run.train_tokens for run in runs})
    if len(runs) < MIN_RUNS or distinct_n < 2 or distinct_d < 2:
        raise InsufficientData(
            f"need at least {MIN_RUNS} runs over 2+ model sizes and 2+ token counts; "
            f"got {len(runs)} runs, {distinct_n} sizes, {distinct_d} token counts"
        )


def select_best(outcomes: Iterable[StartOutcome]) -> Optional[StartOutcome]:
    """Lowest objective among converged starts with valid coefficients; earliest on ties."""
    best: Optional[StartOutcome] = None
    for outcome in outcomes:
        if outcome.status is not FitStatus.CONVERGED or outcome.coefficients is None:
            continue
        if best is None or outcome.objective_value < best.objective_value:
            best = outcome
    return best


def _run_start(
        index: int, start: FitParams, arrays: _RunArrays, config: FitConfig
) -> StartOutcome:
    result = minimize(
        arrays.value_and_gradient,
        start.to_array(),
        args=(config.huber_delta,),
        jac=True,
        method="L-BFGS-B",
        options={
            "maxcor": 10,
            "maxiter": config.max_iterations,
            "gtol": config.gradient_tolerance,
        },
    )
    status = FitStatus.from_result(result)
    coefficients = None
    if status is not FitStatus.DIVERGED:
        try:
            coefficients = FitParams.from_array(result.x).to_coefficients()
        except (InvalidValue, OverflowError):
            pass
    if status is not FitStatus.CONVERGED:
        logger.debug("Start #%d: %s (%s)", index, status.value, result.message)
    return StartOutcome(
        index=index,
        objective_value=float(result.fun),
        status=status,
        coefficients=coefficients,
    )


def fit(
        runs: Sequence[TrainingRun],
        config: Optional[FitConfig] = None,
        max_ratio_filter: Optional[float] = None,
) -> FitReport:
    """
    Fit coefficients to ``runs`` from every grid start; keep the best converged one.

    ``max_ratio_filter`` is recorded on the report only; apply
    ``filter_by_ratio`` beforehand.

    Raises:
        InsufficientData: fewer than 6 runs, or a single size / token count
        NoConvergence: no start converged with exponents inside (0, 2)
    """
    config = config or FitConfig()
    runs = list(runs)
    _check_sufficient(runs)
    arrays = _RunArrays(runs)

    outcomes = [
        _run_start(index, start, arrays, config) for index, start in enumerate(config.grid)
    ]
    best = select_best(outcomes)
    if best is None:
        raise NoConvergence(f"none of {len(config.grid)} grid starts converged to a valid fit")

    converged = sum(
        1 for outcome in outcomes
        if outcome.status is FitStatus.CONVERGED and outcome.coefficients is not None
    )
    coefficients = best.coefficients
    logger.info(
        "Fit on %d runs: alpha=%.4f beta=%.4f E=%.4f (objective %.3g, start #%d, %d/%d converged)",
        len(runs), coefficients.alpha, coefficients.beta, coefficients.E,
        best.objective_value, best.index, converged, len(outcomes),
    )
    return FitReport(
        coefficients=coefficients,
        objective_value=best.objective_value,
        winning_start=config.grid[best.index],
        runs_used=len(runs),
        max_ratio_filter=max_ratio_filter,
        winning_index=best.index,
        status=best.status,
        starts_converged=converged,
    )


def fit_protocol(
        runs: Sequence[TrainingRun],
        thresholds: Sequence[float] = PROTOCOL_THRESHOLDS,
        config: Optional[FitConfig] = None,
) -> List[FitReport]:
    """One fit per nested tokens-per-parameter subset, in threshold order."""
    reports = []
    for threshold in thresholds:
        subset = filter_by_ratio(runs, threshold)
        logger.info("Subset <= %g tok/param: %d runs", threshold, len(subset))
        reports.append(fit(subset, config, max_ratio_filter=threshold))
    return reports


def synthesize_runs(
        c: Coefficients,
        params_grid: Sequence[float],
        ratios: Sequence[float],
        noise: float = 0.0,
        seed: int = 0,
) -> List[TrainingRun]:
    """Runs on the ``params_grid x ratios`` grid, with Gaussian noise on log-loss."""
    rng = np.random.default_rng(seed)
    runs = []
    for params in params_grid:
        for ratio in ratios:
            tokens = params * ratio
            log_loss = math.log(c.E + c.A / params ** c.alpha + c.B / tokens ** c.beta)
            if noise > 0:
                log_loss += float(rng.normal(0.0, noise))
            runs.append(TrainingRun(params=params, train_tokens=tokens, final_loss=math.exp(log_loss)))
    return runs


def _parse_cell(raw: object) -> float:
    text = raw.strip() if isinstance(raw, str) else ""
    if not text:
        raise ValueError("empty value")
    return float(text)


def load_runs(file_path: str) -> List[TrainingRun]:
    """
    Read a ``params,tokens,loss`` run log.

    Raises:
        RunLogError: the header is wrong or any row is invalid (all bad lines listed)
        OSError: the file cannot be read
    """
    try:
        frame = load_csv_frame(file_path)
    except (pd.errors.ParserError, pd.errors.EmptyDataError) as exc:
        raise RunLogError([f"{file_path}: {exc}"]) from exc
    except UnicodeDecodeError as exc:
        raise RunLogError(
            [f"{file_path}: not valid UTF-8 text ({exc.reason} at byte {exc.start})"]
        ) from exc

    missing = [column for column in RUN_LOG_COLUMNS if column not in frame.columns]
    if missing:
        raise RunLogError([f"line 1: header must contain {','.join(RUN_LOG_COLUMNS)}"])

    runs: List[TrainingRun] = []
    problems: List[str] = []
    for offset, row in enumerate(frame[list(RUN_LOG_COLUMNS)].itertuples(index=False)):
        line = offset + 2
        if all(not (isinstance(cell, str) and cell.strip()) for cell in row):
            continue
        try:
            params, tokens, final_loss = (_parse_cell(cell) for cell in row)
            runs.append(TrainingRun(params=params, train_tokens=tokens, final_loss=final_loss))
        except ValueError as exc:
            problems.append(f"line {line}: {exc}")

    if problems:
        raise RunLogError(problems)
    logger.info("Loaded %d runs from %s", len(runs), file_path)
    return runs
