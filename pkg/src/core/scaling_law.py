"""
Parametric loss law L(N, D) = E + A/N^alpha + B/D^beta.

Evaluation, inversion in either variable, 6N/2N FLOP accounting and the
closed-form training-compute-optimal ("Chinchilla") configuration.
All values here are immutable and every function is pure.
"""

import json
import logging
import math
from dataclasses import asdict, dataclass
from typing import Any, Dict, Mapping, Optional

from src.config.settings import settings
from src.core.errors import ConfigError, InvalidValue, UnachievableLoss
from src.utils.file_loader import load_json_document

logger = logging.getLogger(__name__)

COEFFICIENT_KEYS = ("A", "B", "E", "alpha", "beta")


def _require_finite(name: str, value: float) -> float:
    value = float(value)
    if not math.isfinite(value):
        raise InvalidValue(f"{name} must be finite, got {value!r}")
    return value


@dataclass(frozen=True)
class Coefficients:
    """The five constants of the loss law. Loss is measured in nats."""

    A: float
    B: float
    E: float
    alpha: float
    beta: float

    def __post_init__(self):
        for key in COEFFICIENT_KEYS:
            object.__setattr__(self, key, _require_finite(key, getattr(self, key)))
        if self.A <= 0 or self.B <= 0:
            raise InvalidValue(f"A and B must be positive, got A={self.A}, B={self.B}")
        if self.E < 0:
            raise InvalidValue(f"E must be nonnegative, got {self.E}")
        for key in ("alpha", "beta"):
            value = getattr(self, key)
            if not 0.0 < value < 2.0:
                raise InvalidValue(f"{key} must lie in (0, 2), got {value}")

    @classmethod
    def default(cls) -> "Coefficients":
        # Unrounded exponents; the rounded 0.34/0.28 do not reproduce the reference tables.
        return cls(A=406.4, B=410.7, E=1.69, alpha=0.336, beta=0.283)

    @classmethod
    def from_dict(cls, document: Mapping[str, Any]) -> "Coefficients":
        missing = [key for key in COEFFICIENT_KEYS if key not in document]
        if missing:
            raise ConfigError(f"coefficients missing keys: {', '.join(missing)}")
        values = {}
        for key in COEFFICIENT_KEYS:
            value = document[key]
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise ConfigError(f"coefficient {key!r} must be a number, got {value!r}")
            values[key] = float(value)
        return cls(**values)

    def to_dict(self) -> Dict[str, float]:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), allow_nan=False)


@dataclass(frozen=True)
class ModelConfig:
    """A (parameter count, training-token count) pair, both real-valued."""

    params: float
    train_tokens: float

    def __post_init__(self):
        for key in ("params", "train_tokens"):
            value = _require_finite(key, getattr(self, key))
            if value <= 0:
                raise InvalidValue(f"{key} must be positive, got {value}")
            object.__setattr__(self, key, value)

    @property
    def tokens_per_param(self) -> float:
        return self.train_tokens / self.params


@dataclass(frozen=True)
class FlopAccount:
    train_flops: float
    inference_flops: float
    total_flops: float


def loss(cfg: ModelConfig, c: Coefficients) -> float:
    """Pre-training loss of ``cfg`` under coefficients ``c``."""
    return c.E + c.A / cfg.params ** c.alpha + c.B / cfg.train_tokens ** c.beta


def tokens_for_loss(params: float, target_loss: float, c: Coefficients) -> float:
    """
    Training tokens a model of ``params`` parameters needs to reach ``target_loss``.

    Raises:
        UnachievableLoss: the model is too small, or the target is at/below E
    """
    params = _require_finite("params", params)
    if params <= 0:
        raise InvalidValue(f"params must be positive, got {params}")
    margin = _require_finite("target_loss", target_loss) - c.E - c.A / params ** c.alpha
    if margin <= 0:
        raise UnachievableLoss(
            f"loss {target_loss} is unreachable with {params:.4g} parameters "
            f"(asymptote at infinite data is {target_loss - margin:.6g})"
        )
    return (c.B / margin) ** (1.0 / c.beta)


def params_for_loss(train_tokens: float, target_loss: float, c: Coefficients) -> float:
    """
    Parameters a model trained on ``train_tokens`` tokens needs to reach ``target_loss``.

    Raises:
        UnachievableLoss: too few tokens, or the target is at/below E
    """
    train_tokens = _require_finite("train_tokens", train_tokens)
    if train_tokens <= 0:
        raise InvalidValue(f"train_tokens must be positive, got {train_tokens}")
    margin = _require_finite("target_loss", target_loss) - c.E - c.B / train_tokens ** c.beta
    if margin <= 0:
        raise UnachievableLoss(
            f"loss {target_loss} is unreachable with {train_tokens:.4g} training tokens "
            f"(asymptote at infinite size is {target_loss - margin:.6g})"
        )
    return (c.A / margin) ** (1.0 / c.alpha)


def flop_account(cfg: ModelConfig, inference_tokens: float) -> FlopAccount:
    """6N FLOPs per training token, 2N per inference token."""
    inference_tokens = _require_finite("inference_tokens", inference_tokens)
    if inference_tokens < 0:
        raise InvalidValue(f"inference_tokens must be nonnegative, got {inference_tokens}")
    train_flops = 6.0 * cfg.params * cfg.train_tokens
    inference_flops = 2.0 * cfg.params * inference_tokens
    return FlopAccount(
        train_flops=train_flops,
        inference_flops=inference_flops,
        total_flops=train_flops + inference_flops,
    )


def require_above_asymptote(target_loss: float, c: Coefficients) -> float:
    target_loss = _require_finite("target_loss", target_loss)
    if target_loss <= c.E:
        raise UnachievableLoss(
            f"target loss {target_loss} must exceed the irreducible loss E={c.E}"
        )
    return target_loss


def chinchilla_baseline(target_loss: float, c: Coefficients) -> ModelConfig:
    """
    Minimum-training-FLOPs configuration reaching ``target_loss`` (no inference).

    At the optimum the data term carries alpha/(alpha+beta) of the reducible loss.
    """
    target_loss = require_above_asymptote(target_loss, c)
    excess = target_loss - c.E
    train_tokens = (c.B * (c.alpha + c.beta) / (c.alpha * excess)) ** (1.0 / c.beta)
    params = params_for_loss(train_tokens, target_loss, c)
    return ModelConfig(params=params, train_tokens=train_tokens)


def chinchilla_loss(params: float, c: Coefficients) -> float:
    """Loss reached by the training-compute-optimal model with ``params`` parameters."""
    params = _require_finite("params", params)
    if params <= 0:
        raise InvalidValue(f"params must be positive, got {params}")
    return c.E + c.A * (c.alpha + c.beta) / (c.beta * params ** c.alpha)


def chinchilla_baseline_for_params(params: float, c: Coefficients) -> ModelConfig:
    """The training-compute-optimal configuration whose size is ``params``."""
    return chinchilla_baseline(chinchilla_loss(params, c), c)


def load_presets(file_path: Optional[str] = None) -> Dict[str, Coefficients]:
    """Named coefficient sets shipped with the package."""
    document = load_json_document(file_path or settings.COEFFICIENT_PRESETS_PATH)
    return {name: Coefficients.from_dict(values) for name, values in document.items()}


def resolve_coefficients(source: Optional[str]) -> Coefficients:
    """
    Coefficients from a preset name or a JSON file path; defaults when None.

    Raises:
        ConfigError: the document is malformed
        OSError: ``source`` is neither a preset nor a readable file
    """
    if source is None:
        return Coefficients.default()
    presets = load_presets()
    if source in presets:
        logger.debug("Using coefficient preset %r", source)
        return presets[source]
    coefficients = Coefficients.from_dict(load_json_document(source))
    logger.info("Loaded coefficients from %s", source)
    return coefficients
