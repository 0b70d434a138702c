"""
Options, parameter types and error handling shared by the commands.
"""

import functools
import logging
import math
from typing import Any, Callable, Optional

import click

from src.core.errors import PlannerError
from src.core.scaling_law import Coefficients, chinchilla_loss
from src.ui.report import Report

logger = logging.getLogger(__name__)

EXIT_DOMAIN = 3
EXIT_IO = 4

SI_SUFFIXES = {"K": 1e3, "M": 1e6, "B": 1e9, "T": 1e12}


def parse_si(text: str) -> float:
    """
    Parse ``7B``, ``4.26T``, ``1e11`` or ``0.5``.

    Raises:
        ValueError: not a finite number
    """
    raw = text.strip()
    multiplier = 1.0
    if raw and raw[-1].upper() in SI_SUFFIXES:
        multiplier = SI_SUFFIXES[raw[-1].upper()]
        raw = raw[:-1].strip()
    value = float(raw) * multiplier
    if not math.isfinite(value):
        raise ValueError(f"{text!r} is not finite")
    return value


class SINumber(click.ParamType):
    """Float flag accepting plain, scientific and K/M/B/T-suffixed values."""

    name = "number"

    def __init__(self, allow_zero: bool = False) -> None:
        self.allow_zero = allow_zero

    def convert(self, value: Any, param: Optional[click.Parameter], ctx: Optional[click.Context]) -> float:
        if isinstance(value, (int, float)) and not isinstance(value, bool):
            number = float(value)
        else:
            try:
                number = parse_si(str(value))
            except ValueError:
                self.fail(f"{value!r} is not a number (examples: 7B, 4.26T, 1e11)", param, ctx)
        if not math.isfinite(number):
            self.fail(f"{value!r} is not finite", param, ctx)
        if self.allow_zero and number < 0:
            self.fail(f"{value!r} must be nonnegative", param, ctx)
        if not self.allow_zero and number <= 0:
            self.fail(f"{value!r} must be positive", param, ctx)
        return number


POSITIVE = SINumber()
NONNEGATIVE = SINumber(allow_zero=True)


def coeffs_option(func: Callable) -> Callable:
    return click.option(
        "--coeffs",
        default=None,
        metavar="PRESET|PATH",
        help="Coefficient preset (chinchilla, le100, le250, le500, all-data) or JSON file.",
    )(func)


def json_option(func: Callable) -> Callable:
    return click.option(
        "--json", "as_json", is_flag=True, help="Emit the full-precision JSON payload."
    )(func)


def quality_options(func: Callable) -> Callable:
    """``--loss`` or ``--match-chinchilla``; exactly one must be given."""
    func = click.option(
        "--match-chinchilla",
        type=POSITIVE,
        default=None,
        metavar="PARAMS",
        help="Target the loss of the training-compute-optimal model of this size.",
    )(func)
    return click.option("--loss", "target_loss", type=POSITIVE, default=None, help="Target loss.")(func)


def resolve_quality(
        target_loss: Optional[float], match_chinchilla: Optional[float], c: Coefficients
) -> float:
    if (target_loss is None) == (match_chinchilla is None):
        raise click.UsageError("give exactly one of --loss / --match-chinchilla")
    if target_loss is not None:
        return target_loss
    return chinchilla_loss(match_chinchilla, c)


def handle_errors(func: Callable) -> Callable:
    """Map domain errors to exit 3 and I/O errors to exit 4."""

    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except PlannerError as exc:
            logger.debug("Domain error", exc_info=True)
            click.echo(f"Error: {exc}", err=True)
            raise click.exceptions.Exit(EXIT_DOMAIN)
        except OSError as exc:
            logger.debug("I/O error", exc_info=True)
            click.echo(f"Error: {exc}", err=True)
            raise click.exceptions.Exit(EXIT_IO)

    return wrapper


def emit(report: Report, as_json: bool) -> None:
    click.echo(report.render(as_json))
