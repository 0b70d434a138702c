"""
``optimize-cost``: cheapest training plus serving bill at a fixed loss.
"""

from dataclasses import asdict
from typing import Optional

import click

from src.commands._options import (
    NONNEGATIVE,
    coeffs_option,
    emit,
    handle_errors,
    json_option,
    quality_options,
    resolve_quality,
)
from src.core.cost_model import InferenceDemand, load_cost_config, solve_cost_optimal
from src.core.scaling_law import resolve_coefficients
from src.ui.report import (
    Report,
    format_percent,
    format_si,
    format_sig,
    format_usd,
    render_table,
)

DEFINITION = {
    "name": "optimize-cost",
    "help": "Size and data minimizing training plus inference dollar cost at a target loss.",
}


def _demand(
        base: InferenceDemand, requests: Optional[float], inference_tokens: Optional[float]
) -> InferenceDemand:
    if requests is not None and inference_tokens is not None:
        raise click.UsageError("give at most one of --requests / --inference-tokens")
    if requests is not None:
        return base.with_requests(requests)
    if inference_tokens is not None:
        return InferenceDemand.from_total_tokens(
            inference_tokens,
            shape=(base.input_tokens_per_request, base.output_tokens_per_request),
        )
    return base


@click.command(help=DEFINITION["help"])
@quality_options
@click.option("--requests", type=NONNEGATIVE, default=None, help="Lifetime requests, e.g. 17.5B.")
@click.option(
    "--inference-tokens",
    type=NONNEGATIVE,
    default=None,
    help="Lifetime tokens, converted to requests at the configured request shape.",
)
@click.option(
    "--config",
    "config_path",
    default=None,
    metavar="PATH",
    help="JSON with hardware / mfu / demand sections; omitted fields keep defaults.",
)
@coeffs_option
@json_option
@handle_errors
def command(
        target_loss: float,
        match_chinchilla: float,
        requests: Optional[float],
        inference_tokens: Optional[float],
        config_path: Optional[str],
        coeffs: str,
        as_json: bool,
) -> None:
    c = resolve_coefficients(coeffs)
    quality = resolve_quality(target_loss, match_chinchilla, c)
    config = load_cost_config(config_path)
    demand = _demand(config.demand, requests, inference_tokens)
    result = solve_cost_optimal(quality, config.hardware, config.mfu, demand, c)

    plan = result.plan
    baseline_costs = result.baseline_breakdown
    rows = [
        [
            "chinchilla-style",
            format_si(plan.baseline.params),
            format_si(plan.baseline.train_tokens),
            format_sig(plan.baseline.tokens_per_param),
            format_usd(baseline_costs.train_cost),
            format_usd(baseline_costs.input_cost + baseline_costs.output_cost),
            format_usd(result.baseline_total_cost),
        ],
        [
            "cost-optimal",
            format_si(plan.optimal.params),
            format_si(plan.optimal.train_tokens),
            format_sig(plan.optimal.tokens_per_param),
            format_usd(result.train_cost),
            format_usd(result.input_cost + result.output_cost),
            format_usd(result.total_cost),
        ],
    ]
    text = "\n".join(
        [
            render_table(
                ["model", "params", "tokens", "tokens/param", "training", "inference", "total"],
                rows,
                title=(
                    f"Target loss {format_sig(quality)}, "
                    f"{format_si(demand.requests)} requests "
                    f"({format_si(demand.total_tokens)} tokens)"
                ),
            ),
            f"Cost savings: {format_percent(result.savings_fraction)}",
        ]
    )
    payload = result.to_dict()
    payload.update(
        requests=demand.requests,
        input_tokens_per_request=demand.input_tokens_per_request,
        output_tokens_per_request=demand.output_tokens_per_request,
        hardware=asdict(config.hardware),
        mfu=asdict(config.mfu),
        coefficients=c.to_dict(),
    )
    emit(Report(text=text, payload=payload), as_json)
