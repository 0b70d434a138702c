"""
``optimize-compute``: fewest total FLOPs (training + inference) at a fixed loss.
"""

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
from src.core.optimizer import TradeoffObjective, solve_optimal
from src.core.scaling_law import resolve_coefficients
from src.ui.report import Report, format_percent, format_si, format_sig, render_table

DEFINITION = {
    "name": "optimize-compute",
    "help": "Size and data minimizing training plus inference FLOPs at a target loss.",
}


@click.command(help=DEFINITION["help"])
@quality_options
@click.option(
    "--inference-tokens",
    type=NONNEGATIVE,
    default=0.0,
    show_default=True,
    help="Lifetime inference tokens (input and output), e.g. 10T.",
)
@coeffs_option
@json_option
@handle_errors
def command(
        target_loss: float,
        match_chinchilla: float,
        inference_tokens: float,
        coeffs: str,
        as_json: bool,
) -> None:
    c = resolve_coefficients(coeffs)
    quality = resolve_quality(target_loss, match_chinchilla, c)
    plan = solve_optimal(quality, TradeoffObjective.compute(inference_tokens), c)

    rows = [
        [
            label,
            format_si(cfg.params),
            format_si(cfg.train_tokens),
            format_sig(cfg.tokens_per_param),
            format_sig(total),
        ]
        for label, cfg, total in (
            ("chinchilla-style", plan.baseline, plan.baseline_objective),
            ("compute-optimal", plan.optimal, plan.objective_value),
        )
    ]
    text = "\n".join(
        [
            render_table(
                ["model", "params", "tokens", "tokens/param", "total FLOPs"],
                rows,
                title=(
                    f"Target loss {format_sig(quality)}, "
                    f"{format_si(inference_tokens)} inference tokens"
                ),
            ),
            f"FLOP reduction: {format_percent(plan.reduction_fraction)}",
        ]
    )
    payload = plan.to_dict()
    payload.update(inference_tokens=inference_tokens, coefficients=c.to_dict())
    emit(Report(text=text, payload=payload), as_json)
