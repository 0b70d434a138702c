"""
``baseline``: the training-compute-optimal (Chinchilla-style) model for a loss.
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
from src.core.scaling_law import (
    chinchilla_baseline,
    chinchilla_baseline_for_params,
    flop_account,
    resolve_coefficients,
)
from src.ui.report import Report, format_si, format_sig, render_pairs

DEFINITION = {
    "name": "baseline",
    "help": "Training-compute-optimal size and data for a target loss, ignoring inference.",
}


@click.command(help=DEFINITION["help"])
@quality_options
@click.option(
    "--inference-tokens",
    type=NONNEGATIVE,
    default=0.0,
    show_default=True,
    help="Lifetime inference tokens, for the FLOP account only.",
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
    if match_chinchilla is not None:
        cfg = chinchilla_baseline_for_params(match_chinchilla, c)
    else:
        cfg = chinchilla_baseline(quality, c)
    flops = flop_account(cfg, inference_tokens)

    text = render_pairs(
        [
            ("target loss", format_sig(quality)),
            ("params", format_si(cfg.params)),
            ("tokens", format_si(cfg.train_tokens)),
            ("tokens/param", format_sig(cfg.tokens_per_param)),
            ("training FLOPs", format_sig(flops.train_flops)),
            ("inference FLOPs", format_sig(flops.inference_flops)),
            ("total FLOPs", format_sig(flops.total_flops)),
        ],
        title="Chinchilla-style baseline",
    )
    payload = {
        "target_loss": quality,
        "params": cfg.params,
        "tokens": cfg.train_tokens,
        "tokens_per_param": cfg.tokens_per_param,
        "inference_tokens": inference_tokens,
        "train_flops": flops.train_flops,
        "inference_flops": flops.inference_flops,
        "total_flops": flops.total_flops,
        "coefficients": c.to_dict(),
    }
    emit(Report(text=text, payload=payload), as_json)
