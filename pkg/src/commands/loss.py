"""
``loss``: evaluate the loss law at a (params, tokens) pair.
"""

import click

from src.commands._options import POSITIVE, coeffs_option, emit, handle_errors, json_option
from src.core.scaling_law import ModelConfig, loss, resolve_coefficients
from src.ui.report import Report, format_si, format_sig, render_pairs

DEFINITION = {
    "name": "loss",
    "help": "Predicted pre-training loss of a model trained on a given number of tokens.",
}


@click.command(help=DEFINITION["help"])
@click.option("--params", required=True, type=POSITIVE, help="Parameter count, e.g. 70B.")
@click.option("--tokens", required=True, type=POSITIVE, help="Training tokens, e.g. 4.26T.")
@coeffs_option
@json_option
@handle_errors
def command(params: float, tokens: float, coeffs: str, as_json: bool) -> None:
    c = resolve_coefficients(coeffs)
    cfg = ModelConfig(params=params, train_tokens=tokens)
    value = loss(cfg, c)

    text = render_pairs(
        [
            ("params", format_si(cfg.params)),
            ("tokens", format_si(cfg.train_tokens)),
            ("tokens/param", format_sig(cfg.tokens_per_param)),
            ("loss", format_sig(value)),
        ]
    )
    payload = {
        "params": cfg.params,
        "tokens": cfg.train_tokens,
        "tokens_per_param": cfg.tokens_per_param,
        "loss": value,
        "coefficients": c.to_dict(),
    }
    emit(Report(text=text, payload=payload), as_json)
