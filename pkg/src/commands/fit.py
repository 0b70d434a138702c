"""
``fit``: fit loss-law coefficients to a ``params,tokens,loss`` run log.
"""

from typing import List, Optional

import click

from src.commands._options import POSITIVE, emit, handle_errors, json_option
from src.core.fitting import (
    PROTOCOL_THRESHOLDS,
    FitConfig,
    FitReport,
    filter_by_ratio,
    fit,
    fit_protocol,
    load_runs,
)
from src.ui.report import Report, format_sig, render_pairs, render_table
from src.utils.file_loader import write_atomic

DEFINITION = {
    "name": "fit",
    "help": "Fit A, B, E, alpha, beta to training runs (Huber loss on log-loss, L-BFGS-B).",
}


def _single_report(report: FitReport) -> Report:
    c = report.coefficients
    text = render_pairs(
        [
            ("A", format_sig(c.A)),
            ("B", format_sig(c.B)),
            ("E", format_sig(c.E)),
            ("alpha", format_sig(c.alpha)),
            ("beta", format_sig(c.beta)),
            ("objective", format_sig(report.objective_value)),
            ("runs used", str(report.runs_used)),
            ("max tokens/param", format_sig(report.max_ratio_filter) if report.max_ratio_filter else "none"),
            ("winning start", f"#{report.winning_index} ({report.status.value})"),
            ("converged starts", str(report.starts_converged)),
        ],
        title="Fitted coefficients",
    )
    return Report(text=text, payload=report.to_dict())


def _protocol_report(reports: List[FitReport]) -> Report:
    rows = [
        [
            "all" if report.max_ratio_filter is None or report.max_ratio_filter == float("inf")
            else f"<= {report.max_ratio_filter:g}",
            str(report.runs_used),
            format_sig(report.coefficients.E),
            format_sig(report.coefficients.alpha),
            format_sig(report.coefficients.beta),
            format_sig(report.coefficients.A),
            format_sig(report.coefficients.B),
            format_sig(report.objective_value),
        ]
        for report in reports
    ]
    text = render_table(
        ["tokens/param", "runs", "E", "alpha", "beta", "A", "B", "objective"],
        rows,
        title="Fits on nested tokens-per-parameter subsets",
    )
    return Report(text=text, payload={"fits": [report.to_dict() for report in reports]})


@click.command(help=DEFINITION["help"])
@click.argument("runs_path", metavar="RUNS_CSV")
@click.option("--max-ratio", type=POSITIVE, default=None,
              help="Keep only runs with at most this many tokens per parameter.")
@click.option("--protocol", is_flag=True,
              help="Fit each nested subset (<=100, <=250, <=500, all tokens/param).")
@click.option("--huber-delta", type=POSITIVE, default=1e-3, show_default=True)
@click.option("--max-iterations", type=click.IntRange(min=1), default=500, show_default=True,
              help="L-BFGS-B iterations per starting point.")
@click.option("--gradient-tolerance", type=POSITIVE, default=1e-9, show_default=True)
@click.option("--out", "out_path", default=None, metavar="PATH",
              help="Write the fitted coefficients as JSON (usable with --coeffs).")
@json_option
@handle_errors
def command(
        runs_path: str,
        max_ratio: Optional[float],
        protocol: bool,
        huber_delta: float,
        max_iterations: int,
        gradient_tolerance: float,
        out_path: Optional[str],
        as_json: bool,
) -> None:
    if protocol and (max_ratio is not None or out_path is not None):
        raise click.UsageError("--protocol cannot be combined with --max-ratio or --out")

    runs = load_runs(runs_path)
    config = FitConfig(
        huber_delta=huber_delta,
        max_iterations=max_iterations,
        gradient_tolerance=gradient_tolerance,
    )

    if protocol:
        emit(_protocol_report(fit_protocol(runs, PROTOCOL_THRESHOLDS, config)), as_json)
        return

    if max_ratio is not None:
        runs = filter_by_ratio(runs, max_ratio)
    report = fit(runs, config, max_ratio_filter=max_ratio)
    if out_path is not None:
        write_atomic(out_path, report.coefficients.to_json() + "\n")
    emit(_single_report(report), as_json)
