"""
``sweep-cost``: cost-optimal vs. Chinchilla-style ratios over a (size, requests) grid.
"""

from typing import Optional

import click

from src.commands._options import (
    NONNEGATIVE,
    POSITIVE,
    coeffs_option,
    emit,
    handle_errors,
    json_option,
)
from src.commands._sweep import check_cell_count, geometric_grid, run_sweep
from src.config.settings import settings
from src.core.cost_model import cost_objective, load_cost_config
from src.core.scaling_law import resolve_coefficients

DEFINITION = {
    "name": "sweep-cost",
    "help": "Write cost-optimal/Chinchilla ratios over a grid of sizes and request volumes to CSV.",
}


@click.command(help=DEFINITION["help"])
@click.option("--min-size", type=POSITIVE, default=1e9, show_default=True,
              help="Smallest Chinchilla-equivalent size.")
@click.option("--max-size", type=POSITIVE, default=70e9, show_default=True,
              help="Largest Chinchilla-equivalent size.")
@click.option("--sizes", "size_points", type=int, default=settings.DEFAULT_SWEEP_POINTS,
              show_default=True, help="Number of log-spaced sizes.")
@click.option("--min-requests", type=NONNEGATIVE, default=1e7, show_default=True,
              help="Fewest lifetime requests.")
@click.option("--max-requests", type=NONNEGATIVE, default=1e12, show_default=True,
              help="Most lifetime requests.")
@click.option("--demands", "demand_points", type=int, default=settings.DEFAULT_SWEEP_POINTS,
              show_default=True, help="Number of log-spaced request volumes.")
@click.option("--include-zero", is_flag=True, help="Prepend a zero-demand column.")
@click.option("--config", "config_path", default=None, metavar="PATH",
              help="JSON with hardware / mfu / demand sections (request shape only).")
@click.option("--out", "out_path", required=True, metavar="PATH", help="CSV destination.")
@coeffs_option
@json_option
@handle_errors
def command(
        min_size: float,
        max_size: float,
        size_points: int,
        min_requests: float,
        max_requests: float,
        demand_points: int,
        include_zero: bool,
        config_path: Optional[str],
        out_path: str,
        coeffs: str,
        as_json: bool,
) -> None:
    if min_requests <= 0:
        raise click.BadParameter("must be positive; use --include-zero for zero demand",
                                 param_hint="--min-requests")
    check_cell_count(size_points, demand_points + int(include_zero))
    c = resolve_coefficients(coeffs)
    config = load_cost_config(config_path)
    sizes = geometric_grid("--sizes", min_size, max_size, size_points)
    demands = geometric_grid("--demands", min_requests, max_requests, demand_points)
    if include_zero:
        demands = [0.0] + demands

    def objective_for(requests: float):
        return cost_objective(config.hardware, config.mfu, config.demand.with_requests(requests))

    report = run_sweep(sizes, demands, objective_for, c, out_path, "request volumes")
    emit(report, as_json)
