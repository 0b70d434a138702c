"""
``sweep-compute``: FLOP-optimal vs. Chinchilla-style ratios over a (size, demand) grid.
"""

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
from src.core.optimizer import TradeoffObjective
from src.core.scaling_law import resolve_coefficients

DEFINITION = {
    "name": "sweep-compute",
    "help": "Write compute-optimal/Chinchilla ratios over a grid of sizes and inference tokens to CSV.",
}


@click.command(help=DEFINITION["help"])
@click.option("--min-size", type=POSITIVE, default=1e9, show_default=True,
              help="Smallest Chinchilla-equivalent size.")
@click.option("--max-size", type=POSITIVE, default=70e9, show_default=True,
              help="Largest Chinchilla-equivalent size.")
@click.option("--sizes", "size_points", type=int, default=settings.DEFAULT_SWEEP_POINTS,
              show_default=True, help="Number of log-spaced sizes.")
@click.option("--min-demand", type=NONNEGATIVE, default=1e9, show_default=True,
              help="Fewest lifetime inference tokens.")
@click.option("--max-demand", type=NONNEGATIVE, default=1e15, show_default=True,
              help="Most lifetime inference tokens.")
@click.option("--demands", "demand_points", type=int, default=settings.DEFAULT_SWEEP_POINTS,
              show_default=True, help="Number of log-spaced demands.")
@click.option("--include-zero", is_flag=True, help="Prepend a zero-demand column.")
@click.option("--out", "out_path", required=True, metavar="PATH", help="CSV destination.")
@coeffs_option
@json_option
@handle_errors
def command(
        min_size: float,
        max_size: float,
        size_points: int,
        min_demand: float,
        max_demand: float,
        demand_points: int,
        include_zero: bool,
        out_path: str,
        coeffs: str,
        as_json: bool,
) -> None:
    if min_demand <= 0:
        raise click.BadParameter("must be positive; use --include-zero for zero demand",
                                 param_hint="--min-demand")
    check_cell_count(size_points, demand_points + int(include_zero))
    c = resolve_coefficients(coeffs)
    sizes = geometric_grid("--sizes", min_size, max_size, size_points)
    demands = geometric_grid("--demands", min_demand, max_demand, demand_points)
    if include_zero:
        demands = [0.0] + demands
    report = run_sweep(sizes, demands, TradeoffObjective.compute, c, out_path, "inference-token volumes")
    emit(report, as_json)
