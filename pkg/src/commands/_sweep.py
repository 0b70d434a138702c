"""
Grid construction and CSV output shared by the sweep commands.
"""

import logging
from typing import Callable, List, Sequence

import click
import numpy as np

from src.config.settings import settings
from src.core.optimizer import SweepCell, TradeoffObjective, sweep_ratios, sweep_to_csv, sweep_to_frame
from src.core.scaling_law import Coefficients, chinchilla_loss
from src.ui.report import Report, format_si, format_sig, render_table
from src.utils.file_loader import write_atomic

logger = logging.getLogger(__name__)

RATIO_COLUMNS = ("flops_ratio", "params_ratio", "tokens_ratio")


def geometric_grid(flag: str, low: float, high: float, points: int) -> List[float]:
    """``points`` log-spaced values from ``low`` to ``high`` inclusive."""
    if points < 1:
        raise click.BadParameter(f"must be at least 1, got {points}", param_hint=flag)
    if low > high:
        raise click.UsageError(f"{flag}: lower bound {low:g} exceeds upper bound {high:g}")
    if points == 1 or low == high:
        return [low]
    return [float(v) for v in np.geomspace(low, high, points)]


def check_cell_count(n_rows: int, n_columns: int) -> None:
    cells = n_rows * n_columns
    if cells > settings.SWEEP_MAX_CELLS:
        raise click.UsageError(
            f"sweep has {cells} cells; the limit is {settings.SWEEP_MAX_CELLS}"
        )


def run_sweep(
        sizes: Sequence[float],
        demands: Sequence[float],
        obj_builder: Callable[[float], TradeoffObjective],
        c: Coefficients,
        out_path: str,
        demand_label: str,
) -> Report:
    """Sweep Chinchilla-equivalent sizes against demands, write the CSV, summarize."""
    check_cell_count(len(sizes), len(demands))
    losses = [chinchilla_loss(size, c) for size in sizes]
    cells: List[SweepCell] = sweep_ratios(losses, demands, obj_builder, c)
    write_atomic(out_path, sweep_to_csv(cells))

    frame = sweep_to_frame(cells)
    invalid = int(frame["flops_ratio"].isna().sum())
    summary = {
        column: {"min": _finite_or_none(frame[column].min()), "max": _finite_or_none(frame[column].max())}
        for column in RATIO_COLUMNS
    }
    rows = [
        [column, format_sig(summary[column]["min"]), format_sig(summary[column]["max"])]
        for column in RATIO_COLUMNS
    ]
    text = "\n".join(
        [
            render_table(
                ["ratio", "min", "max"],
                rows,
                title=(
                    f"{len(sizes)} sizes ({format_si(min(sizes))}-{format_si(max(sizes))}) x "
                    f"{len(demands)} {demand_label} "
                    f"({format_si(min(demands))}-{format_si(max(demands))})"
                ),
            ),
            f"cells: {len(cells)} ({invalid} invalid)",
            f"written to {out_path}",
        ]
    )
    payload = {
        "out": out_path,
        "cells": len(cells),
        "invalid_cells": invalid,
        "sizes": list(sizes),
        "demands": list(demands),
        "summary": summary,
        "coefficients": c.to_dict(),
    }
    return Report(text=text, payload=payload)


def _finite_or_none(value: float):
    return None if np.isnan(value) else float(value)
