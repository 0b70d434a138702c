"""
``tables``: regenerate the published comparison tables and report deviations.
"""

from dataclasses import asdict
from typing import Callable, List

import click

from src.commands._options import emit, handle_errors, json_option
from src.core.cost_model import CostConfig
from src.core.reference_tables import (
    TABLE_COLUMNS,
    PublishedTable,
    RegeneratedRow,
    load_published_tables,
    regenerate_compute_table,
    regenerate_cost_table,
)
from src.core.scaling_law import Coefficients
from src.ui.report import Report, format_percent, format_si, format_sig, format_usd, render_table

DEFINITION = {
    "name": "tables",
    "help": "Regenerate the compute- and cost-optimal tables and compare with published values.",
}


def _deviation(row: RegeneratedRow, column: str) -> str:
    value = row.deviation(column)
    if column == "reduction":
        return f"{100.0 * value:+.1f}pp"
    return f"{100.0 * value:+.1f}%"


def _render(table: PublishedTable, rows: List[RegeneratedRow], total_fmt: Callable[[float], str]) -> str:
    formatters = {
        "baseline_params": format_si,
        "baseline_tokens": format_si,
        "baseline_total": total_fmt,
        "optimal_params": format_si,
        "optimal_tokens": format_si,
        "optimal_total": total_fmt,
        "reduction": format_percent,
    }
    lines = []
    for row in rows:
        for column in TABLE_COLUMNS:
            fmt = formatters[column]
            note = row.note(column)
            lines.append([
                format_si(row.published.chinchilla_params),
                format_si(row.published.demand),
                column,
                fmt(row.published.values[column]),
                fmt(row.computed[column]),
                _deviation(row, column),
                f"{note} (compared with {fmt(row.published.reference(column))})" if note else "",
            ])
    return render_table(
        ["chinchilla", table.demand_unit, "cell", "published", "computed", "deviation", "note"],
        lines,
        title=table.title,
    )


@click.command(help=DEFINITION["help"])
@json_option
@handle_errors
def command(as_json: bool) -> None:
    c = Coefficients.default()
    config = CostConfig.default()
    tables = load_published_tables()
    compute_rows = regenerate_compute_table(tables["compute"].rows, c)
    cost_rows = regenerate_cost_table(tables["cost"].rows, config, c)

    text = "\n\n".join(
        [
            _render(tables["compute"], compute_rows, format_sig),
            _render(tables["cost"], cost_rows, format_usd),
        ]
    )
    payload = {
        "compute": [row.to_dict() for row in compute_rows],
        "cost": [row.to_dict() for row in cost_rows],
        "coefficients": c.to_dict(),
        "cost_config": {
            "hardware": asdict(config.hardware),
            "mfu": asdict(config.mfu),
            "request_shape": [
                config.demand.input_tokens_per_request,
                config.demand.output_tokens_per_request,
            ],
        },
    }
    emit(Report(text=text, payload=payload), as_json)
