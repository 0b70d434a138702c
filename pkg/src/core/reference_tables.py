"""
Regenerate the published compute-optimal and cost-optimal comparison tables.

Each published row names a Chinchilla-style model size and a lifetime demand.
Quality is resolved from that size with ``chinchilla_loss`` (the printed losses
are rounded to two decimals), the plan is solved from first principles, and
every cell is compared with the printed value. Cells known to be misprinted
carry a correction that is compared against instead, and the note travels with
the row.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Mapping, Optional

from src.config.settings import settings
from src.core.cost_model import CostConfig, solve_cost_optimal
from src.core.errors import ConfigError
from src.core.optimizer import TradeoffObjective, solve_optimal
from src.core.scaling_law import Coefficients, chinchilla_loss
from src.utils.file_loader import load_json_document

logger = logging.getLogger(__name__)

TABLE_COLUMNS = (
    "baseline_params",
    "baseline_tokens",
    "baseline_total",
    "optimal_params",
    "optimal_tokens",
    "optimal_total",
    "reduction",
)


@dataclass(frozen=True)
class Correction:
    value: float
    note: str


@dataclass(frozen=True)
class PublishedRow:
    demand: float
    loss: float
    values: Dict[str, float]
    corrections: Dict[str, Correction] = field(default_factory=dict)

    @property
    def chinchilla_params(self) -> float:
        return self.values["baseline_params"]

    def reference(self, column: str) -> float:
        """The value a regenerated cell is checked against (corrected if misprinted)."""
        correction = self.corrections.get(column)
        return correction.value if correction else self.values[column]


@dataclass(frozen=True)
class PublishedTable:
    name: str
    title: str
    demand_unit: str
    rows: List[PublishedRow]


@dataclass(frozen=True)
class RegeneratedRow:
    published: PublishedRow
    target_loss: float
    computed: Dict[str, float]

    def deviation(self, column: str) -> float:
        """
        Relative deviation from the reference value.

        ``reduction`` is already a fraction, so its deviation is the plain
        difference (0.01 == one percentage point).
        """
        reference = self.published.reference(column)
        if column == "reduction":
            return self.computed[column] - reference
        return self.computed[column] / reference - 1.0

    def note(self, column: str) -> Optional[str]:
        correction = self.published.corrections.get(column)
        return correction.note if correction else None

    def to_dict(self) -> Dict[str, Any]:
        cells = {}
        for column in TABLE_COLUMNS:
            cells[column] = {
                "published": self.published.values[column],
                "reference": self.published.reference(column),
                "computed": self.computed[column],
                "deviation": self.deviation(column),
                "note": self.note(column),
            }
        return {
            "chinchilla_params": self.published.chinchilla_params,
            "demand": self.published.demand,
            "published_loss": self.published.loss,
            "target_loss": self.target_loss,
            "cells": cells,
        }


def _number(document: Mapping[str, Any], key: str, where: str) -> float:
    value = document.get(key)
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{where}: {key!r} must be a number, got {value!r}")
    if not math.isfinite(float(value)):
        raise ConfigError(f"{where}: {key!r} must be finite")
    return float(value)


def _parse_row(document: Mapping[str, Any], where: str) -> PublishedRow:
    corrections = {}
    for column, entry in (document.get("corrections") or {}).items():
        if column not in TABLE_COLUMNS:
            raise ConfigError(f"{where}: correction for unknown column {column!r}")
        corrections[column] = Correction(
            value=_number(entry, "value", f"{where}.{column}"),
            note=str(entry.get("note", "")),
        )
    return PublishedRow(
        demand=_number(document, "demand", where),
        loss=_number(document, "loss", where),
        values={column: _number(document, column, where) for column in TABLE_COLUMNS},
        corrections=corrections,
    )


def load_published_tables(file_path: Optional[str] = None) -> Dict[str, PublishedTable]:
    """Load the frozen published values, keyed ``compute`` and ``cost``."""
    file_path = file_path or settings.PUBLISHED_TABLES_PATH
    document = load_json_document(file_path)
    tables = {}
    for name in ("compute", "cost"):
        section = document.get(name)
        if not isinstance(section, dict):
            raise ConfigError(f"{file_path}: missing table {name!r}")
        tables[name] = PublishedTable(
            name=name,
            title=str(section.get("title", name)),
            demand_unit=str(section.get("demand_unit", "")),
            rows=[
                _parse_row(row, f"{name}[{index}]")
                for index, row in enumerate(section.get("rows", []))
            ],
        )
    return tables


def regenerate_compute_table(
        rows: List[PublishedRow], c: Coefficients
) -> List[RegeneratedRow]:
    """Demand is lifetime inference tokens; totals are FLOPs."""
    regenerated = []
    for row in rows:
        target_loss = chinchilla_loss(row.chinchilla_params, c)
        plan = solve_optimal(target_loss, TradeoffObjective.compute(row.demand), c)
        computed = {
            "baseline_params": plan.baseline.params,
            "baseline_tokens": plan.baseline.train_tokens,
            "baseline_total": plan.baseline_objective,
            "optimal_params": plan.optimal.params,
            "optimal_tokens": plan.optimal.train_tokens,
            "optimal_total": plan.objective_value,
            "reduction": plan.reduction_fraction,
        }
        regenerated.append(RegeneratedRow(row, target_loss, computed))
    return regenerated


def regenerate_cost_table(
        rows: List[PublishedRow], config: CostConfig, c: Coefficients
) -> List[RegeneratedRow]:
    """Demand is lifetime requests at the config's request shape; totals are USD."""
    regenerated = []
    for row in rows:
        target_loss = chinchilla_loss(row.chinchilla_params, c)
        demand = config.demand.with_requests(row.demand)
        cost_plan = solve_cost_optimal(target_loss, config.hardware, config.mfu, demand, c)
        computed = {
            "baseline_params": cost_plan.plan.baseline.params,
            "baseline_tokens": cost_plan.plan.baseline.train_tokens,
            "baseline_total": cost_plan.baseline_total_cost,
            "optimal_params": cost_plan.plan.optimal.params,
            "optimal_tokens": cost_plan.plan.optimal.train_tokens,
            "optimal_total": cost_plan.total_cost,
            "reduction": cost_plan.savings_fraction,
        }
        regenerated.append(RegeneratedRow(row, target_loss, computed))
    logger.debug("Regenerated %d cost rows", len(regenerated))
    return regenerated
