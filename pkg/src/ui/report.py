"""
Report rendering: human tables at 3 significant figures, JSON at full precision.
"""

import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence

import pandas as pd

from src.utils.file_loader import dump_json

SI_UNITS = (("T", 1e12), ("B", 1e9), ("M", 1e6), ("K", 1e3))


@dataclass
class Report:
    """Rendered command output plus the machine payload it was built from."""

    text: str
    payload: Dict[str, Any] = field(default_factory=dict)

    def render(self, as_json: bool = False) -> str:
        return dump_json(self.payload) if as_json else self.text


def _three_figures(value: float) -> str:
    value = float(f"{value:.3g}")
    magnitude = abs(value)
    if magnitude >= 100:
        return f"{value:.0f}"
    if magnitude >= 10:
        return f"{value:.1f}"
    return f"{value:.2f}"


def format_si(value: Optional[float]) -> str:
    """Counts with K/M/B/T suffixes, e.g. 4.26e12 -> '4.26T', 6.33e8 -> '633M'."""
    if value is None or not math.isfinite(value):
        return "NA"
    magnitude = abs(value)
    for index, (suffix, scale) in enumerate(SI_UNITS):
        if magnitude >= scale:
            rendered = _three_figures(value / scale)
            if abs(float(rendered)) >= 1000 and index > 0:
                # Rounding carried into the next unit (999.7B -> 1.00T).
                larger_suffix, larger_scale = SI_UNITS[index - 1]
                return _three_figures(value / larger_scale) + larger_suffix
            return rendered + suffix
    rendered = _three_figures(value)
    if abs(float(rendered)) >= 1000:
        return _three_figures(value / 1e3) + "K"
    return rendered


def format_sig(value: Optional[float]) -> str:
    """Plain 3-significant-figure rendering (scientific for large magnitudes)."""
    if value is None or not math.isfinite(value):
        return "NA"
    return f"{value:.3g}"


def format_usd(value: Optional[float]) -> str:
    if value is None or not math.isfinite(value):
        return "NA"
    return "$" + format_si(value)


def format_percent(fraction: Optional[float]) -> str:
    if fraction is None or not math.isfinite(fraction):
        return "NA"
    return f"{100.0 * fraction:.3g}%"


def render_table(headers: Sequence[str], rows: List[Sequence[str]], title: str = "") -> str:
    """Left-aligned plain-text table; cells are expected pre-formatted."""
    frame = pd.DataFrame([list(row) for row in rows], columns=list(headers))
    body = frame.to_string(index=False, justify="left")
    return f"{title}\n{body}" if title else body


def render_pairs(pairs: Sequence[Sequence[str]], title: str = "") -> str:
    """Two-column ``label: value`` block."""
    width = max((len(label) for label, _ in pairs), default=0)
    lines = [f"{label.ljust(width)}  {value}" for label, value in pairs]
    if title:
        lines.insert(0, title)
    return "\n".join(lines)
