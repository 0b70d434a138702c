"""
Shared fixtures: default coefficients and cost config, synthetic run logs,
seeded randomness and a click runner.
"""

import numpy as np
import pandas as pd
import pytest
from click.testing import CliRunner

from src.core.cost_model import CostConfig
from src.core.fitting import RUN_LOG_COLUMNS, synthesize_runs
from src.core.scaling_law import Coefficients

# Wide design: sizes span four decades, ratios from 1 to 10,000 tokens/param.
SYNTHETIC_SIZES = (1e7, 1e8, 1e9, 1e10, 1e11)
SYNTHETIC_RATIOS = tuple(float(v) for v in np.geomspace(1.0, 1e4, 10))


def runs_to_csv(runs) -> str:
    """Render runs as a ``params,tokens,loss`` log."""
    frame = pd.DataFrame(
        [(run.params, run.train_tokens, run.final_loss) for run in runs],
        columns=list(RUN_LOG_COLUMNS),
    )
    return frame.to_csv(index=False)


@pytest.fixture
def coefficients() -> Coefficients:
    return Coefficients.default()


@pytest.fixture
def cost_config() -> CostConfig:
    return CostConfig.default()


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240101)


@pytest.fixture
def noiseless_runs(coefficients):
    """50 runs generated exactly from the default coefficients."""
    return synthesize_runs(coefficients, SYNTHETIC_SIZES, SYNTHETIC_RATIOS)


@pytest.fixture
def runner() -> CliRunner:
    return CliRunner()


@pytest.fixture
def write_text(tmp_path):
    """Write ``content`` to ``tmp_path / name`` and return the path as a string."""

    def _write(name: str, content: str) -> str:
        path = tmp_path / name
        path.write_text(content, encoding="utf-8")
        return str(path)

    return _write
