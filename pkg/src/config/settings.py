"""
Configuration settings for the scaling planner.
Store paths, logging options and operational limits here.
"""

import logging
import os

from dotenv import load_dotenv

logger = logging.getLogger(__name__)


class Settings:
    """Configuration settings for the scaling planner."""

    def __init__(self):
        # Resolve the path to the project root (two levels above this file)
        self.BASE_DIR = os.path.abspath(
            os.path.join(os.path.dirname(__file__), os.pardir, os.pardir)
        )

        # Define the .env file path
        self.ENV_PATH = os.path.join(self.BASE_DIR, ".env")

        # Load environment variables
        self._load_environment()

        # Logging Configuration (diagnostics only, never changes a computed value)
        self.LOG_LEVEL = os.getenv("LOG_LEVEL", "WARNING").upper()
        self.LOG_FORMAT = os.getenv("LOG_FORMAT")

        # Application Configuration
        self.APP_TITLE = "Inference-aware scaling planner"
        self.APP_NAME = "scaling-planner"

        # Paths
        self.FIXTURES_DIR = os.path.join(
            os.path.dirname(os.path.dirname(__file__)), "fixtures"
        )
        self.PUBLISHED_TABLES_PATH = os.path.join(self.FIXTURES_DIR, "published_tables.json")
        self.COEFFICIENT_PRESETS_PATH = os.path.join(
            self.FIXTURES_DIR, "coefficient_presets.json"
        )

        # Sweep Configuration
        self.SWEEP_MAX_CELLS = 1_000_000
        self.DEFAULT_SWEEP_POINTS = 20

    def _load_environment(self):
        """Load environment variables from .env file."""
        if os.path.exists(self.ENV_PATH):
            load_dotenv(dotenv_path=self.ENV_PATH)
            logger.debug("Environment loaded from: %s", self.ENV_PATH)
        else:
            logger.debug(".env file not found at %s, using defaults", self.ENV_PATH)

    @property
    def log_level(self) -> int:
        """Numeric logging level, falling back to WARNING for unknown names."""
        level = logging.getLevelName(self.LOG_LEVEL)
        return level if isinstance(level, int) else logging.WARNING


# Create a singleton instance
settings = Settings()
