"""
File loading utilities for fixtures, JSON documents and CSV tables.
"""

import json
import logging
import os
import tempfile
from typing import Any, Dict

import pandas as pd

from src.config.settings import settings
from src.core.errors import ConfigError

logger = logging.getLogger(__name__)


def _reject_constant(token: str) -> Any:
    raise ValueError(f"non-finite number {token!r} is not permitted")


def load_fixture(filename: str) -> Dict[str, Any]:
    """
    Load a JSON fixture from the fixtures directory.

    Args:
        filename: Name of the fixture file (can include subdirectory)

    Returns:
        Parsed fixture document
    """
    return load_json_document(os.path.join(settings.FIXTURES_DIR, filename))


def load_json_document(file_path: str) -> Dict[str, Any]:
    """
    Load a UTF-8 JSON object, rejecting NaN and Infinity.

    Args:
        file_path: Path to the document

    Returns:
        The top-level JSON object

    Raises:
        ConfigError: the document is not a JSON object or contains non-finite numbers
        OSError: the file cannot be read
    """
    with open(file_path, "r", encoding="utf-8") as f:
        text = f.read()
    return parse_json_document(text, source=file_path)


def parse_json_document(text: str, source: str = "<string>") -> Dict[str, Any]:
    """Parse a JSON object from text with the same rules as ``load_json_document``."""
    try:
        document = json.loads(text, parse_constant=_reject_constant)
    except ValueError as exc:
        raise ConfigError(f"{source}: {exc}") from exc
    if not isinstance(document, dict):
        raise ConfigError(f"{source}: expected a JSON object at the top level")
    return document


def dump_json(payload: Any) -> str:
    """Serialize a payload with full float precision; NaN/Inf are refused."""
    return json.dumps(payload, indent=2, allow_nan=False)


def load_csv_frame(file_path: str) -> pd.DataFrame:
    """
    Load a CSV table with every cell kept as text.

    Cells stay strings so callers can validate row by row and report the
    offending line instead of failing on the first bad value. Blank lines are
    kept as empty rows so row positions map to file lines.
    """
    return pd.read_csv(
        file_path,
        dtype=str,
        keep_default_na=False,
        skipinitialspace=True,
        skip_blank_lines=False,
    )


def write_atomic(file_path: str, content: str) -> None:
    """
    Write text to ``file_path`` in one step (write temp file, then rename).

    Raises:
        OSError: the destination directory is missing or not writable
    """
    directory = os.path.dirname(os.path.abspath(file_path))
    fd, tmp_path = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=".part")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as f:
            f.write(content)
        os.replace(tmp_path, file_path)
    except BaseException:
        if os.path.exists(tmp_path):
            os.unlink(tmp_path)
        raise
    logger.debug("Wrote %d bytes to %s", len(content), file_path)
