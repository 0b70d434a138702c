"""
Command-line entry point for the scaling planner.
"""

import logging

import click

from src.config.settings import settings
from src.core.command_registry import CommandRegistry
from src.utils.logger import setup_logger


@click.group(help=settings.APP_TITLE)
@click.option("--verbose", "-v", is_flag=True, help="Log at DEBUG level on stderr.")
def cli(verbose: bool) -> None:
    # Logging never changes a computed value, only what reaches stderr.
    level = logging.DEBUG if verbose else settings.log_level
    setup_logger("src", level=level, format_string=settings.LOG_FORMAT)


CommandRegistry().register(cli)


def main():
    """Main application entry point."""
    cli(prog_name=settings.APP_NAME)


if __name__ == "__main__":
    main()
