"""
Central registry for discovering and attaching command-line commands.

Scans the commands package for modules exposing a ``DEFINITION`` dict and a
click ``command``, and registers them on the top-level click group.
"""

import importlib
import logging
import pkgutil
from types import ModuleType
from typing import Dict, Generator, List

import click

logger = logging.getLogger(__name__)


class CommandRegistry:
    """
    Discovers command modules (``DEFINITION`` + ``command``) and attaches
    them to a click group under the name given in their definition.
    """

    PREFERRED_PACKAGE = "src.commands"

    def __init__(self, package_name: str = PREFERRED_PACKAGE) -> None:
        self.package_name = package_name
        self.commands: Dict[str, click.Command] = {}
        self.definitions: List[dict] = []
        self.reload_commands()

    # --------------------------------------------------------
    # Module Discovery
    # --------------------------------------------------------

    @staticmethod
    def _iter_modules_in_package(package_name: str) -> Generator[ModuleType, None, None]:
        """Yield imported modules for all public children of a package."""
        try:
            package = importlib.import_module(package_name)
        except ModuleNotFoundError:
            logger.warning("Package '%s' not found.", package_name)
            return

        package_path = getattr(package, "__path__", None)
        if not package_path:
            logger.debug("Package '%s' has no __path__, skipping.", package_name)
            return

        for module_info in sorted(pkgutil.iter_modules(package_path), key=lambda m: m.name):
            if module_info.name.startswith("_"):
                continue
            yield importlib.import_module(f"{package_name}.{module_info.name}")

    # --------------------------------------------------------
    # Command Loading
    # --------------------------------------------------------

    def _load_commands(self) -> Dict[str, click.Command]:
        commands: Dict[str, click.Command] = {}
        definitions: List[dict] = []

        for mod in self._iter_modules_in_package(self.package_name):
            definition = getattr(mod, "DEFINITION", None)
            command = getattr(mod, "command", None)
            if not isinstance(command, click.Command):
                logger.debug("Module '%s' has no click 'command'.", mod.__name__)
                continue

            name = (
                    isinstance(definition, dict) and definition.get("name")
            ) or mod.__name__.rsplit(".", 1)[-1].replace("_", "-")
            if name in commands:
                raise RuntimeError(f"duplicate command name '{name}' in {mod.__name__}")

            commands[name] = command
            definitions.append({"name": name, **(definition or {})})
            logger.debug("Registered command '%s' from %s.", name, mod.__name__)

        self.definitions = definitions
        return commands

    def reload_commands(self) -> None:
        """Rescan the package."""
        self.commands = self._load_commands()

    def register(self, group: click.Group) -> click.Group:
        """Attach every discovered command to ``group``."""
        for name, command in self.commands.items():
            group.add_command(command, name=name)
        return group
