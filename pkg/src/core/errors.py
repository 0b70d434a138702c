"""
Exception hierarchy shared by the solvers, the fitter and the command line.

Every failure a caller can act on derives from ``PlannerError``; the command
line maps the whole family to exit code 3.
"""

from typing import Iterable, List


class PlannerError(Exception):
    """Base class for domain errors raised by the planner."""


class InvalidValue(PlannerError, ValueError):
    """A value violates the invariants of the type it was used to build."""


class UnachievableLoss(PlannerError):
    """The requested loss is at or below what the model family can reach."""


class NoConvergence(PlannerError):
    """An iterative method exhausted its budget without meeting its tolerance."""


class NoSignChange(PlannerError):
    """Bracketing failed: the root function never changed sign."""


class InsufficientData(PlannerError):
    """Too few (or too uniform) training runs to fit five coefficients."""


class ConfigError(PlannerError):
    """A JSON configuration or coefficient document is malformed."""


class RunLogError(PlannerError):
    """One or more run-log rows failed validation.

    ``problems`` keeps one ``"line N: ..."`` message per rejected row.
    """

    def __init__(self, problems: Iterable[str]):
        self.problems: List[str] = list(problems)
        super().__init__("invalid run log:\n" + "\n".join(self.problems))
