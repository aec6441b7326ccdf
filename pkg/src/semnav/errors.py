"""Exception types shared across the package."""


class SemnavError(Exception):
    """Base class for every error raised by this package."""


class InvalidInput(SemnavError, ValueError):
    """An argument violates a documented precondition."""


class OutOfBounds(SemnavError):
    """A world coordinate falls outside the grid extent."""


class PlanningError(SemnavError):
    """Base class for global planning failures."""


class NoPath(PlanningError):
    """The search exhausted every reachable cell without touching the goal."""


class GoalUnreachable(PlanningError):
    """Start or goal could not be snapped to a free cell."""


class ExpansionBudgetExceeded(PlanningError):
    """The search gave up after expanding more cells than allowed."""


class ScenarioSyntaxError(SemnavError):
    """Scenario file is not valid JSON."""


class ScenarioValidationError(SemnavError):
    """Scenario JSON parsed but violates the schema or semantic checks."""


class InternalError(SemnavError):
    """An internal consistency check failed."""
