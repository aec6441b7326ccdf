import pytest

from semnav import errors


def test_every_error_derives_from_the_package_base():
    names = [
        "InvalidInput",
        "OutOfBounds",
        "PlanningError",
        "NoPath",
        "GoalUnreachable",
        "ExpansionBudgetExceeded",
        "ScenarioSyntaxError",
        "ScenarioValidationError",
        "InternalError",
    ]
    for name in names:
        cls = getattr(errors, name)
        assert issubclass(cls, errors.SemnavError)


def test_planning_failures_share_a_base():
    for cls in (errors.NoPath, errors.GoalUnreachable, errors.ExpansionBudgetExceeded):
        assert issubclass(cls, errors.PlanningError)
    assert not issubclass(errors.ScenarioValidationError, errors.PlanningError)


def test_invalid_input_is_also_a_value_error():
    # callers using stdlib idioms still catch precondition failures
    with pytest.raises(ValueError):
        raise errors.InvalidInput("bad")


def test_one_except_clause_covers_the_package():
    for cls in (errors.NoPath, errors.OutOfBounds, errors.ScenarioSyntaxError):
        try:
            raise cls("boom")
        except errors.SemnavError as e:
            assert "boom" in str(e)
