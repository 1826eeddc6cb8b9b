from behave import given, then, when
from features.test_helpers import get_current_scenario_context

from distractipy.models.errors import InternalError, SessionFormatError
from distractipy.models.types.error_message_types import ErrorMessageType


@given('an error type "{error_type}"')
def step_given_error_type(context, error_type):
    scenario_context = get_current_scenario_context(context)
    scenario_context.store("error_detail", ErrorMessageType[error_type].value)


@then('the error code should be "{expected_code}"')
def step_then_error_code(context, expected_code):
    scenario_context = get_current_scenario_context(context)
    error_detail = scenario_context.get("error_detail")
    assert error_detail.code == expected_code, f"Expected '{expected_code}', but got '{error_detail.code}'"


@then("the exit status should be {exit_code:d}")
def step_then_exit_status(context, exit_code):
    scenario_context = get_current_scenario_context(context)
    error_detail = scenario_context.get("error_detail")
    assert error_detail.exit_code == exit_code, f"Expected {exit_code}, but got {error_detail.exit_code}"


@when('a session format error is raised for "{file_name}" because "{reason}"')
def step_when_session_format_error(context, file_name, reason):
    scenario_context = get_current_scenario_context(context)
    try:
        raise SessionFormatError(file_name=file_name, reason=reason)
    except SessionFormatError as e:
        scenario_context.store("error", e)


@when("an internal error is raised without details")
def step_when_internal_error(context):
    scenario_context = get_current_scenario_context(context)
    try:
        raise InternalError()
    except InternalError as e:
        scenario_context.store("error", e)


@then('the error string should be "{expected}"')
def step_then_error_string(context, expected):
    scenario_context = get_current_scenario_context(context)
    error = scenario_context.get("error")
    assert str(error) == expected, f"Expected '{expected}', but got '{error}'"


@then('the error dictionary should contain "{key}" with value "{value}"')
def step_then_error_dictionary(context, key, value):
    scenario_context = get_current_scenario_context(context)
    detail = scenario_context.get("error").to_dict()["detail"]
    assert detail.get(key) == value, f"Expected {key}={value}, but got {detail}"


@then('a "{error_class}" error should have been raised')
def step_then_error_raised(context, error_class):
    scenario_context = get_current_scenario_context(context)
    error = scenario_context.get("error")
    assert error is not None, f"Expected {error_class}, but nothing was raised"
    assert type(error).__name__ == error_class, f"Expected {error_class}, but got {type(error).__name__}: {error}"
