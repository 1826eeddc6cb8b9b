import os

from behave import given, then, when
from features.test_helpers import get_current_scenario_context
from pydantic import ValidationError

from distractipy.configs.base_config import BaseConfig


def _lookup(config, dotted):
    value = config
    for part in dotted.split("."):
        value = getattr(value, part)
    return value


@given("a fresh configuration")
@when("a fresh configuration is loaded")
def step_fresh_configuration(context):
    scenario_context = get_current_scenario_context(context)
    scenario_context.store("config", BaseConfig())


@given("a configuration built with HMM state count {count:d}")
def step_given_config_with_states(context, count):
    scenario_context = get_current_scenario_context(context)
    scenario_context.store("config", BaseConfig(HMM={"STATE_COUNT": count}))


@given('the environment variable "{name}" is "{value}"')
def step_given_environment_variable(context, name, value):
    previous = os.environ.get(name)
    os.environ[name] = value

    def restore():
        if previous is None:
            os.environ.pop(name, None)
        else:
            os.environ[name] = previous

    context.add_cleanup(restore)


@when("a configuration is built with no feature groups")
def step_when_config_without_groups(context):
    scenario_context = get_current_scenario_context(context)
    try:
        BaseConfig(FUSION={"FEATURE_GROUPS": []})
        scenario_context.store("error", None)
    except ValidationError as e:
        scenario_context.store("error", e)


@when("it is set as the global configuration")
def step_when_set_global(context):
    scenario_context = get_current_scenario_context(context)
    BaseConfig.set_global(scenario_context.get("config"))


@then('the config value "{path}" should be "{expected}"')
def step_then_config_value(context, path, expected):
    scenario_context = get_current_scenario_context(context)
    actual = _lookup(scenario_context.get("config"), path)
    assert str(actual) == expected, f"Expected {path}={expected}, but got {actual}"


@then("a validation error should be raised")
def step_then_validation_error(context):
    scenario_context = get_current_scenario_context(context)
    assert isinstance(scenario_context.get("error"), ValidationError), "Expected a validation error"


@then("the global HMM state count should be {count:d}")
def step_then_global_states(context, count):
    actual = BaseConfig.global_config().HMM.STATE_COUNT
    assert actual == count, f"Expected {count}, but got {actual}"
