import numpy as np
from behave import given, then, when
from features.test_helpers import get_current_scenario_context

from distractipy.configs.config_template import GeneratorConfig, SessionConfig
from distractipy.logics.session_generator import generate_synthetic_session
from distractipy.models.dtos.generator_dtos import GeneratorSpecDTO, SegmentSpecDTO
from distractipy.models.errors import BaseError
from distractipy.models.types.distraction_types import DistractionClassType


def _plan(*segments):
    return GeneratorSpecDTO(
        segments=tuple(
            SegmentSpecDTO(distraction_class=distraction, frame_count=count) for distraction, count in segments
        ),
        shuffle_distractions=False,
    )


@given("the default generator plan")
def step_given_default_plan(context):
    scenario_context = get_current_scenario_context(context)
    scenario_context.store("spec", GeneratorSpecDTO.from_config(GeneratorConfig(), SessionConfig()))


@given("a generator plan of {count:d} normal driving frames")
def step_given_normal_plan(context, count):
    scenario_context = get_current_scenario_context(context)
    scenario_context.store("spec", _plan((DistractionClassType.NORMAL_DRIVING, count)))


@given("a generator plan of {normal:d} normal driving frames and {drinking:d} drinking frames")
def step_given_mixed_plan(context, normal, drinking):
    scenario_context = get_current_scenario_context(context)
    spec = _plan((DistractionClassType.NORMAL_DRIVING, normal), (DistractionClassType.DRINKING, drinking))
    scenario_context.store("spec", spec)


@when("a session is generated from the plan with seed {seed:d}")
def step_when_generated(context, seed):
    scenario_context = get_current_scenario_context(context)
    try:
        scenario_context.store("session", generate_synthetic_session(scenario_context.get("spec"), seed))
    except BaseError as e:
        scenario_context.store("error", e)


@when("a session is generated from the plan with seed {seed:d} twice")
def step_when_generated_twice(context, seed):
    scenario_context = get_current_scenario_context(context)
    spec = scenario_context.get("spec")
    scenario_context.store("sessions", [generate_synthetic_session(spec, seed) for _ in range(2)])


@then("every class should make up its planned share of the labels within {tolerance:g}")
def step_then_class_shares(context, tolerance):
    scenario_context = get_current_scenario_context(context)
    spec = scenario_context.get("spec")
    labels = scenario_context.get("session").labels
    for distraction in DistractionClassType:
        planned = sum(s.frame_count for s in spec.segments if s.distraction_class == distraction) / spec.frame_count
        actual = float(np.mean(labels == distraction.value))
        assert abs(actual - planned) <= tolerance, f"{distraction.name}: planned {planned:.3f}, got {actual:.3f}"


@then('every label should be "{name}"')
def step_then_all_labels(context, name):
    scenario_context = get_current_scenario_context(context)
    labels = scenario_context.get("session").labels
    assert np.all(labels == DistractionClassType[name].value), f"Expected only {name}, got {np.unique(labels)}"


@then("the session should hold {count:d} frames")
def step_then_session_frames(context, count):
    scenario_context = get_current_scenario_context(context)
    session = scenario_context.get("session")
    assert session.depth.shape[0] == count, f"Expected {count} depth frames, got {session.depth.shape[0]}"
    assert len(session.face) == count, f"Expected {count} face records, got {len(session.face)}"


@then("both generated sessions should be identical")
def step_then_sessions_identical(context):
    scenario_context = get_current_scenario_context(context)
    first, second = scenario_context.get("sessions")
    assert np.array_equal(first.depth, second.depth), "Depth frames differ"
    assert np.array_equal(first.eyes, second.eyes), "Eye patches differ"
    assert np.array_equal(first.labels, second.labels), "Labels differ"
    assert np.array_equal(first.background, second.background), "Backgrounds differ"
    assert first.face == second.face, "Face records differ"
