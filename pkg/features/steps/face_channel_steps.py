import numpy as np
from behave import given, then, when
from features.test_helpers import get_current_scenario_context
from pydantic import ValidationError

from distractipy.logics.face_channel import face_stream
from distractipy.models.dtos.session_dtos import FaceChannelRecordDTO

CORNERS = (200.0, 240.0, 240.0, 240.0, 320.0, 240.0, 280.0, 240.0)


def _tracked_record(yaw=-5.0):
    return FaceChannelRecordDTO(
        tracked=True,
        pitch=10.0,
        roll=0.0,
        yaw=yaw,
        aus=(0.1, 0.4, 0.0, 0.2),
        eye_corners=CORNERS,
    )


@given('a face stream "{states}"')
def step_given_face_stream(context, states):
    scenario_context = get_current_scenario_context(context)
    records = [
        _tracked_record() if state == "tracked" else FaceChannelRecordDTO(tracked=False) for state in states.split()
    ]
    scenario_context.store("records", records)


@when("the face stream is gated")
def step_when_face_stream_gated(context):
    scenario_context = get_current_scenario_context(context)
    values, flags = face_stream(scenario_context.get("records"))
    scenario_context.store("values", values)
    scenario_context.store("flags", flags)


@then("frame {frame:d} should hold {values} with valid {valid}")
def step_then_frame_values(context, frame, values, valid):
    scenario_context = get_current_scenario_context(context)
    expected = np.array([float(value) for value in values.split(",")])
    actual = scenario_context.get("values")[frame]
    assert np.allclose(actual, expected, atol=1e-12), f"Expected {expected}, but got {actual}"
    flag = bool(scenario_context.get("flags")[frame])
    assert flag == (valid == "True"), f"Expected valid={valid}, but got {flag}"


@when("a tracked record with yaw {yaw:g} is built")
def step_when_out_of_range_record(context, yaw):
    scenario_context = get_current_scenario_context(context)
    try:
        _tracked_record(yaw=yaw)
    except ValidationError as e:
        scenario_context.store("error", e)
