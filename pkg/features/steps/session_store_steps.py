from pathlib import Path

import numpy as np
import pandas as pd
from behave import given, then, when
from features.test_helpers import get_current_scenario_context, small_spec

from distractipy.adapters.session_store.adapters import DEPTH_DIR, FACE_FILE, PgmSessionStoreAdapter
from distractipy.adapters.session_store.mocks import SessionStoreMock
from distractipy.logics.session_generator import generate_synthetic_session
from distractipy.models.errors import BaseError, SessionFormatError


@given('a generated session "{driver_id}"/"{session_id}" with seed {seed:d}')
def step_given_generated_session(context, driver_id, session_id, seed):
    scenario_context = get_current_scenario_context(context)
    session = generate_synthetic_session(small_spec(driver_id, session_id, scale=0.01), seed)
    scenario_context.store("session", session)


@given("an empty session directory")
def step_given_empty_directory(context):
    scenario_context = get_current_scenario_context(context)
    path = scenario_context.workspace() / "empty"
    path.mkdir()
    scenario_context.store("path", path)


@when("the session is saved and loaded through the PGM store")
def step_when_saved_and_loaded(context):
    scenario_context = get_current_scenario_context(context)
    store = PgmSessionStoreAdapter()
    path = scenario_context.workspace() / "session"
    store.save_session(scenario_context.get("session"), path)
    scenario_context.store("loaded", store.load_session(path))


@when("the session is loaded through the PGM store")
def step_when_loaded(context):
    scenario_context = get_current_scenario_context(context)
    try:
        PgmSessionStoreAdapter().load_session(scenario_context.get("path"))
    except BaseError as e:
        scenario_context.store("error", e)


@when("the session is saved, one depth frame is deleted and the session is loaded")
def step_when_depth_frame_deleted(context):
    scenario_context = get_current_scenario_context(context)
    store = PgmSessionStoreAdapter()
    path = scenario_context.workspace() / "session"
    store.save_session(scenario_context.get("session"), path)
    sorted((path / DEPTH_DIR).glob("*.pgm"))[-1].unlink()
    try:
        store.load_session(path)
    except BaseError as e:
        scenario_context.store("error", e)


@when('the session is saved under "{first}" and "{second}"')
def step_when_saved_twice(context, first, second):
    scenario_context = get_current_scenario_context(context)
    store = PgmSessionStoreAdapter()
    root = scenario_context.workspace() / "root"
    for relative in (first, second):
        store.save_session(scenario_context.get("session"), root / relative)
    scenario_context.store("listed", [path.relative_to(root).as_posix() for path in store.list_sessions(root)])


@then("the loaded session should equal the generated one")
def step_then_sessions_equal(context):
    scenario_context = get_current_scenario_context(context)
    original = scenario_context.get("session")
    loaded = scenario_context.get("loaded")
    assert (loaded.driver_id, loaded.session_id) == (original.driver_id, original.session_id), "Identity differs"
    for field in ("background", "depth", "eyes", "labels"):
        assert np.array_equal(getattr(loaded, field), getattr(original, field)), f"{field} differs after reload"
    if original.eye_annotations is not None:
        assert np.allclose(loaded.eye_annotations, original.eye_annotations), "Eye annotations differ"
    for frame, (left, right) in enumerate(zip(loaded.face, original.face, strict=True)):
        assert left.tracked == right.tracked, f"Tracking flag differs at frame {frame}"
        if not left.tracked:
            continue
        assert np.allclose(left.aus, right.aus), f"Animation units differ at frame {frame}"
        assert np.isclose(left.yaw, right.yaw), f"Yaw differs at frame {frame}"


@then('the listed sessions should be "{first}" and "{second}"')
def step_then_listed_sessions(context, first, second):
    scenario_context = get_current_scenario_context(context)
    listed = scenario_context.get("listed")
    assert listed == [first, second], f"Expected {[first, second]}, but got {listed}"


@when('the session is saved in the in-memory store under "{path}"')
def step_when_saved_in_memory(context, path):
    scenario_context = get_current_scenario_context(context)
    store = SessionStoreMock()
    store.save_session(scenario_context.get("session"), Path(path))
    scenario_context.store("store", store)


@then('loading "{path}" from the in-memory store should return the same session')
def step_then_memory_load(context, path):
    scenario_context = get_current_scenario_context(context)
    loaded = scenario_context.get("store").load_session(Path(path))
    assert loaded is scenario_context.get("session"), "The in-memory store returned another session"


@then('loading "{path}" from the in-memory store should raise a session format error')
def step_then_memory_load_fails(context, path):
    scenario_context = get_current_scenario_context(context)
    try:
        scenario_context.get("store").load_session(Path(path))
    except SessionFormatError:
        return
    raise AssertionError(f"Loading {path} did not raise SessionFormatError")


@when('the session is saved, the yaw of the first tracked frame is set to "{value}" and the session is loaded')
def step_when_yaw_replaced(context, value):
    scenario_context = get_current_scenario_context(context)
    store = PgmSessionStoreAdapter()
    path = scenario_context.workspace() / "session"
    store.save_session(scenario_context.get("session"), path)
    table = pd.read_csv(path / FACE_FILE)
    first_tracked = int(np.flatnonzero(table["tracked"].to_numpy() == 1)[0])
    table.loc[first_tracked, "yaw"] = float(value)
    table.to_csv(path / FACE_FILE, index=False, lineterminator="\n")
    try:
        store.load_session(path)
    except BaseError as e:
        scenario_context.store("error", e)
