import numpy as np
import pandas as pd
from behave import given, then, when
from features.test_helpers import fast_config, get_current_scenario_context

from distractipy.logics.evaluation import (
    binary_collapse,
    confusion_matrix,
    driver_result,
    loso_cross_validation,
    path_average,
    per_class_metrics,
    total_average_accuracy,
    write_report,
)
from distractipy.logics.pipeline import predict_session, train_fold
from distractipy.models.dtos.evaluation_dtos import EvaluationReportDTO
from distractipy.models.dtos.pipeline_dtos import SessionObservationsDTO, SessionPredictionDTO
from distractipy.models.errors import BaseError
from distractipy.models.types.distraction_types import DistractionClassType


def _codes(text):
    return np.asarray([int(code) for code in text.split()], dtype=np.int64)


def _empty_observations(driver_id, session_id, frames):
    return SessionObservationsDTO(
        driver_id=driver_id,
        session_id=session_id,
        labels=np.zeros(frames, dtype=np.int64),
        arm_features=np.zeros((frames, 120)),
        arm_valid=np.zeros(frames, dtype=bool),
        iris_centers=np.zeros((frames, 2, 2)),
        gaze=np.zeros((frames, 4)),
        eyes_valid=np.zeros(frames, dtype=bool),
        templates=np.zeros((frames, 2, 24, 24)),
        face=np.zeros((frames, 7)),
        face_valid=np.zeros(frames, dtype=bool),
    )


@given("{total:d} frames of which {correct:d} are predicted correctly")
def step_given_accuracy_frames(context, total, correct):
    scenario_context = get_current_scenario_context(context)
    truth = np.arange(total) % 5
    predicted = truth.copy()
    predicted[correct:] = (predicted[correct:] + 1) % 5
    scenario_context.store("truth", truth)
    scenario_context.store("predicted", predicted)


@then("the total average accuracy should be {expected:g}")
def step_then_total_accuracy(context, expected):
    scenario_context = get_current_scenario_context(context)
    actual = total_average_accuracy(scenario_context.get("predicted"), scenario_context.get("truth"))
    assert abs(actual - expected) <= 1e-12, f"Expected {expected}, but got {actual}"


@given(
    'phone call truth of {phone:d} frames predicted as "{phone_predicted}" '
    'and normal driving truth of {normal:d} frames predicted as "{normal_predicted}"',
)
def step_given_confusion_frames(context, phone, phone_predicted, normal, normal_predicted):
    scenario_context = get_current_scenario_context(context)
    truth = np.concatenate(
        [
            np.full(phone, DistractionClassType.PHONE_CALL.value),
            np.full(normal, DistractionClassType.NORMAL_DRIVING.value),
        ],
    )
    predicted = np.concatenate([_codes(phone_predicted), _codes(normal_predicted)])
    scenario_context.store("matrix", confusion_matrix(predicted, truth))


@when('the metrics of class "{class_name}" are computed')
def step_when_class_metrics(context, class_name):
    scenario_context = get_current_scenario_context(context)
    code = DistractionClassType[class_name].value
    scenario_context.store("metrics", per_class_metrics(scenario_context.get("matrix"), code))


@then('the "{metric}" should be {expected:g}')
def step_then_metric_value(context, metric, expected):
    scenario_context = get_current_scenario_context(context)
    actual = getattr(scenario_context.get("metrics"), metric)
    assert actual is not None and abs(actual - expected) <= 5e-5, f"Expected {metric}={expected}, but got {actual}"


@then('the "{metric}" should be undefined')
def step_then_metric_undefined(context, metric):
    scenario_context = get_current_scenario_context(context)
    actual = getattr(scenario_context.get("metrics"), metric)
    assert actual is None, f"Expected {metric} to be undefined, but got {actual}"


@when('the labels "{labels}" are collapsed to two classes')
def step_when_labels_collapsed(context, labels):
    scenario_context = get_current_scenario_context(context)
    scenario_context.store("collapsed", binary_collapse(_codes(labels)))


@then('the collapsed labels should be "{labels}"')
def step_then_collapsed_labels(context, labels):
    scenario_context = get_current_scenario_context(context)
    actual = scenario_context.get("collapsed").tolist()
    assert actual == _codes(labels).tolist(), f"Expected {labels}, but got {actual}"


@given('a driver "{driver_id}" with truth "{truth}" predicted as "{predicted}"')
def step_given_driver_predictions(context, driver_id, truth, predicted):
    scenario_context = get_current_scenario_context(context)
    prediction = SessionPredictionDTO(
        driver_id=driver_id,
        session_id="session00",
        truth=_codes(truth),
        adaboost=_codes(predicted),
    )
    rows = scenario_context.get("rows", [])
    rows.append(driver_result(driver_id, [prediction]))
    scenario_context.store("rows", rows)


@when("the drivers are averaged")
def step_when_drivers_averaged(context):
    scenario_context = get_current_scenario_context(context)
    rows = scenario_context.get("rows")
    report = EvaluationReportDTO(
        seed=0,
        feature_groups=("ARM", "EYES", "ORIENTATION", "EXPRESSION"),
        drivers=tuple(rows),
        adaboost_average=path_average([row.adaboost for row in rows]),
    )
    scenario_context.store("report", report)


@then("the average five-class accuracy should be {expected:g}")
def step_then_average_accuracy(context, expected):
    scenario_context = get_current_scenario_context(context)
    actual = scenario_context.get("report").adaboost_average.five_class_accuracy
    assert abs(actual - expected) <= 1e-12, f"Expected {expected}, but got {actual}"


@then('the average "{metric}" of class "{class_name}" should be {expected:g}')
def step_then_average_metric(context, metric, class_name, expected):
    scenario_context = get_current_scenario_context(context)
    per_class = scenario_context.get("report").adaboost_average.per_class
    metrics = next(item for item in per_class if item.class_name == class_name)
    actual = getattr(metrics, metric)
    assert actual is not None and abs(actual - expected) <= 1e-12, f"Expected {expected}, but got {actual}"


@when("the report is written")
def step_when_report_written(context):
    scenario_context = get_current_scenario_context(context)
    write_report(scenario_context.get("report"), scenario_context.workspace())


@then("report.json should read back as the same report")
def step_then_report_round_trip(context):
    scenario_context = get_current_scenario_context(context)
    raw = (scenario_context.workspace() / "report.json").read_text(encoding="utf-8")
    loaded = EvaluationReportDTO.model_validate_json(raw)
    original = scenario_context.get("report")
    assert loaded.model_dump_json() == original.model_dump_json(), "Report changed after reading it back"


@then('overall.csv should hold the rows "{drivers}"')
def step_then_overall_rows(context, drivers):
    scenario_context = get_current_scenario_context(context)
    table = pd.read_csv(scenario_context.workspace() / "overall.csv")
    actual = table["driver"].tolist()
    assert actual == drivers.split(), f"Expected {drivers.split()}, but got {actual}"


@then("per_class.csv should hold {count:d} rows")
def step_then_per_class_rows(context, count):
    scenario_context = get_current_scenario_context(context)
    table = pd.read_csv(scenario_context.workspace() / "per_class.csv")
    assert len(table) == count, f"Expected {count} rows, but got {len(table)}"


@given("observations of a single driver")
def step_given_single_driver(context):
    scenario_context = get_current_scenario_context(context)
    observations = [_empty_observations("driver00", f"session0{index}", 5) for index in range(2)]
    scenario_context.store("observations", observations)


@when("cross-validation is run")
def step_when_cross_validation(context):
    scenario_context = get_current_scenario_context(context)
    try:
        loso_cross_validation(scenario_context.get("observations"), seed=0)
    except BaseError as e:
        scenario_context.store("error", e)


def _class_observations(driver_id, session_id, rng, frames_per_class=40):
    """Observations whose arm and face values depend on the class of each frame."""
    order = [
        DistractionClassType.NORMAL_DRIVING,
        DistractionClassType.PHONE_CALL,
        DistractionClassType.DRINKING,
        DistractionClassType.TEXT_MESSAGE,
        DistractionClassType.OBJECT_DISTRACTION,
    ]
    labels = np.repeat([distraction.value for distraction in order], frames_per_class).astype(np.int64)
    frames = labels.size
    poses = np.array([DistractionClassType(int(code)).arm_pose.value for code in labels])
    observations = _empty_observations(driver_id, session_id, frames)
    arm = np.eye(4)[poses].repeat(30, axis=1) + rng.normal(0.0, 0.3, size=(frames, 120))
    face = 0.5 * labels[:, None] + rng.normal(0.0, 0.2, size=(frames, 7))
    return observations.model_copy(
        update={
            "labels": labels,
            "arm_features": arm,
            "arm_valid": np.ones(frames, dtype=bool),
            "face": face,
            "face_valid": np.ones(frames, dtype=bool),
        },
    )


@given("synthetic observations of {count:d} drivers sharing seed {seed:d}")
def step_given_identical_drivers(context, count, seed):
    scenario_context = get_current_scenario_context(context)
    observations = [
        _class_observations(f"driver{index:02d}", "session00", np.random.default_rng(seed)) for index in range(count)
    ]
    scenario_context.store("observations", observations)


@given("synthetic observations of {count:d} drivers with seed {seed:d}")
def step_given_distinct_drivers(context, count, seed):
    scenario_context = get_current_scenario_context(context)
    rng = np.random.default_rng(seed)
    observations = [_class_observations(f"driver{index:02d}", "session00", rng) for index in range(count)]
    scenario_context.store("observations", observations)


@when("cross-validation is run with the fast configuration")
def step_when_fast_cross_validation(context):
    scenario_context = get_current_scenario_context(context)
    report = loso_cross_validation(scenario_context.get("observations"), seed=0, config=fast_config())
    scenario_context.store("report", report)


@when("the first driver's sessions are labelled by a pipeline trained on them")
def step_when_same_driver_labelled(context):
    scenario_context = get_current_scenario_context(context)
    first = scenario_context.get("observations")[:1]
    pipeline = train_fold(first, 0, fast_config())
    result = driver_result(first[0].driver_id, [predict_session(pipeline, item) for item in first])
    scenario_context.store("same_driver", result)


@then("every held-out accuracy should be within {tolerance:g} of the same-driver accuracy")
def step_then_held_out_matches(context, tolerance):
    scenario_context = get_current_scenario_context(context)
    same = scenario_context.get("same_driver")
    for row in scenario_context.get("report").drivers:
        for path in ("adaboost", "hmm"):
            held_out = getattr(row, path).five_class_accuracy
            reference = getattr(same, path).five_class_accuracy
            assert abs(held_out - reference) <= tolerance, f"{row.driver_id} {path}: {held_out} vs {reference}"


@then("the report should hold {count:d} driver rows")
def step_then_driver_rows(context, count):
    scenario_context = get_current_scenario_context(context)
    rows = scenario_context.get("report").drivers
    assert len(rows) == count, f"Expected {count} driver rows, but got {len(rows)}"


@then("every path average should equal the mean of the driver rows within {tolerance:g}")
def step_then_averages_are_means(context, tolerance):
    scenario_context = get_current_scenario_context(context)
    report = scenario_context.get("report")
    for path in ("adaboost", "hmm"):
        average = getattr(report, f"{path}_average")
        rows = [getattr(row, path) for row in report.drivers]
        for metric in ("five_class_accuracy", "two_class_accuracy"):
            expected = float(np.mean([getattr(row, metric) for row in rows]))
            actual = getattr(average, metric)
            assert abs(actual - expected) <= tolerance, f"{path} {metric}: {actual} vs {expected}"
