import json

import numpy as np
from behave import given, then, when
from features.test_helpers import get_current_scenario_context, render_disk_patch

from distractipy.logics.eye_behavior import locate_iris


@given("{count:d} noisy open-eye patches with seed {seed:d}")
def step_given_noisy_patches(context, count, seed):
    scenario_context = get_current_scenario_context(context)
    rng = np.random.default_rng(seed)
    centers = rng.uniform(18.0, 42.0, size=(count, 2))
    radii = rng.uniform(6.0, 9.0, size=count)
    patches = [render_disk_patch(center, radius, noise=0.05, rng=rng) for center, radius in zip(centers, radii)]
    scenario_context.store("patches", patches)
    scenario_context.store("centers", centers)


@when("the iris is located on every patch")
def step_when_located_everywhere(context):
    scenario_context = get_current_scenario_context(context)
    scenario_context.store("estimates", [locate_iris(patch) for patch in scenario_context.get("patches")])


@then("at least {percent:d} percent of the estimates should lie within {distance:d} pixels")
def step_then_located_share(context, percent, distance):
    scenario_context = get_current_scenario_context(context)
    estimated = np.asarray([estimate.center for estimate in scenario_context.get("estimates")], dtype=np.float64)
    offsets = np.abs(estimated - scenario_context.get("centers")).max(axis=1)
    share = float(np.mean(offsets <= distance))
    assert share * 100 >= percent, f"Only {share:.1%} of the estimates lie within {distance} pixels"


@then("every estimate should survive scaling intensities by {scale:f} and adding {shift:f}")
def step_then_affine_invariant(context, scale, shift):
    scenario_context = get_current_scenario_context(context)
    pairs = zip(scenario_context.get("patches"), scenario_context.get("estimates"), strict=True)
    for index, (patch, estimate) in enumerate(pairs):
        moved = locate_iris(scale * patch + shift).center
        assert moved == estimate.center, f"Patch {index}: {estimate.center} became {moved}"


def _report(scenario_context, name):
    return json.loads((scenario_context.workspace() / name / "report.json").read_text(encoding="utf-8"))


@then('the "{path}" {kind}-class accuracy in "{name}" should be at least {threshold:f}')
def step_then_accuracy_at_least(context, path, kind, name, threshold):
    scenario_context = get_current_scenario_context(context)
    field = {"five": "five_class_accuracy", "two": "two_class_accuracy"}[kind]
    accuracy = _report(scenario_context, name)[f"{path}_average"][field]
    assert accuracy >= threshold, f"{path} {kind}-class accuracy {accuracy:.4f} is below {threshold}"


@then('the "{path}" accuracies in "{name}" should be within {margin:f} of the "{reference}" ones')
def step_then_accuracies_close(context, path, name, margin, reference):
    scenario_context = get_current_scenario_context(context)
    report = _report(scenario_context, name)
    for field in ("five_class_accuracy", "two_class_accuracy"):
        actual = report[f"{path}_average"][field]
        expected = report[f"{reference}_average"][field]
        assert actual >= expected - margin, f"{path} {field} {actual:.4f} trails {reference} {expected:.4f}"
