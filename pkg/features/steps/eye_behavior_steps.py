import numpy as np
from behave import given, then, when
from features.test_helpers import get_current_scenario_context, render_disk_patch

from distractipy.configs.config_template import EyeConfig
from distractipy.logics.eye_behavior import (
    DEFAULT_FILTER_BANK,
    IrisTracker,
    gabor_kernel,
    gabor_response,
    gaze_features,
    hough_response,
    iris_template,
    locate_iris,
    separability_from_means,
    separability_masks,
    separability_response,
    temporal_consistency,
)
from distractipy.models.dtos.eye_dtos import IrisEstimateDTO
from distractipy.models.dtos.session_dtos import FaceChannelRecordDTO
from distractipy.models.errors import BaseError


def _point(text):
    x, y = (int(value) for value in text.split(","))
    return x, y


def _response_peak(response):
    row, column = np.unravel_index(int(np.argmax(response)), response.shape)
    return int(column), int(row)


def _direct_separability(patch, params):
    masks = separability_masks(params)
    outer = params.mask_r23
    height, width = patch.shape
    padded = np.pad(patch, outer)
    inside = np.pad(np.ones_like(patch), outer)
    result = np.zeros_like(patch)
    for y in range(height):
        for x in range(width):
            window = padded[y : y + 2 * outer + 1, x : x + 2 * outer + 1]
            present = inside[y : y + 2 * outer + 1, x : x + 2 * outer + 1]
            means = [window[mask].sum() / max(present[mask].sum(), 1.0) for mask in masks]
            result[y, x] = separability_from_means(*means, epsilon=params.separability_epsilon)
    return result


@given("a uniform {width:d}x{height:d} patch of intensity {value:f}")
def step_given_uniform_patch(context, width, height, value):
    scenario_context = get_current_scenario_context(context)
    scenario_context.store("patch", np.full((height, width), value))


@given("a random {width:d}x{height:d} patch with seed {seed:d}")
def step_given_random_patch(context, width, height, seed):
    scenario_context = get_current_scenario_context(context)
    scenario_context.store("patch", np.random.default_rng(seed).uniform(0.0, 1.0, size=(height, width)))


@given("a {size:d}x{other:d} patch with a dark disk of radius {radius:d} at {cx:d},{cy:d}")
def step_given_disk_patch(context, size, other, radius, cx, cy):
    scenario_context = get_current_scenario_context(context)
    scenario_context.store("patch", render_disk_patch((cx, cy), radius, size=size))


@given("a {size:d}x{other:d} patch with a dark disk of radius {radius:d} at {cx:d},{cy:d} and noise {noise:f}")
def step_given_noisy_disk_patch(context, size, other, radius, cx, cy, noise):
    scenario_context = get_current_scenario_context(context)
    patch = render_disk_patch((cx, cy), radius, size=size, noise=noise, rng=np.random.default_rng(6))
    scenario_context.store("patch", patch)


@given(
    "a {size:d}x{other:d} patch with a dark disk of radius {radius:d} at {sx:d},{sy:d} "
    "and a faint disk of radius {faint_radius:d} at {fx:d},{fy:d}",
)
def step_given_two_disk_patch(context, size, other, radius, sx, sy, faint_radius, fx, fy):
    scenario_context = get_current_scenario_context(context)
    dark = render_disk_patch((sx, sy), radius, size=size, iris=0.1)
    light = render_disk_patch((fx, fy), faint_radius, size=size, iris=0.6)
    scenario_context.store("patch", np.minimum(dark, light))


@given("a black and white {size:d}x{other:d} patch with a dark disk of radius {radius:g} at {cx:d},{cy:d}")
def step_given_black_and_white_disk_patch(context, size, other, radius, cx, cy):
    scenario_context = get_current_scenario_context(context)
    scenario_context.store("patch", render_disk_patch((cx, cy), radius, size=size, iris=0.0, sclera=1.0))


@then("the response should vary by at most {tolerance:g} more than {margin:d} pixels from the border")
def step_then_interior_constant(context, tolerance, margin):
    scenario_context = get_current_scenario_context(context)
    interior = scenario_context.get("response")[margin:-margin, margin:-margin]
    assert interior.size, "The patch has no interior"
    spread = float(interior.max() - interior.min())
    assert spread <= tolerance, f"Interior response varies by {spread:.3e}"


@then("the response at {center} should be a local maximum")
def step_then_local_maximum(context, center):
    scenario_context = get_current_scenario_context(context)
    response = scenario_context.get("response")
    x, y = _point(center)
    neighbourhood = response[y - 1 : y + 2, x - 1 : x + 2]
    assert response[y, x] >= neighbourhood.max(), f"{response[y, x]} is below a neighbour {neighbourhood.max()}"


@when("the Hough response is computed")
def step_when_hough(context):
    scenario_context = get_current_scenario_context(context)
    scenario_context.store("response", hough_response(scenario_context.get("patch")))


@when("the Gabor response is computed")
def step_when_gabor(context):
    scenario_context = get_current_scenario_context(context)
    scenario_context.store("response", gabor_response(scenario_context.get("patch")))


@when("the separability response is computed")
def step_when_separability(context):
    scenario_context = get_current_scenario_context(context)
    scenario_context.store("response", separability_response(scenario_context.get("patch")))


@then("the response should be zero everywhere")
def step_then_response_zero(context):
    scenario_context = get_current_scenario_context(context)
    largest = float(np.abs(scenario_context.get("response")).max())
    assert largest <= 1e-9, f"Expected a zero response, but got up to {largest}"


@then("the response maximum should lie within {distance:d} pixel of {center}")
def step_then_response_peak(context, distance, center):
    scenario_context = get_current_scenario_context(context)
    peak = _response_peak(scenario_context.get("response"))
    expected = _point(center)
    offset = max(abs(peak[0] - expected[0]), abs(peak[1] - expected[1]))
    assert offset <= distance, f"Expected the peak near {expected}, but got {peak}"


@when("the default Gabor kernel is built")
def step_when_gabor_kernel(context):
    scenario_context = get_current_scenario_context(context)
    scenario_context.store("kernel", gabor_kernel())


@then("its center value should be 1 over the square root of 2 pi times 4.5 squared")
def step_then_gabor_center(context):
    scenario_context = get_current_scenario_context(context)
    kernel = scenario_context.get("kernel")
    half = kernel.shape[0] // 2
    expected = 1.0 / np.sqrt(2.0 * np.pi * 4.5**2)
    assert abs(kernel[half, half] - expected) <= 1e-12, f"Expected {expected}, but got {kernel[half, half]}"


@when("the separability of means {c1:d}, {c2:d} and {c3:d} is computed")
def step_when_separability_of_means(context, c1, c2, c3):
    scenario_context = get_current_scenario_context(context)
    scenario_context.store("separability", float(separability_from_means(c1, c2, c3)))


@then("the separability should be {expected:g}")
def step_then_separability(context, expected):
    scenario_context = get_current_scenario_context(context)
    actual = scenario_context.get("separability")
    assert abs(actual - expected) <= 1e-12, f"Expected {expected}, but got {actual}"


@then("the response should match a direct region average within {tolerance:g}")
def step_then_separability_matches(context, tolerance):
    scenario_context = get_current_scenario_context(context)
    expected = _direct_separability(scenario_context.get("patch"), DEFAULT_FILTER_BANK)
    error = float(np.abs(scenario_context.get("response") - expected).max())
    assert error <= tolerance, f"Largest difference {error:.3e} exceeds {tolerance}"


@when("the iris is located")
def step_when_iris_located(context):
    scenario_context = get_current_scenario_context(context)
    scenario_context.store("estimate", locate_iris(scenario_context.get("patch")))


@when("the iris is located before and after scaling intensities by {scale:f} and adding {shift:f}")
def step_when_iris_located_affine(context, scale, shift):
    scenario_context = get_current_scenario_context(context)
    patch = scenario_context.get("patch")
    scenario_context.store("estimates", [locate_iris(patch), locate_iris(scale * patch + shift)])


@then("the iris center should lie within {distance:d} pixels of {center}")
def step_then_iris_near(context, distance, center):
    scenario_context = get_current_scenario_context(context)
    actual = scenario_context.get("estimate").center
    expected = _point(center)
    offset = max(abs(actual[0] - expected[0]), abs(actual[1] - expected[1]))
    assert offset <= distance, f"Expected the iris near {expected}, but got {actual}"


@then("both iris centers should be equal")
def step_then_iris_centers_equal(context):
    scenario_context = get_current_scenario_context(context)
    first, second = scenario_context.get("estimates")
    assert first.center == second.center, f"Centers differ: {first.center} and {second.center}"


@then("the iris center should be 0,0 with a zero combined score")
def step_then_iris_origin(context):
    scenario_context = get_current_scenario_context(context)
    estimate = scenario_context.get("estimate")
    assert estimate.center == (0, 0), f"Expected (0, 0), but got {estimate.center}"
    assert estimate.combined_score == 0.0, f"Expected a zero score, but got {estimate.combined_score}"


@given("a previous iris center at {center}")
def step_given_previous_center(context, center):
    scenario_context = get_current_scenario_context(context)
    point = _point(center)
    previous = IrisEstimateDTO(center=point, combined_score=1.0, per_filter_peaks=(point, point, point))
    scenario_context.store("history", [previous])


@given("a current iris center at {center} with filter peaks {peaks}")
def step_given_current_center(context, center, peaks):
    scenario_context = get_current_scenario_context(context)
    current = IrisEstimateDTO(
        center=_point(center),
        combined_score=1.0,
        per_filter_peaks=tuple(_point(peak) for peak in peaks.split()),
    )
    scenario_context.store("current", current)


@when("temporal consistency is applied with distance {distance:d}")
def step_when_temporal_consistency(context, distance):
    scenario_context = get_current_scenario_context(context)
    history = scenario_context.get("history", [])
    checked = temporal_consistency(history, scenario_context.get("current"), float(distance))
    scenario_context.store("checked", checked)


@then("the checked center should be {center} and valid should be {valid}")
def step_then_checked_center(context, center, valid):
    scenario_context = get_current_scenario_context(context)
    checked = scenario_context.get("checked")
    assert checked.center == _point(center), f"Expected {center}, but got {checked.center}"
    assert checked.valid == (valid == "True"), f"Expected valid={valid}, but got {checked.valid}"


@given("{count:d} patches with a dark disk of radius {radius:d} moving from {start} by 1 pixel per frame")
def step_given_moving_disk(context, count, radius, start):
    scenario_context = get_current_scenario_context(context)
    x, y = _point(start)
    rng = np.random.default_rng(12)
    centers = [(x + frame, y) for frame in range(count)]
    patches = [render_disk_patch(center, radius, noise=0.03, rng=rng) for center in centers]
    scenario_context.store("patches", patches)
    scenario_context.store("centers", centers)


@when("an iris tracker follows them")
def step_when_tracker_follows(context):
    scenario_context = get_current_scenario_context(context)
    tracker = IrisTracker(eye_config=EyeConfig())
    scenario_context.store("estimates", [tracker.update(patch) for patch in scenario_context.get("patches")])


@then("every tracked center should be valid and within 2 pixels of the disk")
def step_then_tracked_centers(context):
    scenario_context = get_current_scenario_context(context)
    for estimate, expected in zip(scenario_context.get("estimates"), scenario_context.get("centers"), strict=True):
        offset = max(abs(estimate.center[0] - expected[0]), abs(estimate.center[1] - expected[1]))
        assert estimate.valid, f"Estimate at {expected} is invalid"
        assert offset <= 2, f"Expected the iris near {expected}, but got {estimate.center}"


@given("left eye corners {left_outer} and {left_inner} and right eye corners {right_outer} and {right_inner}")
def step_given_eye_corners(context, left_outer, left_inner, right_outer, right_inner):
    scenario_context = get_current_scenario_context(context)
    corners = [float(value) for point in (left_outer, left_inner, right_outer, right_inner) for value in _point(point)]
    record = FaceChannelRecordDTO(
        tracked=True,
        pitch=0.0,
        roll=0.0,
        yaw=0.0,
        aus=(0.0, 0.0, 0.0, 0.0),
        eye_corners=tuple(corners),
    )
    scenario_context.store("record", record)


@when("the gaze is computed for a left iris at {left} and a right iris at {right}")
def step_when_gaze(context, left, right):
    scenario_context = get_current_scenario_context(context)
    try:
        gaze = gaze_features(
            np.asarray(_point(left), dtype=np.float64),
            np.asarray(_point(right), dtype=np.float64),
            scenario_context.get("record"),
        )
        scenario_context.store("gaze", gaze)
    except BaseError as e:
        scenario_context.store("error", e)


@then("the left gaze should be {x:g}, {y:g} and the right gaze should be 0, 0")
def step_then_gaze(context, x, y):
    scenario_context = get_current_scenario_context(context)
    gaze = scenario_context.get("gaze")
    expected = np.array([x, y, 0.0, 0.0])
    assert np.allclose(gaze.as_array(), expected, atol=1e-12), f"Expected {expected}, but got {gaze.as_array()}"
    assert gaze.valid, "Gaze should be valid"


@when("a template is cut at {center}")
def step_when_template_cut(context, center):
    scenario_context = get_current_scenario_context(context)
    scenario_context.store("template", iris_template(scenario_context.get("patch"), _point(center)))


@then("the template should have mean 0 and variance 1")
def step_then_template_standardized(context):
    scenario_context = get_current_scenario_context(context)
    template = scenario_context.get("template")
    assert abs(template.mean()) <= 1e-9, f"Template mean is {template.mean()}"
    assert abs(template.var() - 1.0) <= 1e-9, f"Template variance is {template.var()}"


@then("the template should be all zero")
def step_then_template_zero(context):
    scenario_context = get_current_scenario_context(context)
    assert not scenario_context.get("template").any(), "Expected an all-zero template"


@then("the template should be {width:d}x{height:d} and finite")
def step_then_template_shape(context, width, height):
    scenario_context = get_current_scenario_context(context)
    template = scenario_context.get("template")
    assert template.shape == (height, width), f"Expected {(height, width)}, but got {template.shape}"
    assert np.all(np.isfinite(template)), "Template holds non-finite values"
