import numpy as np
from behave import given, then, when
from features.test_helpers import get_current_scenario_context
from scipy import ndimage

from distractipy.configs.config_template import AdaBoostConfig, ArmConfig
from distractipy.logics.arm_position import (
    arm_features,
    arm_score_matrix,
    frontal_chain,
    largest_component,
    marching_squares,
    profile_projection,
    remove_background,
    right_side_filter,
    segment_axes,
    train_arm_classifier,
)
from distractipy.logics.session_generator import generate_synthetic_session
from distractipy.models.dtos.arm_dtos import ContourChainDTO
from distractipy.models.dtos.generator_dtos import GeneratorSpecDTO, SegmentSpecDTO
from distractipy.models.errors import BaseError
from distractipy.models.types.distraction_types import DistractionClassType


def _parse_pixels(text):
    return [tuple(int(value) for value in pair.split(",")) for pair in text.split()]


def _chain_from_points(points):
    points = np.asarray(points, dtype=np.float64)
    pixels = np.column_stack([np.arange(points.shape[0]), np.zeros(points.shape[0])]).astype(np.int64)
    return ContourChainDTO(pixels=pixels, points3d=points, centroid=(0.0, 0.0))


@given("a {width:d}x{height:d} background at {depth:d} mm")
def step_given_background(context, width, height, depth):
    scenario_context = get_current_scenario_context(context)
    background = np.full((height, width), depth, dtype=np.uint16)
    scenario_context.store("background", background)
    scenario_context.store("frame", background.copy())


@given("a frame equal to the background")
def step_given_frame_equal(context):
    scenario_context = get_current_scenario_context(context)
    scenario_context.store("frame", scenario_context.get("background").copy())


@given("a frame with a {width:d}x{height:d} block at {depth:d} mm from column {column:d} and row {row:d}")
def step_given_frame_block(context, width, height, depth, column, row):
    scenario_context = get_current_scenario_context(context)
    frame = scenario_context.get("frame")
    frame[row : row + height, column : column + width] = depth


@when("the background is removed with a {threshold:d} mm threshold")
def step_when_background_removed(context, threshold):
    scenario_context = get_current_scenario_context(context)
    mask = remove_background(scenario_context.get("frame"), scenario_context.get("background"), threshold)
    scenario_context.store("mask", mask)


@then("the foreground should be empty")
def step_then_foreground_empty(context):
    scenario_context = get_current_scenario_context(context)
    count = int(scenario_context.get("mask").sum())
    assert count == 0, f"Expected no foreground, but got {count} pixels"


@then("the foreground should be exactly the {width:d}x{height:d} block from column {column:d} and row {row:d}")
def step_then_foreground_block(context, width, height, column, row):
    scenario_context = get_current_scenario_context(context)
    mask = scenario_context.get("mask")
    expected = np.zeros_like(mask)
    expected[row : row + height, column : column + width] = True
    assert np.array_equal(mask, expected), "Foreground differs from the block"


@then("the foreground should hold {count:d} pixels")
def step_then_foreground_count(context, count):
    scenario_context = get_current_scenario_context(context)
    actual = int(scenario_context.get("mask").sum())
    assert actual == count, f"Expected {count} pixels, but got {actual}"


@given("a {width:d}x{height:d} mask with pixel {x:d},{y:d} set")
def step_given_single_pixel_mask(context, width, height, x, y):
    scenario_context = get_current_scenario_context(context)
    mask = np.zeros((height, width), dtype=bool)
    mask[y, x] = True
    scenario_context.store("mask", mask)


@given("a {width:d}x{height:d} mask with a filled square from {x0:d},{y0:d} to {x1:d},{y1:d}")
def step_given_square_mask(context, width, height, x0, y0, x1, y1):
    scenario_context = get_current_scenario_context(context)
    mask = np.zeros((height, width), dtype=bool)
    mask[y0 : y1 + 1, x0 : x1 + 1] = True
    scenario_context.store("mask", mask)


@given("a filled square from {x0:d},{y0:d} to {x1:d},{y1:d} is added to the mask")
def step_given_square_added(context, x0, y0, x1, y1):
    scenario_context = get_current_scenario_context(context)
    scenario_context.get("mask")[y0 : y1 + 1, x0 : x1 + 1] = True


@when("the boundary is traced")
def step_when_boundary_traced(context):
    scenario_context = get_current_scenario_context(context)
    scenario_context.store("chain", marching_squares(scenario_context.get("mask")))


@then('the chain should be "{expected}"')
def step_then_chain(context, expected):
    scenario_context = get_current_scenario_context(context)
    chain = scenario_context.get("chain")
    assert chain == _parse_pixels(expected), f"Expected {expected}, but got {chain}"


@given("{count:d} random blob masks with seed {seed:d}")
def step_given_random_masks(context, count, seed):
    scenario_context = get_current_scenario_context(context)
    rng = np.random.default_rng(seed)
    masks = []
    while len(masks) < count:
        noise = ndimage.gaussian_filter(rng.normal(size=(24, 24)), sigma=rng.uniform(0.8, 2.5))
        mask = largest_component(noise > rng.uniform(-0.1, 0.3))
        if mask.any():
            masks.append(mask)
    scenario_context.store("masks", masks)


@then("every traced chain should be closed, 8-connected and free of repeats")
def step_then_chains_valid(context):
    scenario_context = get_current_scenario_context(context)
    for index, mask in enumerate(scenario_context.get("masks")):
        chain = marching_squares(mask)
        assert len(set(chain)) == len(chain), f"Mask {index}: chain repeats a pixel"
        for pixel in chain:
            assert mask[pixel[1], pixel[0]], f"Mask {index}: {pixel} is not foreground"
        if len(chain) == 1:
            continue
        for current, following in zip(chain, chain[1:] + chain[:1], strict=True):
            step = max(abs(current[0] - following[0]), abs(current[1] - following[1]))
            assert step == 1, f"Mask {index}: {current} and {following} are not 8-neighbors"


@when("the right side filter is applied")
def step_when_right_side_filter(context):
    scenario_context = get_current_scenario_context(context)
    mask = scenario_context.get("mask")
    pixels = np.asarray(scenario_context.get("chain"), dtype=np.int64)
    ys, xs = np.nonzero(mask)
    chain = ContourChainDTO(
        pixels=pixels,
        points3d=np.zeros((pixels.shape[0], 3)),
        centroid=(float(xs.mean()), float(ys.mean())),
    )
    scenario_context.store("kept", right_side_filter(chain))


@then("every kept pixel should lie at or right of column {column:d}")
def step_then_kept_right(context, column):
    scenario_context = get_current_scenario_context(context)
    kept = scenario_context.get("kept")
    assert np.all(kept.pixels[:, 0] >= column), f"Kept pixels left of column {column}: {kept.pixels.tolist()}"


@then("the kept chain should hold between {low:d} and {high:d} pixels")
def step_then_kept_length(context, low, high):
    scenario_context = get_current_scenario_context(context)
    length = len(scenario_context.get("kept"))
    assert low <= length <= high, f"Expected {low} to {high} pixels, but got {length}"


@given("a chain of {count:d} points along the X axis")
def step_given_points_along_x(context, count):
    scenario_context = get_current_scenario_context(context)
    points = np.column_stack([np.arange(count, dtype=np.float64), np.zeros(count), np.zeros(count)])
    scenario_context.store("chain", _chain_from_points(points))


@given("a chain of {count:d} points along the direction {x:d}, {y:d}, {z:d}")
def step_given_points_along_direction(context, count, x, y, z):
    scenario_context = get_current_scenario_context(context)
    direction = np.array([x, y, z], dtype=np.float64)
    offsets = np.random.default_rng(1).uniform(-50.0, 50.0, size=count)
    points = np.array([100.0, 20.0, 1200.0]) + offsets[:, None] * direction
    scenario_context.store("chain", _chain_from_points(points))
    scenario_context.store("direction", direction / np.linalg.norm(direction))


@given("a chain of {count:d} identical points")
def step_given_identical_points(context, count):
    scenario_context = get_current_scenario_context(context)
    scenario_context.store("chain", _chain_from_points(np.tile([10.0, -5.0, 900.0], (count, 1))))


@when("the segment axes are computed with {segments:d} segments")
def step_when_segment_axes(context, segments):
    scenario_context = get_current_scenario_context(context)
    try:
        scenario_context.store("axes", segment_axes(scenario_context.get("chain"), segments))
    except BaseError as e:
        scenario_context.store("error", e)


@then("every axis should be {x:d}, {y:d}, {z:d}")
def step_then_axes_equal(context, x, y, z):
    scenario_context = get_current_scenario_context(context)
    axes = scenario_context.get("axes")
    expected = np.array([x, y, z], dtype=np.float64)
    assert np.allclose(axes, expected[None, :], atol=1e-12), f"Expected {expected}, but got {axes}"


@then("every axis should be parallel to {x:d}, {y:d}, {z:d} within {tolerance:g}")
def step_then_axes_parallel(context, x, y, z, tolerance):
    scenario_context = get_current_scenario_context(context)
    axes = scenario_context.get("axes")
    direction = scenario_context.get("direction")
    cosines = np.abs(axes @ direction)
    assert np.all(cosines >= 1.0 - tolerance), f"Axes deviate from the line: {cosines.min()}"
    assert np.all(axes[np.arange(axes.shape[0]), np.argmax(np.abs(axes), axis=1)] > 0), "Axes are not sign-normalized"


@when("the profile view is projected")
def step_when_profile_projected(context):
    scenario_context = get_current_scenario_context(context)
    frame = scenario_context.get("frame")
    mask = remove_background(frame, scenario_context.get("background"), 100.0)
    scenario_context.store("profile", profile_projection(frame, mask))


@then("the profile image should be at most {width:d} columns wide")
def step_then_profile_width(context, width):
    scenario_context = get_current_scenario_context(context)
    profile = scenario_context.get("profile")
    columns = np.flatnonzero(profile.any(axis=0))
    assert columns.size > 0, "Profile image is empty"
    span = int(columns[-1] - columns[0] + 1)
    assert span <= width, f"Expected at most {width} columns, but got {span}"


@when("the arm features are computed")
def step_when_arm_features(context):
    scenario_context = get_current_scenario_context(context)
    features = arm_features(scenario_context.get("frame"), scenario_context.get("background"), arm_config=ArmConfig())
    scenario_context.store("features", features)


@then("the arm features should be invalid and all zero")
def step_then_arm_features_invalid(context):
    scenario_context = get_current_scenario_context(context)
    features = scenario_context.get("features")
    assert not features.valid, "Expected an invalid arm vector"
    assert not features.values.any(), "Expected an all-zero arm vector"


@given("a generated session of {up:d} phone call frames and {down:d} text message frames")
def step_given_pose_session(context, up, down):
    scenario_context = get_current_scenario_context(context)
    spec = GeneratorSpecDTO(
        driver_id="driver00",
        session_id="poses",
        segments=(
            SegmentSpecDTO(distraction_class=DistractionClassType.PHONE_CALL, frame_count=up),
            SegmentSpecDTO(distraction_class=DistractionClassType.TEXT_MESSAGE, frame_count=down),
        ),
        shuffle_distractions=False,
    )
    scenario_context.store("session", generate_synthetic_session(spec, seed=3))


@when("the arm features of frames {first:d} and {second:d} are computed")
def step_when_pose_features(context, first, second):
    scenario_context = get_current_scenario_context(context)
    session = scenario_context.get("session")
    vectors = [
        arm_features(session.depth[frame], session.background, session.focal_length, ArmConfig())
        for frame in (first, second)
    ]
    scenario_context.store("vectors", vectors)
    scenario_context.store("first_frame", first)


@then("both arm feature vectors should be valid")
def step_then_pose_vectors_valid(context):
    scenario_context = get_current_scenario_context(context)
    assert all(vector.valid for vector in scenario_context.get("vectors")), "An arm vector is invalid"


@then("they should differ in at least {count:d} components by more than {gap:f}")
def step_then_pose_vectors_differ(context, count, gap):
    scenario_context = get_current_scenario_context(context)
    first, second = scenario_context.get("vectors")
    differing = int(np.sum(np.abs(first.values - second.values) > gap))
    assert differing >= count, f"Expected {count} differing components, but got {differing}"


@then("recomputing frame {frame:d} should give the identical vector")
def step_then_pose_vector_repeatable(context, frame):
    scenario_context = get_current_scenario_context(context)
    session = scenario_context.get("session")
    again = arm_features(session.depth[frame], session.background, session.focal_length, ArmConfig())
    first = scenario_context.get("vectors")[0]
    assert np.array_equal(again.values, first.values), "Arm features are not repeatable"


@then("the profile image should span {bins:d} depth bins")
def step_then_profile_bins(context, bins):
    scenario_context = get_current_scenario_context(context)
    columns = scenario_context.get("profile").shape[1]
    assert columns == bins, f"Expected {bins} depth bins, but got {columns}"


@then("the profile strip should lie in column {column:d}")
def step_then_profile_strip(context, column):
    scenario_context = get_current_scenario_context(context)
    occupied = np.flatnonzero(scenario_context.get("profile").any(axis=0)).tolist()
    assert occupied == [column], f"Expected the strip in column {column}, but got columns {occupied}"


@given('a generated session of {count:d} frames of the "{name}" class')
def step_given_single_class_session(context, count, name):
    scenario_context = get_current_scenario_context(context)
    spec = GeneratorSpecDTO(
        driver_id="driver00",
        session_id="single",
        segments=(SegmentSpecDTO(distraction_class=DistractionClassType[name], frame_count=count),),
        shuffle_distractions=False,
    )
    scenario_context.store("session", generate_synthetic_session(spec, seed=3))


@given("a generated session of {count:d} frames of each arm pose")
def step_given_all_pose_session(context, count):
    scenario_context = get_current_scenario_context(context)
    classes = (
        DistractionClassType.NORMAL_DRIVING,
        DistractionClassType.PHONE_CALL,
        DistractionClassType.TEXT_MESSAGE,
        DistractionClassType.OBJECT_DISTRACTION,
    )
    spec = GeneratorSpecDTO(
        driver_id="driver00",
        session_id="poses",
        segments=tuple(SegmentSpecDTO(distraction_class=c, frame_count=count) for c in classes),
        shuffle_distractions=False,
    )
    scenario_context.store("session", generate_synthetic_session(spec, seed=3))


def _session_mask(session, frame):
    return remove_background(session.depth[frame], session.background, ArmConfig().BACKGROUND_THRESHOLD_MM)


@when("the profile view of frame {frame:d} is projected")
def step_when_session_profile(context, frame):
    scenario_context = get_current_scenario_context(context)
    session = scenario_context.get("session")
    configs = ArmConfig()
    profile = profile_projection(
        session.depth[frame],
        _session_mask(session, frame),
        configs.PROFILE_BIN_MM,
        configs.CLOSING_SIZE,
    )
    scenario_context.store("profile", profile)


@then("the nearest {bins:d} depth bins should only hold rows at or below row {row:d}")
def step_then_nearest_rows(context, bins, row):
    scenario_context = get_current_scenario_context(context)
    rows = np.flatnonzero(scenario_context.get("profile")[:, :bins].any(axis=1))
    assert rows.size > 0, "The nearest depth bins are empty"
    assert rows.min() >= row, f"Nearest bins reach up to row {rows.min()}"


@then("the nearest {bins:d} depth bins should cover at most {fraction:g} of the profile rows")
def step_then_nearest_fraction(context, bins, fraction):
    scenario_context = get_current_scenario_context(context)
    profile = scenario_context.get("profile")
    near = int(profile[:, :bins].any(axis=1).sum())
    total = int(profile.any(axis=1).sum())
    assert near <= fraction * total, f"Nearest bins cover {near} of {total} rows"


@when("the frontal contour of frame {frame:d} is traced and filtered to the right side")
def step_when_session_right_side(context, frame):
    scenario_context = get_current_scenario_context(context)
    session = scenario_context.get("session")
    mask = _session_mask(session, frame)
    chain = frontal_chain(session.depth[frame], mask, session.focal_length)
    scenario_context.store("mask", mask)
    scenario_context.store("kept", right_side_filter(chain))


@then("the kept chain should reach the rightmost foreground column")
def step_then_kept_reaches_right(context):
    scenario_context = get_current_scenario_context(context)
    rightmost = int(np.flatnonzero(scenario_context.get("mask").any(axis=0)).max())
    kept = scenario_context.get("kept")
    assert len(kept) > 0, "The right side filter kept nothing"
    assert int(kept.pixels[:, 0].max()) == rightmost, f"Kept chain stops before column {rightmost}"


@when("the arm classifier is trained on the valid frames with {rounds:d} rounds")
def step_when_arm_classifier_trained(context, rounds):
    scenario_context = get_current_scenario_context(context)
    session = scenario_context.get("session")
    configs = ArmConfig()
    vectors = [
        arm_features(session.depth[frame], session.background, session.focal_length, configs)
        for frame in range(session.labels.shape[0])
    ]
    valid = np.array([vector.valid for vector in vectors])
    features = np.stack([vector.values for vector in vectors])[valid]
    poses = np.array([DistractionClassType(int(label)).arm_pose.value for label in session.labels])[valid]
    model = train_arm_classifier(features, poses, AdaBoostConfig(ROUNDS=rounds))
    scenario_context.store("predicted", np.argmax(arm_score_matrix(features, model), axis=1))
    scenario_context.store("poses", poses)


@then("at least {percent:d} percent of the valid frames should be assigned their own pose")
def step_then_arm_accuracy(context, percent):
    scenario_context = get_current_scenario_context(context)
    poses = scenario_context.get("poses")
    assert poses.size >= 400, f"Only {poses.size} valid frames"
    accuracy = float(np.mean(scenario_context.get("predicted") == poses))
    assert accuracy * 100 >= percent, f"Expected {percent}% accuracy, but got {accuracy:.3f}"
