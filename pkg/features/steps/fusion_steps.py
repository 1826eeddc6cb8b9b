from collections import Counter

import numpy as np
from behave import given, then, when
from features.test_helpers import get_current_scenario_context

from distractipy.configs.config_template import AdaBoostConfig, FusionConfig, HmmConfig
from distractipy.logics.fusion import (
    append_deltas,
    assemble_frame_features,
    classify_frames_adaboost,
    classify_frames_hmm,
    mode_filter,
    select_feature_groups,
    smooth_features,
    train_fusion_adaboost,
    train_fusion_hmms,
)
from distractipy.models.dtos.arm_dtos import ArmScoresDTO
from distractipy.models.dtos.eye_dtos import GazeFeaturesDTO
from distractipy.models.dtos.face_dtos import FaceFeaturesDTO
from distractipy.models.dtos.fusion_dtos import FusionHmmBundleDTO, FusionSequenceDTO, FusionSettingsDTO
from distractipy.models.dtos.learner_dtos import GaussianHmmDTO
from distractipy.models.errors import BaseError
from distractipy.models.types.distraction_types import DistractionClassType

SETTINGS = FusionSettingsDTO(window_size=20, hmm_use_smoothed=True)
FUSION_CONFIG = FusionConfig(WINDOW_SIZE=20, TRAINING_STRIDE=1)


def _direct_window(length, frame, window):
    back = window // 2
    return max(frame - back, 0), min(frame + window - back, length)


def _direct_mode(labels, window):
    result = []
    for frame in range(labels.size):
        start, stop = _direct_window(labels.size, frame, window)
        counts = Counter(labels[start:stop].tolist())
        best = max(counts.values())
        leaders = [code for code, count in counts.items() if count == best]
        result.append(int(labels[frame]) if len(leaders) > 1 else leaders[0])
    return np.asarray(result)


def _regime_frames(rng, code, length):
    center = np.zeros(17)
    center[code * 3 : code * 3 + 3] = 3.0
    return center + rng.normal(0.0, 1.0, size=(length, 17))


def _regime_sequences(rng, codes):
    sequences = []
    for _ in range(2):
        order = rng.permutation(codes)
        blocks = [_regime_frames(rng, int(code), 60) for code in order]
        labels = np.concatenate([np.full(60, int(code)) for code in order])
        sequences.append(FusionSequenceDTO(features=np.vstack(blocks), labels=labels))
    return sequences


@when("a frame is assembled from default module outputs")
def step_when_frame_default(context):
    scenario_context = get_current_scenario_context(context)
    arm = ArmScoresDTO(up=0.0, down=0.0, right=0.0, forward=0.0)
    frame = assemble_frame_features(arm, GazeFeaturesDTO(), (0.0, 0.0), FaceFeaturesDTO(), arm_valid=False)
    scenario_context.store("frame", frame)


@when("a frame is assembled from numbered module outputs")
def step_when_frame_numbered(context):
    scenario_context = get_current_scenario_context(context)
    arm = ArmScoresDTO(up=1.0, down=2.0, right=3.0, forward=4.0)
    gaze = GazeFeaturesDTO(x_l=5.0, y_l=6.0, x_r=7.0, y_r=8.0, valid=True)
    face = FaceFeaturesDTO(pitch=11.0, roll=12.0, yaw=13.0, au10=14.0, au26_27=15.0, au20=16.0, au13_15=17.0)
    scenario_context.store("frame", assemble_frame_features(arm, gaze, (9.0, 10.0), face))


@then("the frame vector should be 17 zeros")
def step_then_frame_zeros(context):
    scenario_context = get_current_scenario_context(context)
    values = scenario_context.get("frame").values
    assert values.shape == (17,) and not values.any(), f"Expected 17 zeros, but got {values}"


@then("the frame vector should count from 1 to 17")
def step_then_frame_counts(context):
    scenario_context = get_current_scenario_context(context)
    values = scenario_context.get("frame").values
    assert np.array_equal(values, np.arange(1.0, 18.0)), f"Unexpected order {values}"


@given("{count:d} random frames with seed {seed:d}")
def step_given_random_frames(context, count, seed):
    scenario_context = get_current_scenario_context(context)
    scenario_context.store("frames", np.random.default_rng(seed).normal(size=(count, 17)))


@given("{count:d} constant frames of value {value:g}")
def step_given_constant_frames(context, count, value):
    scenario_context = get_current_scenario_context(context)
    scenario_context.store("frames", np.full((count, 17), value))


@given("{count:d} constant frames of value {value:g} with a spike of {spike:g} at frame {frame:d}")
def step_given_spiked_frames(context, count, value, spike, frame):
    scenario_context = get_current_scenario_context(context)
    frames = np.full((count, 17), value)
    frames[frame] = spike
    scenario_context.store("frames", frames)


@when('only the "{group}" group is kept')
def step_when_group_kept(context, group):
    scenario_context = get_current_scenario_context(context)
    scenario_context.store("selected", select_feature_groups(scenario_context.get("frames"), [group]))


@then("the selected columns should be {first:d} to {last:d} of the frame vectors")
def step_then_selected_columns(context, first, last):
    scenario_context = get_current_scenario_context(context)
    expected = scenario_context.get("frames")[:, first : last + 1]
    assert np.array_equal(scenario_context.get("selected"), expected), "Selected columns differ"


@when("the frames are smoothed with a window of {window:d}")
def step_when_frames_smoothed(context, window):
    scenario_context = get_current_scenario_context(context)
    scenario_context.store("window", window)
    scenario_context.store("smoothed", smooth_features(scenario_context.get("frames"), window))


@when("deltas are appended")
def step_when_deltas_appended(context):
    scenario_context = get_current_scenario_context(context)
    scenario_context.store("smoothed", append_deltas(scenario_context.get("smoothed")))


@then("every median should be {value:g} and every deviation 0")
def step_then_constant_smoothing(context, value):
    scenario_context = get_current_scenario_context(context)
    smoothed = scenario_context.get("smoothed")
    assert np.all(smoothed[:, :17] == value), "Medians differ from the constant"
    assert np.all(smoothed[:, 17:] == 0.0), "Deviations are not zero"


@then("every median should be {value:g}")
def step_then_medians(context, value):
    scenario_context = get_current_scenario_context(context)
    medians = scenario_context.get("smoothed")[:, :17]
    assert np.all(medians == value), f"Medians range from {medians.min()} to {medians.max()}"


@then("the smoothed features should match a per-window recompute within {tolerance:g}")
def step_then_smoothing_matches(context, tolerance):
    scenario_context = get_current_scenario_context(context)
    frames = scenario_context.get("frames")
    window = scenario_context.get("window")
    smoothed = scenario_context.get("smoothed")
    for frame in range(frames.shape[0]):
        start, stop = _direct_window(frames.shape[0], frame, window)
        block = frames[start:stop]
        assert np.array_equal(smoothed[frame, :17], np.median(block, axis=0)), f"Median differs at frame {frame}"
        error = np.abs(smoothed[frame, 17:] - block.std(axis=0)).max()
        assert error <= tolerance, f"Deviation differs by {error:.3e} at frame {frame}"


@then("the feature width should be {width:d}")
def step_then_feature_width(context, width):
    scenario_context = get_current_scenario_context(context)
    actual = scenario_context.get("smoothed").shape[1]
    assert actual == width, f"Expected {width} features, but got {actual}"


@then("the delta columns of the first frame should be zero")
def step_then_first_deltas_zero(context):
    scenario_context = get_current_scenario_context(context)
    assert not scenario_context.get("smoothed")[0, 34:].any(), "First-frame deltas are not zero"


@given('the label sequence "{labels}"')
def step_given_label_sequence(context, labels):
    scenario_context = get_current_scenario_context(context)
    scenario_context.store("labels", np.asarray([int(label) for label in labels.split()]))


@when("the labels are mode filtered with a window of {window:d}")
def step_when_mode_filtered(context, window):
    scenario_context = get_current_scenario_context(context)
    scenario_context.store("filtered", mode_filter(scenario_context.get("labels"), window))


@then('the labels should be "{labels}"')
def step_then_filtered_labels(context, labels):
    scenario_context = get_current_scenario_context(context)
    expected = [int(label) for label in labels.split()]
    actual = scenario_context.get("filtered").tolist()
    assert actual == expected, f"Expected {expected}, but got {actual}"


@given("{count:d} random label sequences with seed {seed:d}")
def step_given_random_label_sequences(context, count, seed):
    scenario_context = get_current_scenario_context(context)
    rng = np.random.default_rng(seed)
    sequences = []
    for _ in range(count):
        runs = rng.integers(1, 12, size=30)
        codes = rng.integers(0, 5, size=30)
        sequences.append(np.repeat(codes, runs)[: int(rng.integers(1, 150))])
    scenario_context.store("sequences", sequences)


@then("mode filtering with a window of {window:d} should match a direct window count for each of them")
def step_then_mode_filter_matches(context, window):
    scenario_context = get_current_scenario_context(context)
    for index, labels in enumerate(scenario_context.get("sequences")):
        expected = _direct_mode(labels, window)
        actual = mode_filter(labels, window)
        assert np.array_equal(actual, expected), f"Sequence {index}: {actual} differs from {expected}"


@given("a fusion HMM bundle of {count:d} identical models")
def step_given_identical_bundle(context, count):
    scenario_context = get_current_scenario_context(context)
    model = GaussianHmmDTO(
        start_prob=np.array([0.5, 0.5]),
        transitions=np.array([[0.9, 0.1], [0.2, 0.8]]),
        means=np.vstack([np.zeros(17), np.ones(17)]),
        variances=np.ones((2, 17)),
    )
    bundle = FusionHmmBundleDTO(
        class_codes=tuple(range(count)),
        models=(model,) * count,
        feature_mean=np.zeros(17),
        feature_scale=np.ones(17),
        use_smoothed=False,
    )
    scenario_context.store("bundle", bundle)


@when("{count:d} random frames are classified by the HMM path")
def step_when_random_frames_classified(context, count):
    scenario_context = get_current_scenario_context(context)
    frames = np.random.default_rng(4).normal(size=(count, 17))
    settings = FusionSettingsDTO(window_size=10, hmm_use_smoothed=False)
    scenario_context.store("predicted", classify_frames_hmm(scenario_context.get("bundle"), frames, settings))


@then("every frame should be labeled {code:d}")
def step_then_all_labeled(context, code):
    scenario_context = get_current_scenario_context(context)
    predicted = scenario_context.get("predicted")
    assert np.all(predicted == code), f"Expected every label {code}, but got {np.unique(predicted)}"


@given('synthetic fusion sequences without the "{missing}" class')
def step_given_sequences_missing_class(context, missing):
    scenario_context = get_current_scenario_context(context)
    codes = [member.value for member in DistractionClassType if member.name != missing]
    scenario_context.store("sequences", _regime_sequences(np.random.default_rng(7), codes))


@given("synthetic fusion sequences of every class")
def step_given_sequences_every_class(context):
    scenario_context = get_current_scenario_context(context)
    codes = [member.value for member in DistractionClassType]
    scenario_context.store("sequences", _regime_sequences(np.random.default_rng(7), codes))


@when("fusion HMMs are trained with {states:d} states")
def step_when_fusion_hmms_trained(context, states):
    scenario_context = get_current_scenario_context(context)
    hmm_config = HmmConfig(STATE_COUNT=states, MAX_ITERATIONS=20)
    try:
        bundle = train_fusion_hmms(scenario_context.get("sequences"), 0, SETTINGS, FUSION_CONFIG, hmm_config)
        scenario_context.store("bundle", bundle)
    except BaseError as e:
        scenario_context.store("error", e)


@when('a session drawn from the "{regime}" regime is classified by the HMM path')
def step_when_regime_classified(context, regime):
    scenario_context = get_current_scenario_context(context)
    code = DistractionClassType[regime].value
    frames = _regime_frames(np.random.default_rng(31), code, 80)
    scenario_context.store("predicted", classify_frames_hmm(scenario_context.get("bundle"), frames, SETTINGS))


@then('at least {share:d} percent of its interior frames should be labeled "{regime}"')
def step_then_interior_share(context, share, regime):
    scenario_context = get_current_scenario_context(context)
    interior = scenario_context.get("predicted")[10:-10]
    actual = 100.0 * np.mean(interior == DistractionClassType[regime].value)
    assert actual >= share, f"Expected {share}% {regime}, but got {actual:.1f}%"


@when("the fusion AdaBoost path is trained")
def step_when_fusion_adaboost_trained(context):
    scenario_context = get_current_scenario_context(context)
    model = train_fusion_adaboost(
        scenario_context.get("sequences"),
        SETTINGS,
        FUSION_CONFIG,
        AdaBoostConfig(ROUNDS=30),
    )
    scenario_context.store("model", model)


@then("its training accuracy after the mode filter should be at least {share:d} percent")
def step_then_fusion_training_accuracy(context, share):
    scenario_context = get_current_scenario_context(context)
    correct = 0
    total = 0
    for sequence in scenario_context.get("sequences"):
        predicted = classify_frames_adaboost(scenario_context.get("model"), sequence.features, SETTINGS)
        correct += int(np.sum(predicted == sequence.labels))
        total += sequence.labels.size
    accuracy = 100.0 * correct / total
    assert accuracy >= share, f"Expected at least {share}%, but got {accuracy:.1f}%"


@given("a fusion HMM bundle of {count:d} random models with seed {seed:d}")
def step_given_random_bundle(context, count, seed):
    scenario_context = get_current_scenario_context(context)
    rng = np.random.default_rng(seed)
    models = []
    for _ in range(count):
        transitions = rng.uniform(0.1, 1.0, size=(3, 3))
        models.append(
            GaussianHmmDTO(
                start_prob=np.full(3, 1.0 / 3.0),
                transitions=transitions / transitions.sum(axis=1, keepdims=True),
                means=rng.normal(0.0, 1.0, size=(3, 17)),
                variances=rng.uniform(0.5, 2.0, size=(3, 17)),
            ),
        )
    bundle = FusionHmmBundleDTO(
        class_codes=tuple(range(count)),
        models=tuple(models),
        feature_mean=np.zeros(17),
        feature_scale=np.ones(17),
        use_smoothed=False,
    )
    scenario_context.store("bundle", bundle)


@when("{count:d} random frames and the same frames from frame {offset:d} on are classified by the HMM path")
def step_when_shifted_frames_classified(context, count, offset):
    scenario_context = get_current_scenario_context(context)
    frames = np.random.default_rng(6).normal(size=(count, 17))
    settings = FusionSettingsDTO(window_size=10, hmm_use_smoothed=False)
    bundle = scenario_context.get("bundle")
    scenario_context.store("window", settings.window_size)
    scenario_context.store("predicted", classify_frames_hmm(bundle, frames, settings))
    scenario_context.store("shifted", classify_frames_hmm(bundle, frames[offset:], settings))


@then("the interior predictions should agree after the shift of {offset:d} frames")
def step_then_shifted_predictions_agree(context, offset):
    scenario_context = get_current_scenario_context(context)
    predicted = scenario_context.get("predicted")
    shifted = scenario_context.get("shifted")
    window = scenario_context.get("window")
    back = window // 2
    forward = window - back - 1
    interior = np.arange(offset + back, predicted.size - forward)
    assert np.array_equal(predicted[interior], shifted[interior - offset]), "Interior predictions differ after the shift"
