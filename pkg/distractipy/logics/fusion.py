import logging
from collections.abc import Sequence

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from distractipy.configs.base_config import BaseConfig
from distractipy.configs.config_template import AdaBoostConfig, FusionConfig, HmmConfig
from distractipy.learners.gaussian_hmm import GaussianHmmTrainer, viterbi_log_likelihoods
from distractipy.learners.real_adaboost import OneVsAllTrainer, RealAdaBoostTrainer
from distractipy.models.dtos.arm_dtos import ArmScoresDTO
from distractipy.models.dtos.eye_dtos import GazeFeaturesDTO
from distractipy.models.dtos.face_dtos import FaceFeaturesDTO
from distractipy.models.dtos.fusion_dtos import (
    FRAME_FEATURE_COUNT,
    FrameFeaturesDTO,
    FusionHmmBundleDTO,
    FusionSequenceDTO,
    FusionSettingsDTO,
)
from distractipy.models.dtos.learner_dtos import GaussianHmmDTO, OneVsAllModelDTO
from distractipy.models.errors import DimensionMismatchError, EmptyInputError, InsufficientDataError
from distractipy.models.types.distraction_types import DistractionClassType, FeatureGroupType

logger = logging.getLogger(__name__)

MIN_FRAMES_PER_STATE = 10


def assemble_frame_features(
    arm: ArmScoresDTO,
    gaze: GazeFeaturesDTO,
    closure: tuple[float, float],
    face: FaceFeaturesDTO,
    arm_valid: bool = True,
) -> FrameFeaturesDTO:
    """Concatenate the module outputs of one frame into the 17-value fusion vector.

    Args:
        arm: Arm pose scores.
        gaze: Gaze features; invalid ones still contribute their held values.
        closure: Left and right eye closure scores.
        face: Head angles and mouth animation units.
        arm_valid: Whether the arm scores come from a valid arm feature vector.

    Returns:
        FrameFeaturesDTO: The frame vector with per-module validity.
    """
    values = np.concatenate([arm.as_array(), gaze.as_array(), np.asarray(closure, dtype=np.float64), face.as_array()])
    return FrameFeaturesDTO(values=values, arm_valid=arm_valid, eyes_valid=gaze.valid, face_valid=face.valid)


def feature_columns(groups: Sequence[str | FeatureGroupType]) -> np.ndarray:
    """Frame vector columns owned by the given groups, ascending.

    Args:
        groups: Group members or their names.

    Returns:
        np.ndarray: Column indices.
    """
    members = {group if isinstance(group, FeatureGroupType) else FeatureGroupType[group] for group in groups}
    return np.asarray(sorted(index for member in members for index in member.value), dtype=np.int64)


def select_feature_groups(features: np.ndarray, groups: Sequence[str | FeatureGroupType]) -> np.ndarray:
    """Keep only the frame vector columns of the given groups.

    Args:
        features: (T, 17) frame vectors.
        groups: Groups to keep.

    Returns:
        np.ndarray: (T, F) selected columns in frame-vector order.
    """
    features = np.asarray(features, dtype=np.float64)
    if features.ndim != 2 or features.shape[1] != FRAME_FEATURE_COUNT:
        raise DimensionMismatchError(expected=(-1, FRAME_FEATURE_COUNT), actual=features.shape)
    return features[:, feature_columns(groups)]


def _window_bounds(length: int, window: int) -> tuple[np.ndarray, np.ndarray]:
    """Start (inclusive) and stop (exclusive) of every frame's centered, truncated window."""
    back = window // 2
    forward = window - back - 1
    frames = np.arange(length)
    return np.maximum(frames - back, 0), np.minimum(frames + forward + 1, length)


def smooth_features(features: np.ndarray, window: int = 100) -> np.ndarray:
    """Running median and running population standard deviation of every column.

    The window holds ``window // 2`` frames before each frame and the rest after it,
    truncated at the sequence ends.

    Args:
        features: (T, F) frame vectors.
        window: Window length.

    Returns:
        np.ndarray: (T, 2F) medians followed by standard deviations.

    Raises:
        EmptyInputError: If there are no frames.
    """
    features = np.asarray(features, dtype=np.float64)
    if features.ndim != 2 or features.shape[0] == 0:
        raise EmptyInputError("features")
    length = features.shape[0]
    starts, stops = _window_bounds(length, window)
    medians = np.empty_like(features)
    deviations = np.empty_like(features)

    full = np.flatnonzero(stops - starts == window)
    if full.size:
        windows = sliding_window_view(features, window, axis=0)[starts[full]]
        medians[full] = np.median(windows, axis=2)
        deviations[full] = np.std(windows, axis=2)
    for frame in np.flatnonzero(stops - starts != window):
        block = features[starts[frame] : stops[frame]]
        medians[frame] = np.median(block, axis=0)
        deviations[frame] = np.std(block, axis=0)
    return np.hstack([medians, deviations])


def append_deltas(smoothed: np.ndarray) -> np.ndarray:
    """Append first and second temporal differences of the running medians.

    Differences are backward; the first frame gets zeros.

    Args:
        smoothed: (T, 2F) output of ``smooth_features``.

    Returns:
        np.ndarray: (T, 4F) features.
    """
    smoothed = np.asarray(smoothed, dtype=np.float64)
    medians = smoothed[:, : smoothed.shape[1] // 2]
    delta = np.diff(medians, axis=0, prepend=medians[:1])
    delta_delta = np.diff(delta, axis=0, prepend=delta[:1])
    return np.hstack([smoothed, delta, delta_delta])


def fusion_features(frames: np.ndarray, settings: FusionSettingsDTO, smoothed: bool = True) -> np.ndarray:
    """Turn frame vectors into classifier input.

    Args:
        frames: (T, 17) frame vectors.
        settings: Group subset, window and delta settings.
        smoothed: Return smoothed features; otherwise the selected raw columns.

    Returns:
        np.ndarray: (T, D) classifier input.
    """
    selected = select_feature_groups(frames, settings.feature_groups)
    if not smoothed:
        return selected
    features = smooth_features(selected, settings.window_size)
    return append_deltas(features) if settings.use_deltas else features


def mode_filter(labels: np.ndarray, window: int = 100) -> np.ndarray:
    """Replace every label by the most frequent label of its centered window.

    When more than one label reaches the highest count the frame keeps its own label,
    whether or not that label is among the most frequent ones.

    Args:
        labels: (T,) class codes.
        window: Window length.

    Returns:
        np.ndarray: (T,) filtered labels.
    """
    labels = np.asarray(labels, dtype=np.int64)
    if labels.size == 0:
        return labels.copy()
    codes, positions = np.unique(labels, return_inverse=True)
    one_hot = np.zeros((labels.size + 1, codes.size), dtype=np.int64)
    one_hot[np.arange(1, labels.size + 1), positions] = 1
    cumulative = np.cumsum(one_hot, axis=0)
    starts, stops = _window_bounds(labels.size, window)
    counts = cumulative[stops] - cumulative[starts]

    best = counts.max(axis=1)
    tied = (counts == best[:, None]).sum(axis=1) > 1
    return np.where(tied, labels, codes[np.argmax(counts, axis=1)])


def _training_matrix(
    sequences: Sequence[FusionSequenceDTO],
    settings: FusionSettingsDTO,
    stride: int,
) -> tuple[np.ndarray, np.ndarray]:
    features = [fusion_features(sequence.features, settings)[::stride] for sequence in sequences]
    labels = [sequence.labels[::stride] for sequence in sequences]
    return np.vstack(features), np.concatenate(labels)


def _warn_missing_classes(labels: np.ndarray, path: str) -> None:
    present = set(np.unique(labels).tolist())
    missing = [member.name for member in DistractionClassType if member.value not in present]
    if missing:
        logger.warning("%s training data lacks classes %s", path, ", ".join(missing))


def train_fusion_adaboost(
    sequences: Sequence[FusionSequenceDTO],
    settings: FusionSettingsDTO | None = None,
    fusion_config: FusionConfig | None = None,
    adaboost_config: AdaBoostConfig | None = None,
) -> OneVsAllModelDTO:
    """Train the one-vs-all Real AdaBoost fusion path on smoothed features.

    Args:
        sequences: Training sessions.
        settings: Feature settings; built from the config when omitted.
        fusion_config: Optional config section. If not provided, uses the global config.
        adaboost_config: Optional config section. If not provided, uses the global config.

    Returns:
        OneVsAllModelDTO: One scorer per class present in the training data.
    """
    configs: FusionConfig = fusion_config or BaseConfig.global_config().FUSION
    settings = settings or FusionSettingsDTO.from_config(configs)
    if not sequences:
        raise EmptyInputError("sequences")
    samples, labels = _training_matrix(sequences, settings, configs.TRAINING_STRIDE)
    _warn_missing_classes(labels, "AdaBoost")
    logger.info("Training fusion AdaBoost on %d samples of %d features", samples.shape[0], samples.shape[1])
    return OneVsAllTrainer(RealAdaBoostTrainer(adaboost_config=adaboost_config)).fit(samples, labels)


def _class_runs(sequences: Sequence[np.ndarray], labels: Sequence[np.ndarray], code: int) -> list[np.ndarray]:
    """Maximal contiguous runs of one class, as training sequences."""
    runs = []
    for features, truth in zip(sequences, labels, strict=True):
        flags = np.concatenate([[False], truth == code, [False]])
        edges = np.flatnonzero(np.diff(flags.astype(np.int8)))
        runs.extend(features[start:stop] for start, stop in zip(edges[::2], edges[1::2], strict=True))
    return runs


def train_fusion_hmms(
    sequences: Sequence[FusionSequenceDTO],
    seed: int,
    settings: FusionSettingsDTO | None = None,
    fusion_config: FusionConfig | None = None,
    hmm_config: HmmConfig | None = None,
) -> FusionHmmBundleDTO:
    """Train one Gaussian HMM per distraction class.

    Observations are z-scored with statistics of all training frames. Every maximal run
    of a class's frames is one training sequence of that class's model.

    Args:
        sequences: Training sessions.
        seed: Seed of the HMM initializations; class ``k`` uses ``seed + k``.
        settings: Feature settings; built from the config when omitted.
        fusion_config: Optional config section. If not provided, uses the global config.
        hmm_config: Optional config section. If not provided, uses the global config.

    Returns:
        FusionHmmBundleDTO: Models for all five classes.

    Raises:
        InsufficientDataError: If a class has fewer than ten frames per state.
    """
    settings = settings or FusionSettingsDTO.from_config(fusion_config or BaseConfig.global_config().FUSION)
    hmm_configs: HmmConfig = hmm_config or BaseConfig.global_config().HMM
    if not sequences:
        raise EmptyInputError("sequences")
    features = [fusion_features(sequence.features, settings, settings.hmm_use_smoothed) for sequence in sequences]
    stacked = np.vstack(features)
    mean = stacked.mean(axis=0)
    scale = stacked.std(axis=0)
    scale[scale <= 0] = 1.0
    standardized = [(block - mean) / scale for block in features]
    truths = [sequence.labels for sequence in sequences]

    trainer = GaussianHmmTrainer(hmm_configs)
    required = MIN_FRAMES_PER_STATE * hmm_configs.STATE_COUNT
    models: list[GaussianHmmDTO] = []
    for member in DistractionClassType:
        runs = _class_runs(standardized, truths, member.value)
        available = sum(run.shape[0] for run in runs)
        if available < required:
            raise InsufficientDataError(subject=member.name, required=required, available=available)
        model = trainer.fit(runs, seed=seed + member.value)
        logger.info(
            "HMM for %s: %d runs, %d frames, %d EM iterations",
            member.name,
            len(runs),
            available,
            model.log_likelihood_history.size,
        )
        models.append(model)

    return FusionHmmBundleDTO(
        class_codes=tuple(member.value for member in DistractionClassType),
        models=tuple(models),
        feature_mean=mean,
        feature_scale=scale,
        use_smoothed=settings.hmm_use_smoothed,
    )


def windowed_class_scores(bundle: FusionHmmBundleDTO, observations: np.ndarray, window: int = 100) -> np.ndarray:
    """Length-normalized Viterbi log-likelihood of every frame's window under every class model.

    Args:
        bundle: Per-class HMMs.
        observations: (T, D) standardized observations.
        window: Window length.

    Returns:
        np.ndarray: (T, K) scores in class-code order.
    """
    length = observations.shape[0]
    starts, stops = _window_bounds(length, window)
    sizes = stops - starts
    full = np.flatnonzero(sizes == window)
    partial = np.flatnonzero(sizes != window)
    scores = np.empty((length, len(bundle.models)))
    for column, model in enumerate(bundle.models):
        log_emissions = model.emission_log_prob(observations)
        if full.size:
            scores[full, column] = viterbi_log_likelihoods(model, log_emissions, starts[full], window) / window
        for frame in partial:
            size = int(sizes[frame])
            value = viterbi_log_likelihoods(model, log_emissions, starts[frame : frame + 1], size)[0]
            scores[frame, column] = value / size
    return scores


def classify_frames_adaboost(
    model: OneVsAllModelDTO,
    frames: np.ndarray,
    settings: FusionSettingsDTO,
) -> np.ndarray:
    """Per-frame AdaBoost decision followed by the mode filter.

    Args:
        model: Fusion AdaBoost path.
        frames: (T, 17) frame vectors of one session.
        settings: Settings the model was trained with.

    Returns:
        np.ndarray: (T,) class codes.
    """
    codes, _ = model.classify(fusion_features(frames, settings))
    return mode_filter(codes, settings.window_size)


def classify_frames_hmm(
    bundle: FusionHmmBundleDTO,
    frames: np.ndarray,
    settings: FusionSettingsDTO,
) -> np.ndarray:
    """Assign every frame the class whose HMM best explains its centered window.

    Args:
        bundle: Per-class HMMs.
        frames: (T, 17) frame vectors of one session.
        settings: Settings the models were trained with.

    Returns:
        np.ndarray: (T,) class codes; ties go to the smallest code.
    """
    observations = bundle.standardize(fusion_features(frames, settings, bundle.use_smoothed))
    scores = windowed_class_scores(bundle, observations, settings.window_size)
    return np.asarray(bundle.class_codes, dtype=np.int64)[np.argmax(scores, axis=1)]
