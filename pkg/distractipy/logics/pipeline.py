import logging
from collections.abc import Sequence

import numpy as np

from distractipy.configs.base_config import BaseConfig
from distractipy.helpers.decorators.timing import timing_decorator
from distractipy.logics.arm_position import arm_features, arm_score_matrix, train_arm_classifier
from distractipy.logics.eye_behavior import (
    IrisTracker,
    eye_closure_scores,
    gaze_features,
    iris_template,
    patch_to_color,
    train_closure_svm,
)
from distractipy.logics.face_channel import face_stream
from distractipy.logics.fusion import (
    classify_frames_adaboost,
    classify_frames_hmm,
    train_fusion_adaboost,
    train_fusion_hmms,
)
from distractipy.models.dtos.fusion_dtos import FusionSequenceDTO, FusionSettingsDTO
from distractipy.models.dtos.learner_dtos import RbfSvmModelDTO
from distractipy.models.dtos.pipeline_dtos import SessionObservationsDTO, SessionPredictionDTO, TrainedPipelineDTO
from distractipy.models.dtos.session_dtos import EYE_SIDES, SessionDTO
from distractipy.models.errors import EmptyInputError, InvalidArgumentError
from distractipy.models.types.distraction_types import ClassifierPathType, DistractionClassType

logger = logging.getLogger(__name__)


@timing_decorator
def observe_session(session: SessionDTO, config: BaseConfig | None = None) -> SessionObservationsDTO:
    """Extract every per-frame measurement that does not depend on a trained model.

    The eye module only runs on frames where the face tracker supplies eye corners.
    Other frames repeat the last gaze, iris centers and templates, flagged invalid.

    Args:
        session: The session to observe.
        config: Optional configuration. If not provided, uses the global config.

    Returns:
        SessionObservationsDTO: Arm vectors, iris estimates, gaze, templates and face features.
    """
    configs: BaseConfig = config or BaseConfig.global_config()
    frames = session.frame_count
    template_size = configs.EYE.TEMPLATE_SIZE
    patch_size = session.eye_patch_size

    arm_rows = [
        arm_features(session.depth[frame], session.background, session.focal_length, configs.ARM)
        for frame in range(frames)
    ]
    face, face_valid = face_stream(session.face)

    trackers = {side: IrisTracker(eye_config=configs.EYE) for side in EYE_SIDES}
    centers = np.zeros((frames, 2, 2))
    gaze = np.zeros((frames, 4))
    eyes_valid = np.zeros(frames, dtype=bool)
    templates = np.zeros((frames, 2, template_size, template_size))
    for frame, record in enumerate(session.face):
        if not record.tracked:
            if frame > 0:
                centers[frame] = centers[frame - 1]
                gaze[frame] = gaze[frame - 1]
                templates[frame] = templates[frame - 1]
            continue
        irises = []
        valid = True
        for index, side in enumerate(EYE_SIDES):
            patch = session.eye_pixels(frame, side)
            estimate = trackers[side].update(patch)
            valid = valid and estimate.valid
            centers[frame, index] = estimate.center
            templates[frame, index] = iris_template(patch, estimate.center, template_size)
            outer, inner = record.corners(side)
            irises.append(patch_to_color(estimate.center, outer, inner, patch_size))
        try:
            features = gaze_features(irises[0], irises[1], record, configs.EYE.GAZE_CLAMP)
        except InvalidArgumentError as e:
            logger.debug("Gaze unavailable at frame %d: %s", frame, e)
            gaze[frame] = gaze[frame - 1] if frame > 0 else 0.0
            continue
        gaze[frame] = features.as_array()
        eyes_valid[frame] = valid

    eye_open = None
    if session.eye_annotations is not None:
        eye_open = session.eye_annotations[:, :2].astype(np.float64)

    logger.info(
        "Observed %s/%s: %d frames, arm valid %.1f%%, eyes valid %.1f%%, face tracked %.1f%%",
        session.driver_id,
        session.session_id,
        frames,
        100.0 * np.mean([row.valid for row in arm_rows]),
        100.0 * eyes_valid.mean(),
        100.0 * face_valid.mean(),
    )
    return SessionObservationsDTO(
        driver_id=session.driver_id,
        session_id=session.session_id,
        labels=session.labels,
        arm_features=np.vstack([row.values for row in arm_rows]),
        arm_valid=np.asarray([row.valid for row in arm_rows], dtype=bool),
        iris_centers=centers,
        gaze=gaze,
        eyes_valid=eyes_valid,
        templates=templates,
        face=face,
        face_valid=face_valid,
        eye_open=eye_open,
    )


def hold_invalid_rows(values: np.ndarray, valid: np.ndarray) -> np.ndarray:
    """Replace invalid rows by the last valid row, or zeros before the first one.

    Args:
        values: (T, D) array.
        valid: (T,) flags.

    Returns:
        np.ndarray: The filled copy.
    """
    values = np.asarray(values, dtype=np.float64)
    last = np.where(valid, np.arange(valid.size), -1)
    np.maximum.accumulate(last, out=last)
    filled = np.zeros_like(values)
    seen = last >= 0
    filled[seen] = values[last[seen]]
    return filled


def closure_scores(observations: SessionObservationsDTO, model: RbfSvmModelDTO | None) -> np.ndarray:
    """Eye closure SVM scores of both eyes of every frame.

    Args:
        observations: Session observations.
        model: Closure SVM, or None when the fold had no closed-eye examples.

    Returns:
        np.ndarray: (T, 2) scores, zeros without a model.
    """
    if model is None:
        return np.zeros((observations.frame_count, 2))
    return np.column_stack([eye_closure_scores(observations.templates[:, side], model) for side in range(2)])


def frame_matrix(observations: SessionObservationsDTO, pipeline: TrainedPipelineDTO) -> np.ndarray:
    """The 17-value fusion vectors of every frame of a session.

    Arm scores of frames without a valid arm vector repeat the last valid scores.

    Args:
        observations: Session observations.
        pipeline: Trained arm classifier and closure SVM.

    Returns:
        np.ndarray: (T, 17) frame vectors.
    """
    arm_scores = arm_score_matrix(observations.arm_features, pipeline.arm_classifier)
    arm = hold_invalid_rows(arm_scores, observations.arm_valid)
    closure = closure_scores(observations, pipeline.closure_svm)
    return np.hstack([arm, observations.gaze, closure, observations.face])


def _fit_closure_svm(
    observations: Sequence[SessionObservationsDTO],
    seed: int,
    config: BaseConfig,
) -> RbfSvmModelDTO | None:
    templates = []
    labels = []
    for item in observations:
        if item.eye_open is None:
            continue
        usable = item.face_valid
        for side in range(2):
            templates.append(item.templates[usable, side])
            labels.append(np.where(item.eye_open[usable, side] > 0.5, 1, -1))
    if not templates:
        logger.warning("No eye annotations in the training sessions; closure scores are zero")
        return None
    samples = np.concatenate(templates)
    targets = np.concatenate(labels)
    open_rows = np.flatnonzero(targets > 0)
    closed_rows = np.flatnonzero(targets < 0)
    if closed_rows.size == 0 or open_rows.size == 0:
        logger.warning("Eye annotations hold a single eye state; closure scores are zero")
        return None

    rng = np.random.default_rng(seed)
    budget = config.EYE.CLOSURE_TRAINING_SIZE
    closed_take = min(closed_rows.size, budget // 2)
    open_take = min(open_rows.size, budget - closed_take)
    chosen = np.sort(
        np.concatenate(
            [
                rng.choice(closed_rows, size=closed_take, replace=False),
                rng.choice(open_rows, size=open_take, replace=False),
            ],
        ),
    )
    logger.info("Training closure SVM on %d open and %d closed templates", open_take, closed_take)
    return train_closure_svm(samples[chosen], targets[chosen], config.SVM)


@timing_decorator
def train_fold(
    observations: Sequence[SessionObservationsDTO],
    seed: int,
    config: BaseConfig | None = None,
) -> TrainedPipelineDTO:
    """Train every classifier of the pipeline on a set of sessions.

    Args:
        observations: Training sessions.
        seed: Seed of every random choice made while training.
        config: Optional configuration. If not provided, uses the global config.

    Returns:
        TrainedPipelineDTO: Arm classifier, closure SVM and the selected fusion paths.
    """
    configs: BaseConfig = config or BaseConfig.global_config()
    if not observations:
        raise EmptyInputError("observations")
    settings = FusionSettingsDTO.from_config(configs.FUSION)
    stride = configs.ARM.TRAINING_STRIDE

    arm_samples = []
    arm_poses = []
    for item in observations:
        rows = np.flatnonzero(item.arm_valid)[::stride]
        arm_samples.append(item.arm_features[rows])
        arm_poses.append([DistractionClassType(int(code)).arm_pose.value for code in item.labels[rows]])
    arm_classifier = train_arm_classifier(np.vstack(arm_samples), np.concatenate(arm_poses), configs.ADABOOST)
    closure_svm = _fit_closure_svm(observations, seed, configs)

    partial = TrainedPipelineDTO(
        arm_classifier=arm_classifier,
        closure_svm=closure_svm,
        window_size=settings.window_size,
        use_deltas=settings.use_deltas,
        feature_groups=settings.feature_groups,
    )
    sequences = [FusionSequenceDTO(features=frame_matrix(item, partial), labels=item.labels) for item in observations]
    path = ClassifierPathType(configs.FUSION.CLASSIFIER_PATH)
    fusion_adaboost = None
    fusion_hmm = None
    if path.includes(ClassifierPathType.ADABOOST):
        fusion_adaboost = train_fusion_adaboost(sequences, settings, configs.FUSION, configs.ADABOOST)
    if path.includes(ClassifierPathType.HMM):
        fusion_hmm = train_fusion_hmms(sequences, seed, settings, configs.FUSION, configs.HMM)
    return partial.model_copy(update={"fusion_adaboost": fusion_adaboost, "fusion_hmm": fusion_hmm})


def pipeline_settings(pipeline: TrainedPipelineDTO) -> FusionSettingsDTO:
    """Fusion settings a trained pipeline was built with.

    Args:
        pipeline: The trained pipeline.

    Returns:
        FusionSettingsDTO: Its settings.
    """
    return FusionSettingsDTO(
        window_size=pipeline.window_size,
        feature_groups=pipeline.feature_groups,
        use_deltas=pipeline.use_deltas,
        hmm_use_smoothed=pipeline.fusion_hmm.use_smoothed if pipeline.fusion_hmm else True,
    )


def predict_session(pipeline: TrainedPipelineDTO, observations: SessionObservationsDTO) -> SessionPredictionDTO:
    """Label every frame of a session with each trained fusion path.

    Args:
        pipeline: The trained pipeline.
        observations: The session to label.

    Returns:
        SessionPredictionDTO: Ground truth and the predictions of the trained paths.
    """
    settings = pipeline_settings(pipeline)
    frames = frame_matrix(observations, pipeline)
    adaboost = None
    hmm = None
    if pipeline.fusion_adaboost is not None:
        adaboost = classify_frames_adaboost(pipeline.fusion_adaboost, frames, settings)
    if pipeline.fusion_hmm is not None:
        hmm = classify_frames_hmm(pipeline.fusion_hmm, frames, settings)
    return SessionPredictionDTO(
        driver_id=observations.driver_id,
        session_id=observations.session_id,
        truth=observations.labels,
        adaboost=adaboost,
        hmm=hmm,
    )
