import numpy as np
from pydantic import Field, model_validator

from distractipy.models.dtos.base_dtos import BaseDTO
from distractipy.models.dtos.fusion_dtos import FusionHmmBundleDTO
from distractipy.models.dtos.learner_dtos import OneVsAllModelDTO, RbfSvmModelDTO


class SessionObservationsDTO(BaseDTO):
    """Per-frame measurements of a session that do not depend on any trained model.

    Extracting these once per session lets every cross-validation fold reuse them; only
    the arm scores and eye closure scores need the fold's classifiers.

    Attributes:
        driver_id: Driver the session belongs to.
        session_id: Session identifier.
        labels: (T,) ground-truth class codes.
        arm_features: (T, 120) arm feature vectors.
        arm_valid: (T,) arm validity flags.
        iris_centers: (T, 2, 2) tracked iris centers (x, y) per eye, in patch pixels.
        gaze: (T, 4) gaze features, held over untracked frames.
        eyes_valid: (T,) eye module validity flags.
        templates: (T, 2, S, S) standardized iris templates per eye.
        face: (T, 7) head angles and animation units, held over untracked frames.
        face_valid: (T,) face tracker validity flags.
        eye_open: Optional (T, 2) open-eye annotations (1 open, 0 closed).
    """

    driver_id: str
    session_id: str
    labels: np.ndarray
    arm_features: np.ndarray
    arm_valid: np.ndarray
    iris_centers: np.ndarray
    gaze: np.ndarray
    eyes_valid: np.ndarray
    templates: np.ndarray
    face: np.ndarray
    face_valid: np.ndarray
    eye_open: np.ndarray | None = None

    @model_validator(mode="after")
    def _check_lengths(self) -> "SessionObservationsDTO":
        frames = self.labels.shape[0]
        arrays = (
            self.arm_features,
            self.arm_valid,
            self.iris_centers,
            self.gaze,
            self.eyes_valid,
            self.templates,
            self.face,
            self.face_valid,
        )
        if any(array.shape[0] != frames for array in arrays):
            raise ValueError("observation streams must have one row per frame")
        if self.eye_open is not None and self.eye_open.shape != (frames, 2):
            raise ValueError("eye_open must have shape (T, 2)")
        return self

    @property
    def frame_count(self) -> int:
        """Number of frames."""
        return int(self.labels.shape[0])


class TrainedPipelineDTO(BaseDTO):
    """Every classifier a fold trains, together with the fusion settings they were trained with.

    Attributes:
        arm_classifier: One-vs-all arm pose scorer over the 120 arm features.
        closure_svm: Eye closure SVM, absent when no closed-eye examples were available.
        fusion_adaboost: Fusion AdaBoost path, absent when not trained.
        fusion_hmm: Fusion HMM path, absent when not trained.
        window_size: Smoothing and mode filter window.
        use_deltas: Whether delta features were appended.
        feature_groups: Feature groups kept in the frame vector.
    """

    arm_classifier: OneVsAllModelDTO
    closure_svm: RbfSvmModelDTO | None = None
    fusion_adaboost: OneVsAllModelDTO | None = None
    fusion_hmm: FusionHmmBundleDTO | None = None
    window_size: int = Field(default=100, ge=2)
    use_deltas: bool = False
    feature_groups: tuple[str, ...] = ("ARM", "EYES", "ORIENTATION", "EXPRESSION")


class SessionPredictionDTO(BaseDTO):
    """Aligned ground truth and per-path predictions for one session."""

    driver_id: str
    session_id: str
    truth: np.ndarray
    adaboost: np.ndarray | None = None
    hmm: np.ndarray | None = None

    @model_validator(mode="after")
    def _check_alignment(self) -> "SessionPredictionDTO":
        for labels in (self.adaboost, self.hmm):
            if labels is not None and labels.shape != self.truth.shape:
                raise ValueError("predictions must align with the ground truth")
        return self
