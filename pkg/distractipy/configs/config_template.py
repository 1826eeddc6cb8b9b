from typing import Literal

from pydantic import BaseModel, Field, model_validator


class SessionConfig(BaseModel):
    """Configuration of the on-disk session format.

    Values here are written into every session manifest and checked again on load.
    """

    FRAME_RATE: float = Field(default=16.7, gt=0, description="Nominal frame rate in frames per second")
    FOCAL_LENGTH: float = Field(default=571.0, gt=0, description="Pinhole focal length of the depth camera in pixels")
    EYE_PATCH_SIZE: int = Field(default=60, description="Side of the square eye patches in pixels")
    FORMAT_VERSION: int = 1
    FRAME_ID_WIDTH: int = Field(default=6, description="Zero padding of frame file names")


class GeneratorConfig(BaseModel):
    """Configuration for the synthetic session generator.

    The default segment plan covers 3000 frames (about three minutes at 16.7 fps). It
    alternates normal driving with each distraction so that every class is present in
    every session.
    """

    WIDTH: int = Field(default=80, gt=16)
    HEIGHT: int = Field(default=60, gt=16)
    SEGMENTS: list[tuple[str, int]] = Field(
        default=[
            ("NORMAL_DRIVING", 400),
            ("PHONE_CALL", 350),
            ("NORMAL_DRIVING", 250),
            ("DRINKING", 300),
            ("NORMAL_DRIVING", 250),
            ("TEXT_MESSAGE", 350),
            ("NORMAL_DRIVING", 250),
            ("OBJECT_DISTRACTION", 350),
            ("NORMAL_DRIVING", 500),
        ],
        description="Ordered (class name, frame count) plan",
    )
    SHUFFLE_DISTRACTIONS: bool = Field(
        default=True,
        description="Permute the distraction segments per seed while keeping normal segments in place",
    )
    DEPTH_NOISE_MM: float = Field(default=8.0, ge=0)
    INVALID_PIXEL_RATE: float = Field(default=0.002, ge=0, lt=0.1)
    POSE_JITTER_PX: float = Field(default=1.0, ge=0)
    EYE_NOISE: float = Field(default=0.05, ge=0)
    FACE_ANGLE_NOISE: float = Field(default=4.0, ge=0)
    FACE_AU_NOISE: float = Field(default=0.08, ge=0)


class ArmConfig(BaseModel):
    """Configuration for the arm position module."""

    BACKGROUND_THRESHOLD_MM: float = Field(default=80.0, gt=0)
    SEGMENT_COUNT: int = Field(default=20, ge=1)
    PROFILE_BIN_MM: float = Field(default=5.0, gt=0)
    CLOSING_SIZE: int = Field(default=3, ge=1)
    TRAINING_STRIDE: int = Field(default=5, ge=1, description="Keep every n-th valid frame for classifier training")


class EyeConfig(BaseModel):
    """Configuration for the eye behavior module (filter bank constants live in FilterBankParamsDTO)."""

    CONSISTENCY_DISTANCE: float = Field(default=15.0, gt=0)
    TEMPLATE_SIZE: int = Field(default=24, ge=4)
    GAZE_CLAMP: float = Field(default=2.0, gt=0)
    CLOSURE_TRAINING_SIZE: int = Field(default=2000, ge=2, description="Templates sampled per fold for the closure SVM")


class AdaBoostConfig(BaseModel):
    """Configuration for Real AdaBoost with decision-tree weak learners."""

    ROUNDS: int = Field(default=300, ge=1)
    MAX_DEPTH: int = Field(default=4, ge=1, le=4)


class SvmConfig(BaseModel):
    """Configuration for the SMO-trained RBF SVM."""

    C: float = Field(default=1.0, gt=0)
    SIGMA: float = Field(default=13.0, gt=0)
    TOLERANCE: float = Field(default=1e-3, gt=0)
    MAX_ITERATIONS: int = Field(default=200_000, ge=1)


class HmmConfig(BaseModel):
    """Configuration for Gaussian-emission hidden Markov models."""

    STATE_COUNT: int = Field(default=10, ge=2, le=30)
    MAX_ITERATIONS: int = Field(default=100, ge=1)
    TOLERANCE: float = Field(default=1e-4, gt=0, description="Stop when the total log-likelihood gain of an iteration drops below")
    VARIANCE_FLOOR: float = Field(default=1e-6, gt=0)
    SELF_LOOP: float = Field(default=0.8, gt=0, lt=1)


class FusionConfig(BaseModel):
    """Configuration for feature fusion and the two classifier paths."""

    WINDOW_SIZE: int = Field(default=100, ge=2)
    TRAINING_STRIDE: int = Field(default=4, ge=1)
    USE_DELTAS: bool = False
    HMM_USE_SMOOTHED: bool = True
    FEATURE_GROUPS: list[Literal["ARM", "EYES", "ORIENTATION", "EXPRESSION"]] = Field(
        default=["ARM", "EYES", "ORIENTATION", "EXPRESSION"],
    )
    CLASSIFIER_PATH: Literal["ADABOOST", "HMM", "BOTH"] = "BOTH"

    @model_validator(mode="after")
    def _check_groups(self) -> "FusionConfig":
        if not self.FEATURE_GROUPS:
            raise ValueError("FEATURE_GROUPS must name at least one group")
        if len(set(self.FEATURE_GROUPS)) != len(self.FEATURE_GROUPS):
            raise ValueError("FEATURE_GROUPS must not repeat a group")
        return self
