from typing import Self

import numpy as np
from pydantic import Field, field_validator, model_validator

from distractipy.configs.config_template import FusionConfig
from distractipy.models.dtos.base_dtos import BaseDTO
from distractipy.models.dtos.learner_dtos import GaussianHmmDTO
from distractipy.models.types.distraction_types import FeatureGroupType

FRAME_FEATURE_COUNT = 17
FRAME_FEATURE_NAMES = (
    "arm_up",
    "arm_down",
    "arm_right",
    "arm_forward",
    "gaze_x_l",
    "gaze_y_l",
    "gaze_x_r",
    "gaze_y_r",
    "closure_l",
    "closure_r",
    "pitch",
    "roll",
    "yaw",
    "au10",
    "au26_27",
    "au20",
    "au13_15",
)


class FrameFeaturesDTO(BaseDTO):
    """The 17-value per-frame fusion input with per-module validity flags."""

    values: np.ndarray
    arm_valid: bool
    eyes_valid: bool
    face_valid: bool

    @field_validator("values")
    @classmethod
    def _check_values(cls, value: np.ndarray) -> np.ndarray:
        value = np.asarray(value, dtype=np.float64)
        if value.shape != (FRAME_FEATURE_COUNT,):
            raise ValueError(f"frame features must have {FRAME_FEATURE_COUNT} values")
        if not np.all(np.isfinite(value)):
            raise ValueError("frame features must be finite")
        return value

    @property
    def validity(self) -> np.ndarray:
        """Flags in (arm, eyes, face) order."""
        return np.array([self.arm_valid, self.eyes_valid, self.face_valid], dtype=bool)


class FusionHmmBundleDTO(BaseDTO):
    """One HMM per class plus the z-score statistics applied to their observations.

    Attributes:
        class_codes: Class code of each model, ascending.
        models: The per-class HMMs.
        feature_mean: Training mean of every observation column.
        feature_scale: Training standard deviation of every column, 1 where it was 0.
        use_smoothed: Whether the models consume smoothed features or raw frame vectors.
    """

    class_codes: tuple[int, ...]
    models: tuple[GaussianHmmDTO, ...]
    feature_mean: np.ndarray
    feature_scale: np.ndarray
    use_smoothed: bool = True

    @model_validator(mode="after")
    def _check_bundle(self) -> "FusionHmmBundleDTO":
        if not self.models or len(self.class_codes) != len(self.models):
            raise ValueError("one HMM per class code is required")
        if list(self.class_codes) != sorted(set(self.class_codes)):
            raise ValueError("class codes must be unique and sorted")
        columns = self.models[0].n_features
        if self.feature_mean.shape != (columns,) or self.feature_scale.shape != (columns,):
            raise ValueError("z-score statistics must match the HMM observation width")
        if np.any(self.feature_scale <= 0):
            raise ValueError("feature scales must be positive")
        return self

    def standardize(self, features: np.ndarray) -> np.ndarray:
        """Apply the stored z-score transform.

        Args:
            features: (T, D) observations.

        Returns:
            np.ndarray: Standardized observations.
        """
        return (np.asarray(features, dtype=np.float64) - self.feature_mean) / self.feature_scale


class FusionSequenceDTO(BaseDTO):
    """Frame vectors of one session with their ground-truth labels."""

    features: np.ndarray
    labels: np.ndarray

    @model_validator(mode="after")
    def _check_alignment(self) -> "FusionSequenceDTO":
        if self.features.ndim != 2 or self.features.shape[1] != FRAME_FEATURE_COUNT:
            raise ValueError(f"fusion sequences must have shape (T, {FRAME_FEATURE_COUNT})")
        if self.labels.shape != (self.features.shape[0],):
            raise ValueError("one label per frame is required")
        return self


class FusionSettingsDTO(BaseDTO):
    """How frame vectors are turned into classifier input.

    Attributes:
        window_size: Smoothing and mode filter window.
        feature_groups: Names of the FeatureGroupType members kept in the frame vector.
        use_deltas: Append first and second differences of the running medians.
        hmm_use_smoothed: Feed the HMMs smoothed features instead of raw frame vectors.
    """

    window_size: int = Field(default=100, ge=2)
    feature_groups: tuple[str, ...] = ("ARM", "EYES", "ORIENTATION", "EXPRESSION")
    use_deltas: bool = False
    hmm_use_smoothed: bool = True

    @field_validator("feature_groups")
    @classmethod
    def _check_groups(cls, value: tuple[str, ...]) -> tuple[str, ...]:
        names = {group.name for group in FeatureGroupType}
        if not value or len(set(value)) != len(value) or not set(value) <= names:
            raise ValueError(f"feature groups must be distinct members of {sorted(names)}")
        return value

    @classmethod
    def from_config(cls, fusion_config: FusionConfig) -> Self:
        """Build the settings from a config section.

        Args:
            fusion_config: The FUSION section.

        Returns:
            FusionSettingsDTO: The settings.
        """
        return cls(
            window_size=fusion_config.WINDOW_SIZE,
            feature_groups=tuple(fusion_config.FEATURE_GROUPS),
            use_deltas=fusion_config.USE_DELTAS,
            hmm_use_smoothed=fusion_config.HMM_USE_SMOOTHED,
        )
