import numpy as np
import numpy.typing as npt
from pydantic import field_validator, model_validator

from distractipy.models.dtos.base_dtos import BaseDTO
from distractipy.models.types.distraction_types import ArmPoseType

ForegroundMask = npt.NDArray[np.bool_]

ARM_FEATURE_COUNT = 120


class ContourChainDTO(BaseDTO):
    """Ordered boundary pixels of a foreground component.

    Attributes:
        pixels: (N, 2) integer array of (x, y) image coordinates.
        points3d: (N, 3) array of (X, Y, Z) millimeters, parallel to ``pixels``.
        centroid: (x, y) centroid of the foreground the chain was traced from.
    """

    pixels: np.ndarray
    points3d: np.ndarray
    centroid: tuple[float, float]

    @model_validator(mode="after")
    def _check_parallel(self) -> "ContourChainDTO":
        if self.pixels.ndim != 2 or self.pixels.shape[1] != 2:
            raise ValueError("pixels must have shape (N, 2)")
        if self.points3d.shape != (self.pixels.shape[0], 3):
            raise ValueError("points3d must have shape (N, 3) matching pixels")
        return self

    def __len__(self) -> int:
        """Number of pixels in the chain."""
        return int(self.pixels.shape[0])

    def subchain(self, indices: np.ndarray) -> "ContourChainDTO":
        """Return the chain restricted to the given positions, in the given order.

        Args:
            indices: Positions into this chain.

        Returns:
            ContourChainDTO: The sub-chain, sharing the centroid.
        """
        return ContourChainDTO(
            pixels=self.pixels[indices],
            points3d=self.points3d[indices],
            centroid=self.centroid,
        )


class ArmFeatureVectorDTO(BaseDTO):
    """120 segment axes (20 frontal then 20 profile, 3 components each) and a validity flag."""

    values: np.ndarray
    valid: bool

    @field_validator("values")
    @classmethod
    def _check_length(cls, value: np.ndarray) -> np.ndarray:
        value = np.asarray(value, dtype=np.float64)
        if value.shape != (ARM_FEATURE_COUNT,):
            raise ValueError(f"arm feature vector must have {ARM_FEATURE_COUNT} values")
        return value


class ArmScoresDTO(BaseDTO):
    """Raw one-vs-all scores for the four arm positions."""

    up: float
    down: float
    right: float
    forward: float

    @model_validator(mode="after")
    def _check_finite(self) -> "ArmScoresDTO":
        if not np.all(np.isfinite(self.as_array())):
            raise ValueError("arm scores must be finite")
        return self

    def as_array(self) -> np.ndarray:
        """Scores in ArmPoseType order."""
        return np.array([self.up, self.down, self.right, self.forward], dtype=np.float64)

    @property
    def predicted(self) -> ArmPoseType:
        """Arm pose with the highest score (smallest code on ties)."""
        return ArmPoseType(int(np.argmax(self.as_array())))
