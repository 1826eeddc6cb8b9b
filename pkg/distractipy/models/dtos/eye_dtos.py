import numpy as np
from pydantic import Field, model_validator

from distractipy.models.dtos.base_dtos import BaseDTO


class FilterBankParamsDTO(BaseDTO):
    """Constants of the iris filter bank.

    Attributes:
        hough_radii: Inclusive range of Hough voting radii in pixels.
        hough_edge_percentile: Gradient magnitude percentile used as edge threshold.
        gabor_frequency: Radial frequency of the circular Gabor kernel.
        gabor_sigma: Width of the Gaussian envelope.
        gabor_support: Side of the square kernel support.
        mask_r1: Radius of the central separability disk.
        mask_r23: Outer radius of the two half-annuli.
        separability_epsilon: Mean intensities below this give a zero separability response.
    """

    hough_radii: tuple[int, int] = (6, 9)
    hough_edge_percentile: float = Field(default=70.0, gt=0, lt=100)
    gabor_frequency: float = 0.0884
    gabor_sigma: float = 4.5
    gabor_support: int = 31
    mask_r1: int = 6
    mask_r23: int = 15
    separability_epsilon: float = 1e-6

    @model_validator(mode="after")
    def _check_geometry(self) -> "FilterBankParamsDTO":
        low, high = self.hough_radii
        if not 0 < low <= high:
            raise ValueError("hough_radii must be an increasing positive range")
        if self.gabor_support % 2 == 0:
            raise ValueError("gabor_support must be odd")
        if not 0 < self.mask_r1 < self.mask_r23:
            raise ValueError("mask_r1 must be positive and smaller than mask_r23")
        return self


class IrisEstimateDTO(BaseDTO):
    """Iris center estimate in patch coordinates (x = column, y = row)."""

    center: tuple[int, int]
    combined_score: float
    per_filter_peaks: tuple[tuple[int, int], tuple[int, int], tuple[int, int]]
    valid: bool = True

    def with_center(self, center: tuple[int, int], valid: bool = True) -> "IrisEstimateDTO":
        """Copy with another center and validity.

        Args:
            center: New center.
            valid: New validity flag.

        Returns:
            IrisEstimateDTO: The updated estimate.
        """
        return self.model_copy(update={"center": center, "valid": valid})


class GazeFeaturesDTO(BaseDTO):
    """Iris position relative to the eye corners, per eye."""

    x_l: float = 0.0
    y_l: float = 0.0
    x_r: float = 0.0
    y_r: float = 0.0
    valid: bool = False

    @model_validator(mode="after")
    def _check_finite(self) -> "GazeFeaturesDTO":
        if not np.all(np.isfinite(self.as_array())):
            raise ValueError("gaze features must be finite")
        return self

    def as_array(self) -> np.ndarray:
        """The four values in frame-vector order."""
        return np.array([self.x_l, self.y_l, self.x_r, self.y_r], dtype=np.float64)
