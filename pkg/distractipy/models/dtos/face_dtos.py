import numpy as np
from pydantic import Field

from distractipy.models.dtos.base_dtos import BaseDTO


class FaceFeaturesDTO(BaseDTO):
    """Head orientation and mouth animation units for one frame."""

    pitch: float = Field(default=0.0, ge=-180.0, le=180.0)
    roll: float = Field(default=0.0, ge=-180.0, le=180.0)
    yaw: float = Field(default=0.0, ge=-180.0, le=180.0)
    au10: float = 0.0
    au26_27: float = 0.0
    au20: float = 0.0
    au13_15: float = 0.0
    valid: bool = False

    def as_array(self) -> np.ndarray:
        """The seven values in frame-vector order."""
        return np.array(
            [self.pitch, self.roll, self.yaw, self.au10, self.au26_27, self.au20, self.au13_15],
            dtype=np.float64,
        )
