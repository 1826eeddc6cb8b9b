import math
from typing import Any

import numpy as np
import numpy.typing as npt
from pydantic import Field, field_validator, model_validator

from distractipy.models.dtos.base_dtos import BaseDTO
from distractipy.models.types.distraction_types import DistractionClassType

DepthFrame = npt.NDArray[np.uint16]

ANGLE_LIMIT = 180.0
EYE_SIDES = ("L", "R")


class FaceChannelRecordDTO(BaseDTO):
    """One frame of the external face tracker stream.

    Attributes:
        tracked: Whether the tracker found a face in this frame.
        pitch: Head pitch in degrees.
        roll: Head roll in degrees.
        yaw: Head yaw in degrees.
        aus: Mouth animation units (AU10, AU26/27, AU20, AU13/15).
        eye_corners: Left outer, left inner, right outer, right inner corners as x, y pairs
            in color-frame pixels.

    Untracked records drop every other field.
    """

    tracked: bool
    pitch: float | None = None
    roll: float | None = None
    yaw: float | None = None
    aus: tuple[float, float, float, float] | None = None
    eye_corners: tuple[float, float, float, float, float, float, float, float] | None = None

    @model_validator(mode="before")
    @classmethod
    def _drop_untracked_fields(cls, data: Any) -> Any:
        if isinstance(data, dict) and not data.get("tracked", False):
            return {"tracked": False}
        return data

    @model_validator(mode="after")
    def _check_tracked_fields(self) -> "FaceChannelRecordDTO":
        if not self.tracked:
            return self
        if None in (self.pitch, self.roll, self.yaw, self.aus, self.eye_corners):
            raise ValueError("tracked face record must carry angles, animation units and eye corners")
        for name in ("pitch", "roll", "yaw"):
            value = getattr(self, name)
            if not math.isfinite(value) or not -ANGLE_LIMIT <= value <= ANGLE_LIMIT:
                raise ValueError(f"{name} must lie in [-180, 180], got {value}")
        if not all(math.isfinite(v) for v in (*self.aus, *self.eye_corners)):  # type: ignore[misc]
            raise ValueError("animation units and eye corners must be finite")
        return self

    def corners(self, side: str) -> tuple[np.ndarray, np.ndarray]:
        """Return (outer, inner) corners of one eye.

        Args:
            side: "L" or "R".

        Returns:
            Tuple of two length-2 arrays in color-frame pixels.
        """
        if self.eye_corners is None:
            raise ValueError("untracked record has no eye corners")
        offset = 0 if side == "L" else 4
        values = np.asarray(self.eye_corners[offset : offset + 4], dtype=np.float64)
        return values[0:2], values[2:4]


class SessionManifestDTO(BaseDTO):
    """Contents of manifest.json."""

    driver_id: str = Field(min_length=1)
    session_id: str = Field(min_length=1)
    frame_count: int = Field(ge=1)
    width: int = Field(gt=0)
    height: int = Field(gt=0)
    frame_rate: float = Field(gt=0)
    focal_length: float = Field(gt=0)
    eye_patch_size: int = Field(gt=0)
    format_version: int = Field(ge=1)
    has_eye_annotations: bool = False


class SessionDTO(BaseDTO):
    """A recorded (or generated) driving session with all streams aligned per frame.

    Attributes:
        driver_id: Opaque driver identifier; LOSO folds group sessions by it.
        session_id: Identifier unique within the driver.
        frame_rate: Nominal frames per second.
        focal_length: Depth camera focal length in pixels.
        background: Driver-absent depth scan, shape (H, W), millimeters.
        depth: Depth frames, shape (T, H, W), millimeters, 0 means no reading.
        eyes: Eye patches, shape (T, 2, P, P), 8-bit, left eye first.
        face: One face tracker record per frame.
        labels: Distraction class code per frame.
        eye_annotations: Optional ground truth, shape (T, 6): left_open, right_open,
            left_x, left_y, right_x, right_y.
    """

    driver_id: str = Field(min_length=1)
    session_id: str = Field(min_length=1)
    frame_rate: float = Field(gt=0)
    focal_length: float = Field(gt=0)
    background: np.ndarray
    depth: np.ndarray
    eyes: np.ndarray
    face: tuple[FaceChannelRecordDTO, ...]
    labels: np.ndarray
    eye_annotations: np.ndarray | None = None

    @field_validator("background", "depth")
    @classmethod
    def _check_depth(cls, value: np.ndarray) -> np.ndarray:
        if not isinstance(value, np.ndarray) or value.dtype != np.uint16:
            raise ValueError("depth rasters must be uint16 arrays")
        if 0 in value.shape:
            raise ValueError("depth rasters must have positive dimensions")
        return value

    @field_validator("eyes")
    @classmethod
    def _check_eyes(cls, value: np.ndarray) -> np.ndarray:
        if not isinstance(value, np.ndarray) or value.dtype != np.uint8:
            raise ValueError("eye patches must be uint8 arrays")
        if value.ndim != 4 or value.shape[1] != len(EYE_SIDES) or value.shape[2] != value.shape[3]:
            raise ValueError(f"eye patches must have shape (T, 2, P, P), got {value.shape}")
        return value

    @field_validator("labels")
    @classmethod
    def _check_labels(cls, value: np.ndarray) -> np.ndarray:
        value = np.asarray(value, dtype=np.int64)
        if value.ndim != 1:
            raise ValueError("labels must be one-dimensional")
        codes = {member.value for member in DistractionClassType}
        if not set(np.unique(value).tolist()) <= codes:
            raise ValueError("labels contain unknown class codes")
        return value

    @model_validator(mode="after")
    def _check_alignment(self) -> "SessionDTO":
        if self.background.ndim != 2 or self.depth.ndim != 3:
            raise ValueError("background must be (H, W) and depth (T, H, W)")
        if self.depth.shape[1:] != self.background.shape:
            raise ValueError("depth frames and background differ in size")
        frame_count = self.depth.shape[0]
        lengths = {
            "eyes": self.eyes.shape[0],
            "face": len(self.face),
            "labels": self.labels.shape[0],
        }
        if self.eye_annotations is not None:
            lengths["eye_annotations"] = self.eye_annotations.shape[0]
        for name, length in lengths.items():
            if length != frame_count:
                raise ValueError(f"{name} has {length} frames, expected {frame_count}")
        return self

    @property
    def frame_count(self) -> int:
        """Number of frames in the session."""
        return int(self.depth.shape[0])

    @property
    def width(self) -> int:
        """Depth raster width in pixels."""
        return int(self.depth.shape[2])

    @property
    def height(self) -> int:
        """Depth raster height in pixels."""
        return int(self.depth.shape[1])

    @property
    def eye_patch_size(self) -> int:
        """Side of the square eye patches."""
        return int(self.eyes.shape[2])

    def eye_pixels(self, frame: int, side: str) -> np.ndarray:
        """Return one eye patch scaled to [0, 1].

        Args:
            frame: Frame index.
            side: "L" or "R".

        Returns:
            np.ndarray: Float patch of shape (P, P).
        """
        return self.eyes[frame, EYE_SIDES.index(side)].astype(np.float64) / 255.0

    def manifest(self, format_version: int) -> SessionManifestDTO:
        """Build the manifest describing this session.

        Args:
            format_version: Session format version to record.

        Returns:
            SessionManifestDTO: The manifest.
        """
        return SessionManifestDTO(
            driver_id=self.driver_id,
            session_id=self.session_id,
            frame_count=self.frame_count,
            width=self.width,
            height=self.height,
            frame_rate=self.frame_rate,
            focal_length=self.focal_length,
            eye_patch_size=self.eye_patch_size,
            format_version=format_version,
            has_eye_annotations=self.eye_annotations is not None,
        )
