from typing import Self

from pydantic import Field

from distractipy.configs.config_template import GeneratorConfig, SessionConfig
from distractipy.models.dtos.base_dtos import BaseDTO
from distractipy.models.types.distraction_types import DistractionClassType


class SegmentSpecDTO(BaseDTO):
    """A run of consecutive frames sharing one distraction class."""

    distraction_class: DistractionClassType
    frame_count: int = Field(ge=0)


class GeneratorSpecDTO(BaseDTO):
    """Parameters of a synthetic session.

    Attributes:
        driver_id: Identifier written to the manifest.
        session_id: Identifier written to the manifest.
        segments: Ordered segment plan.
        shuffle_distractions: Permute distraction segments (per seed) across their slots.
        width: Depth raster width.
        height: Depth raster height.
        frame_rate: Nominal frame rate stored in the manifest.
        focal_length: Focal length stored in the manifest.
        eye_patch_size: Side of the eye patches.
        depth_noise_mm: Standard deviation of additive depth noise.
        invalid_pixel_rate: Fraction of depth pixels dropped to 0.
        pose_jitter_px: Standard deviation of joint position jitter.
        eye_noise: Standard deviation of additive eye patch noise (intensity units).
        face_angle_noise: Standard deviation of head angle noise in degrees.
        face_au_noise: Standard deviation of animation unit noise.
    """

    driver_id: str = "driver00"
    session_id: str = "session00"
    segments: tuple[SegmentSpecDTO, ...]
    shuffle_distractions: bool = True
    width: int = Field(default=80, gt=16)
    height: int = Field(default=60, gt=16)
    frame_rate: float = Field(default=16.7, gt=0)
    focal_length: float = Field(default=571.0, gt=0)
    eye_patch_size: int = Field(default=60, ge=40)
    depth_noise_mm: float = Field(default=8.0, ge=0)
    invalid_pixel_rate: float = Field(default=0.002, ge=0, lt=0.1)
    pose_jitter_px: float = Field(default=1.0, ge=0)
    eye_noise: float = Field(default=0.05, ge=0)
    face_angle_noise: float = Field(default=4.0, ge=0)
    face_au_noise: float = Field(default=0.08, ge=0)

    @property
    def frame_count(self) -> int:
        """Total number of frames the plan describes."""
        return sum(segment.frame_count for segment in self.segments)

    @classmethod
    def from_config(
        cls,
        generator_config: GeneratorConfig,
        session_config: SessionConfig,
        driver_id: str = "driver00",
        session_id: str = "session00",
        frames_per_session: int | None = None,
    ) -> Self:
        """Build a spec from configuration, optionally rescaling the segment plan.

        Args:
            generator_config: Generator section of the configuration.
            session_config: Session section of the configuration.
            driver_id: Driver identifier.
            session_id: Session identifier.
            frames_per_session: When given, segment lengths are scaled so the plan covers
                about this many frames; every nonempty segment keeps at least one frame.

        Returns:
            GeneratorSpecDTO: The spec.
        """
        plan = [(DistractionClassType[name], count) for name, count in generator_config.SEGMENTS]
        if frames_per_session is not None:
            total = sum(count for _, count in plan) or 1
            plan = [
                (distraction, max(1, round(count * frames_per_session / total)) if count else 0)
                for distraction, count in plan
            ]
        return cls(
            driver_id=driver_id,
            session_id=session_id,
            segments=tuple(SegmentSpecDTO(distraction_class=c, frame_count=n) for c, n in plan),
            shuffle_distractions=generator_config.SHUFFLE_DISTRACTIONS,
            width=generator_config.WIDTH,
            height=generator_config.HEIGHT,
            frame_rate=session_config.FRAME_RATE,
            focal_length=session_config.FOCAL_LENGTH,
            eye_patch_size=session_config.EYE_PATCH_SIZE,
            depth_noise_mm=generator_config.DEPTH_NOISE_MM,
            invalid_pixel_rate=generator_config.INVALID_PIXEL_RATE,
            pose_jitter_px=generator_config.POSE_JITTER_PX,
            eye_noise=generator_config.EYE_NOISE,
            face_angle_noise=generator_config.FACE_ANGLE_NOISE,
            face_au_noise=generator_config.FACE_AU_NOISE,
        )
