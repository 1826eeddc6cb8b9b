"""Synthetic driving sessions for desk-scale training and evaluation.

A session renders a seated driver in front of a seat and a wall as seen by a depth
camera mounted at the dashboard, together with eye patches and a face tracker stream
whose statistics depend on the current distraction class. All randomness comes from
the session seed, except per-driver traits which derive from the driver id so every
session of one driver shares the same body, eyes and habits.
"""

import logging
from dataclasses import dataclass

import numpy as np

from distractipy.models.dtos.generator_dtos import GeneratorSpecDTO, SegmentSpecDTO
from distractipy.models.dtos.session_dtos import FaceChannelRecordDTO, SessionDTO
from distractipy.models.errors import EmptyInputError
from distractipy.models.types.distraction_types import ArmPoseType, DistractionClassType

logger = logging.getLogger(__name__)

REFERENCE_WIDTH = 80.0
REFERENCE_HEIGHT = 60.0
WALL_MM = 2600.0
SEAT_MM = 1700.0
HEADREST_MM = 1750.0
ARM_RADIUS = 3.0
MAX_DEPTH = np.iinfo(np.uint16).max

SHOULDER = (53.0, 26.0, 1400.0)
# (elbow, hand) as (x, y, depth) in reference pixels and millimeters
ARM_JOINTS = {
    ArmPoseType.FORWARD: ((58.0, 38.0, 1300.0), (50.0, 46.0, 1150.0)),
    ArmPoseType.UP: ((62.0, 34.0, 1350.0), (48.0, 16.0, 1300.0)),
    ArmPoseType.DOWN: ((58.0, 44.0, 1350.0), (50.0, 56.0, 1250.0)),
    ArmPoseType.RIGHT: ((66.0, 34.0, 1380.0), (76.0, 36.0, 1300.0)),
}
LEFT_ARM = ((27.0, 26.0, 1400.0), (22.0, 40.0, 1300.0), (30.0, 46.0, 1150.0))

SCLERA = 0.78
IRIS = 0.22
CLOSED_TOP = 0.35
CLOSED_BOTTOM = 0.7
IRIS_OFFSETS = {
    DistractionClassType.NORMAL_DRIVING: (0.0, 0.0),
    DistractionClassType.PHONE_CALL: (-4.0, 0.0),
    DistractionClassType.DRINKING: (0.0, -5.0),
    DistractionClassType.TEXT_MESSAGE: (0.0, 8.0),
    DistractionClassType.OBJECT_DISTRACTION: (8.0, 3.0),
}
CLOSED_PROBABILITY = {
    DistractionClassType.NORMAL_DRIVING: 0.03,
    DistractionClassType.PHONE_CALL: 0.03,
    DistractionClassType.DRINKING: 0.1,
    DistractionClassType.TEXT_MESSAGE: 0.15,
    DistractionClassType.OBJECT_DISTRACTION: 0.03,
}

# pitch, roll, yaw, au10, au26_27, au20, au13_15
FACE_MEANS = {
    DistractionClassType.NORMAL_DRIVING: (0.0, 0.0, 0.0, 0.0, 0.05, 0.0, 0.0),
    DistractionClassType.PHONE_CALL: (5.0, 15.0, -10.0, 0.1, 0.3, 0.2, 0.0),
    DistractionClassType.DRINKING: (-20.0, 0.0, 0.0, 0.3, 0.6, 0.0, 0.3),
    DistractionClassType.TEXT_MESSAGE: (30.0, 0.0, 5.0, 0.0, 0.05, 0.0, 0.1),
    DistractionClassType.OBJECT_DISTRACTION: (10.0, 0.0, 35.0, 0.0, 0.05, 0.0, 0.0),
}
TRACKED_PROBABILITY = {
    DistractionClassType.NORMAL_DRIVING: 0.97,
    DistractionClassType.PHONE_CALL: 0.9,
    DistractionClassType.DRINKING: 0.6,
    DistractionClassType.TEXT_MESSAGE: 0.85,
    DistractionClassType.OBJECT_DISTRACTION: 0.9,
}
# left outer, left inner, right outer, right inner
EYE_CORNERS = np.array([200.0, 240.0, 240.0, 240.0, 320.0, 240.0, 280.0, 240.0])


@dataclass(frozen=True)
class DriverTraits:
    """Per-driver constants shared by all sessions of one driver."""

    offset: np.ndarray
    depth_offset: float
    body_scale: float
    iris_radius: float
    sclera: float
    eye_offset: np.ndarray
    face_offset: np.ndarray
    arm_offsets: dict[ArmPoseType, np.ndarray]

    @classmethod
    def from_driver_id(cls, driver_id: str) -> "DriverTraits":
        rng = np.random.default_rng(list(driver_id.encode("utf-8")))
        return cls(
            offset=rng.uniform(-2.0, 2.0, size=2),
            depth_offset=float(rng.normal(0.0, 40.0)),
            body_scale=float(rng.uniform(0.95, 1.05)),
            iris_radius=float(rng.uniform(6.0, 9.0)),
            sclera=float(SCLERA + rng.uniform(-0.04, 0.04)),
            eye_offset=rng.uniform(-1.5, 1.5, size=2),
            face_offset=np.concatenate([rng.normal(0.0, 3.0, size=3), rng.normal(0.0, 0.02, size=4)]),
            arm_offsets={pose: rng.normal(0.0, 1.0, size=(2, 3)) * (1.0, 1.0, 15.0) for pose in ArmPoseType},
        )


class SessionGenerator:
    """Renders synthetic sessions from a GeneratorSpecDTO."""

    def __init__(self, spec: GeneratorSpecDTO) -> None:
        """Initialize the generator.

        Args:
            spec: Session parameters.

        Raises:
            EmptyInputError: If the segment plan covers no frames.
        """
        if spec.frame_count == 0:
            raise EmptyInputError("segments")
        self.spec = spec
        self.scale = np.array([spec.width / REFERENCE_WIDTH, spec.height / REFERENCE_HEIGHT])
        ys, xs = np.mgrid[0 : spec.height, 0 : spec.width]
        self.xs = xs.astype(np.float64) + 0.5
        self.ys = ys.astype(np.float64) + 0.5
        patch = spec.eye_patch_size
        eye_ys, eye_xs = np.mgrid[0:patch, 0:patch]
        self.eye_xs = eye_xs.astype(np.float64)
        self.eye_ys = eye_ys.astype(np.float64)

    def generate(self, seed: int) -> SessionDTO:
        """Render a full session.

        Args:
            seed: Seed for every per-session random draw.

        Returns:
            SessionDTO: The session, with eye annotations.
        """
        rng = np.random.default_rng(seed)
        traits = DriverTraits.from_driver_id(self.spec.driver_id)
        labels = self._labels(rng)

        background = self._background()
        background_noisy = background + rng.normal(0.0, self.spec.depth_noise_mm / 4.0, size=background.shape)
        body = self._body(traits)

        frames = labels.shape[0]
        depth = np.empty((frames, self.spec.height, self.spec.width), dtype=np.uint16)
        eyes = np.empty((frames, 2, self.spec.eye_patch_size, self.spec.eye_patch_size), dtype=np.uint8)
        annotations = np.empty((frames, 6), dtype=np.float64)
        face: list[FaceChannelRecordDTO] = []
        segment_arm = self._segment_arm_offsets(labels, rng)
        for frame in range(frames):
            distraction = DistractionClassType(int(labels[frame]))
            depth[frame] = self._depth_frame(background, body, distraction, traits, segment_arm[frame], rng)
            eyes[frame], annotations[frame] = self._eye_pair(distraction, traits, rng)
            face.append(self._face_record(distraction, traits, rng))

        logger.info(
            "Generated session %s/%s: %d frames, seed %d",
            self.spec.driver_id,
            self.spec.session_id,
            frames,
            seed,
        )
        return SessionDTO(
            driver_id=self.spec.driver_id,
            session_id=self.spec.session_id,
            frame_rate=self.spec.frame_rate,
            focal_length=self.spec.focal_length,
            background=self._quantize(background_noisy),
            depth=depth,
            eyes=eyes,
            face=tuple(face),
            labels=labels,
            eye_annotations=annotations,
        )

    def _labels(self, rng: np.random.Generator) -> np.ndarray:
        segments = list(self.spec.segments)
        if self.spec.shuffle_distractions:
            slots = [
                index
                for index, segment in enumerate(segments)
                if segment.distraction_class != DistractionClassType.NORMAL_DRIVING
            ]
            order = rng.permutation(len(slots))
            shuffled: list[SegmentSpecDTO] = list(segments)
            for slot, source in zip(slots, order, strict=True):
                shuffled[slot] = segments[slots[source]]
            segments = shuffled
        return np.concatenate(
            [np.full(segment.frame_count, segment.distraction_class.value, dtype=np.int64) for segment in segments],
        )

    @staticmethod
    def _segment_arm_offsets(labels: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        """Per-frame (elbow, hand) offsets that stay fixed within a segment."""
        starts = np.flatnonzero(np.concatenate([[True], labels[1:] != labels[:-1]]))
        per_segment = rng.normal(0.0, 1.5, size=(starts.shape[0], 2, 3)) * (1.0, 1.0, 20.0)
        segment_of_frame = np.searchsorted(starts, np.arange(labels.shape[0]), side="right") - 1
        return per_segment[segment_of_frame]

    def _point(self, x: float, y: float) -> tuple[float, float]:
        return x * self.scale[0], y * self.scale[1]

    def _box(self, x0: float, x1: float, y0: float, y1: float) -> np.ndarray:
        left, top = self._point(x0, y0)
        right, bottom = self._point(x1, y1)
        return (self.xs >= left) & (self.xs <= right) & (self.ys >= top) & (self.ys < bottom)

    def _background(self) -> np.ndarray:
        scene = np.full((self.spec.height, self.spec.width), WALL_MM)
        scene[self._box(18.0, 62.0, 5.0, 60.0)] = SEAT_MM
        scene[self._box(30.0, 50.0, 0.0, 14.0)] = HEADREST_MM
        return scene

    def _ellipse(self, center: np.ndarray, axes: np.ndarray, depth: float, bulge: float) -> np.ndarray:
        cx, cy = self._point(*center)
        ax, ay = axes * self.scale
        radius = ((self.xs - cx) / ax) ** 2 + ((self.ys - cy) / ay) ** 2
        return np.where(radius <= 1.0, depth + bulge * radius, np.inf)

    def _capsule(self, start: np.ndarray, end: np.ndarray, radius: float) -> np.ndarray:
        sx, sy = self._point(start[0], start[1])
        ex, ey = self._point(end[0], end[1])
        dx, dy = ex - sx, ey - sy
        length_sq = max(dx * dx + dy * dy, 1e-12)
        t = np.clip(((self.xs - sx) * dx + (self.ys - sy) * dy) / length_sq, 0.0, 1.0)
        distance = np.hypot(self.xs - (sx + t * dx), self.ys - (sy + t * dy))
        scaled_radius = radius * float(self.scale.mean())
        depth = start[2] + t * (end[2] - start[2])
        inside = distance <= scaled_radius
        rounding = 10.0 * np.sqrt(np.clip(1.0 - (distance / scaled_radius) ** 2, 0.0, 1.0))
        return np.where(inside, depth - rounding, np.inf)

    def _body(self, traits: DriverTraits) -> np.ndarray:
        """Static part of the driver: torso, neck, head and the left arm on the wheel."""
        shift = traits.offset
        z = traits.depth_offset
        scale = traits.body_scale
        layers = [
            self._ellipse(np.array([40.0, 40.0]) + shift, np.array([14.0, 20.0]) * scale, 1400.0 + z, 40.0),
            self._ellipse(np.array([40.0, 14.0]) + shift, np.array([8.0, 8.0]) * scale, 1350.0 + z, 30.0),
            np.where(self._box(36.0 + shift[0], 44.0 + shift[0], 20.0 + shift[1], 26.0 + shift[1]), 1380.0 + z, np.inf),
        ]
        joints = [np.array(joint) + (shift[0], shift[1], z) for joint in LEFT_ARM]
        layers.extend(self._capsule(a, b, ARM_RADIUS) for a, b in zip(joints[:-1], joints[1:], strict=True))
        return np.minimum.reduce(layers)

    def _right_arm(
        self,
        pose: ArmPoseType,
        traits: DriverTraits,
        segment_offset: np.ndarray,
        rng: np.random.Generator,
    ) -> np.ndarray:
        shift = np.array([traits.offset[0], traits.offset[1], traits.depth_offset])
        elbow, hand = (np.array(joint) for joint in ARM_JOINTS[pose])
        jitter = rng.normal(0.0, self.spec.pose_jitter_px, size=(2, 3)) * (1.0, 1.0, 10.0)
        offsets = traits.arm_offsets[pose] + segment_offset + jitter
        shoulder = np.array(SHOULDER) + shift
        elbow = elbow + shift + offsets[0]
        hand = hand + shift + offsets[1]
        return np.minimum(self._capsule(shoulder, elbow, ARM_RADIUS), self._capsule(elbow, hand, ARM_RADIUS))

    def _depth_frame(
        self,
        background: np.ndarray,
        body: np.ndarray,
        distraction: DistractionClassType,
        traits: DriverTraits,
        segment_offset: np.ndarray,
        rng: np.random.Generator,
    ) -> np.ndarray:
        driver = np.minimum(body, self._right_arm(distraction.arm_pose, traits, segment_offset, rng))
        scene = np.where(np.isfinite(driver), driver, background)
        scene = scene + rng.normal(0.0, self.spec.depth_noise_mm, size=scene.shape)
        quantized = self._quantize(scene)
        quantized[rng.random(scene.shape) < self.spec.invalid_pixel_rate] = 0
        return quantized

    @staticmethod
    def _quantize(depth: np.ndarray) -> np.ndarray:
        return np.clip(np.rint(depth), 0, MAX_DEPTH).astype(np.uint16)

    def _eye_pair(
        self,
        distraction: DistractionClassType,
        traits: DriverTraits,
        rng: np.random.Generator,
    ) -> tuple[np.ndarray, np.ndarray]:
        closed = bool(rng.random() < CLOSED_PROBABILITY[distraction])
        middle = (self.spec.eye_patch_size - 1) / 2.0
        gaze = np.array(IRIS_OFFSETS[distraction]) + traits.eye_offset + rng.normal(0.0, 1.0, size=2)
        patches = np.empty((2, self.spec.eye_patch_size, self.spec.eye_patch_size), dtype=np.uint8)
        annotation = np.empty(6, dtype=np.float64)
        annotation[0:2] = 0.0 if closed else 1.0
        for side in range(2):
            center = middle + gaze + rng.normal(0.0, 0.3, size=2)
            if closed:
                edge = middle + gaze[1] * 0.3
                weight = np.clip(self.eye_ys - edge + 0.5, 0.0, 1.0)
                image = CLOSED_TOP + (CLOSED_BOTTOM - CLOSED_TOP) * weight
            else:
                distance = np.hypot(self.eye_xs - center[0], self.eye_ys - center[1])
                coverage = np.clip(traits.iris_radius + 0.5 - distance, 0.0, 1.0)
                image = traits.sclera - (traits.sclera - IRIS) * coverage
            image = image + rng.normal(0.0, self.spec.eye_noise, size=image.shape)
            patches[side] = np.rint(np.clip(image, 0.0, 1.0) * 255.0).astype(np.uint8)
            annotation[2 + 2 * side : 4 + 2 * side] = center
        return patches, annotation

    def _face_record(
        self,
        distraction: DistractionClassType,
        traits: DriverTraits,
        rng: np.random.Generator,
    ) -> FaceChannelRecordDTO:
        tracked = bool(rng.random() < TRACKED_PROBABILITY[distraction])
        noise = np.concatenate(
            [
                rng.normal(0.0, self.spec.face_angle_noise, size=3),
                rng.normal(0.0, self.spec.face_au_noise, size=4),
            ],
        )
        values = np.array(FACE_MEANS[distraction]) + traits.face_offset + noise
        values[:3] = np.clip(values[:3], -180.0, 180.0)
        head_shift = np.tile(rng.normal(0.0, 3.0, size=2), 4)
        corners = EYE_CORNERS + head_shift + rng.normal(0.0, 1.0, size=8)
        if not tracked:
            return FaceChannelRecordDTO(tracked=False)
        return FaceChannelRecordDTO(
            tracked=True,
            pitch=float(values[0]),
            roll=float(values[1]),
            yaw=float(values[2]),
            aus=tuple(float(v) for v in values[3:7]),
            eye_corners=tuple(float(v) for v in corners),
        )


def generate_synthetic_session(spec: GeneratorSpecDTO, seed: int) -> SessionDTO:
    """Render a synthetic session.

    Args:
        spec: Session parameters and segment plan.
        seed: Seed of every per-session random draw.

    Returns:
        SessionDTO: The session; identical (spec, seed) pairs give identical sessions.

    Raises:
        EmptyInputError: If the plan covers no frames.
    """
    return SessionGenerator(spec).generate(seed)
