import logging
import shutil
from pathlib import Path
from typing import override

import numpy as np
import pandas as pd
from pydantic import ValidationError

from distractipy.adapters.session_store.ports import SessionStorePort
from distractipy.configs.base_config import BaseConfig
from distractipy.configs.config_template import SessionConfig
from distractipy.helpers.utils.pgm_utils import PgmUtils
from distractipy.models.dtos.session_dtos import (
    ANGLE_LIMIT,
    EYE_SIDES,
    FaceChannelRecordDTO,
    SessionDTO,
    SessionManifestDTO,
)
from distractipy.models.errors import (
    NotFoundError,
    OutOfRangeError,
    SessionAlignmentError,
    SessionFormatError,
)
from distractipy.models.types.distraction_types import DistractionClassType

logger = logging.getLogger(__name__)

MANIFEST_FILE = "manifest.json"
BACKGROUND_FILE = "background.pgm"
FACE_FILE = "face.csv"
LABELS_FILE = "labels.csv"
EYE_ANNOTATIONS_FILE = "eyes.csv"
DEPTH_DIR = "depth"
EYES_DIR = "eyes"

ANGLE_COLUMNS = ("pitch", "roll", "yaw")
AU_COLUMNS = ("au10", "au26_27", "au20", "au13_15")
CORNER_COLUMNS = (
    "l_outer_x",
    "l_outer_y",
    "l_inner_x",
    "l_inner_y",
    "r_outer_x",
    "r_outer_y",
    "r_inner_x",
    "r_inner_y",
)
FACE_COLUMNS = ("frame_id", "tracked", *ANGLE_COLUMNS, *AU_COLUMNS, *CORNER_COLUMNS)
LABEL_COLUMNS = ("frame_id", "label")
EYE_ANNOTATION_COLUMNS = ("frame_id", "left_open", "right_open", "left_x", "left_y", "right_x", "right_y")


class PgmSessionStoreAdapter(SessionStorePort):
    """Session store over the directory layout of PGM rasters and CSV tables.

    Layout of one session directory::

        manifest.json
        background.pgm            16-bit, millimeters
        depth/000000.pgm ...      16-bit, millimeters, 0 = no reading
        eyes/000000_L.pgm ...     8-bit eye patches, L and R per frame
        face.csv                  face tracker stream
        labels.csv                frame_id, label
        eyes.csv                  optional eye-state and iris annotations
    """

    def __init__(self, session_config: SessionConfig | None = None) -> None:
        """Initialize the store.

        Args:
            session_config: Optional session format config. If None, global config is used.
        """
        self.configs: SessionConfig = session_config or BaseConfig.global_config().SESSION

    @override
    def load_session(self, path: Path) -> SessionDTO:
        if not path.exists():
            raise NotFoundError(resource_type=str(path))
        manifest = self._read_manifest(path)
        frames = manifest.frame_count

        background = PgmUtils.read(path / BACKGROUND_FILE, np.uint16)
        if background.shape != (manifest.height, manifest.width):
            reason = f"shape {background.shape} disagrees with manifest"
            raise SessionFormatError(file_name=BACKGROUND_FILE, reason=reason)

        depth_names = [f"{self._frame_name(frame)}.pgm" for frame in range(frames)]
        self._check_frame_files(path / DEPTH_DIR, DEPTH_DIR, depth_names)
        depth = np.empty((frames, manifest.height, manifest.width), dtype=np.uint16)
        for frame, name in enumerate(depth_names):
            raster = PgmUtils.read(path / DEPTH_DIR / name, np.uint16)
            if raster.shape != background.shape:
                raise SessionFormatError(file_name=f"{DEPTH_DIR}/{name}", reason="frame size differs from background")
            depth[frame] = raster

        size = manifest.eye_patch_size
        eye_names = [f"{self._frame_name(frame)}_{side}.pgm" for frame in range(frames) for side in EYE_SIDES]
        self._check_frame_files(path / EYES_DIR, EYES_DIR, eye_names)
        eyes = np.empty((frames, len(EYE_SIDES), size, size), dtype=np.uint8)
        for index, name in enumerate(eye_names):
            raster = PgmUtils.read(path / EYES_DIR / name, np.uint8)
            if raster.shape != (size, size):
                raise SessionFormatError(file_name=f"{EYES_DIR}/{name}", reason=f"eye patch must be {size}x{size}")
            eyes[divmod(index, len(EYE_SIDES))] = raster

        face = self._read_face(path, frames)
        labels = self._read_labels(path, frames)
        annotations = self._read_eye_annotations(path, frames) if manifest.has_eye_annotations else None

        try:
            session = SessionDTO(
                driver_id=manifest.driver_id,
                session_id=manifest.session_id,
                frame_rate=manifest.frame_rate,
                focal_length=manifest.focal_length,
                background=background,
                depth=depth,
                eyes=eyes,
                face=face,
                labels=labels,
                eye_annotations=annotations,
            )
        except ValidationError as e:
            logger.exception("Session at %s failed validation", path)
            raise SessionFormatError(file_name=MANIFEST_FILE, reason=str(e.errors()[0]["msg"])) from e
        logger.info("Loaded session %s/%s with %d frames", session.driver_id, session.session_id, frames)
        return session

    @override
    def save_session(self, session: SessionDTO, path: Path) -> None:
        path.mkdir(parents=True, exist_ok=True)
        for directory in (DEPTH_DIR, EYES_DIR):
            shutil.rmtree(path / directory, ignore_errors=True)

        manifest = session.manifest(self.configs.FORMAT_VERSION)
        (path / MANIFEST_FILE).write_text(manifest.model_dump_json(indent=2) + "\n", encoding="utf-8")
        PgmUtils.write(path / BACKGROUND_FILE, session.background)
        for frame in range(session.frame_count):
            name = self._frame_name(frame)
            PgmUtils.write(path / DEPTH_DIR / f"{name}.pgm", session.depth[frame])
            for side_index, side in enumerate(EYE_SIDES):
                PgmUtils.write(path / EYES_DIR / f"{name}_{side}.pgm", session.eyes[frame, side_index])

        self._write_csv(path / FACE_FILE, self._face_frame(session))
        self._write_csv(
            path / LABELS_FILE,
            pd.DataFrame({"frame_id": np.arange(session.frame_count), "label": session.labels}),
        )
        annotations_path = path / EYE_ANNOTATIONS_FILE
        if session.eye_annotations is not None:
            table = pd.DataFrame(session.eye_annotations, columns=list(EYE_ANNOTATION_COLUMNS[1:]))
            table.insert(0, "frame_id", np.arange(session.frame_count))
            for column in ("left_open", "right_open"):
                table[column] = table[column].astype(np.int64)
            self._write_csv(annotations_path, table)
        else:
            annotations_path.unlink(missing_ok=True)
        logger.info("Saved session %s/%s to %s", session.driver_id, session.session_id, path)

    @override
    def list_sessions(self, root: Path) -> list[Path]:
        if not root.exists():
            raise NotFoundError(resource_type=str(root))
        if (root / MANIFEST_FILE).is_file():
            return [root]
        return sorted(manifest.parent for manifest in root.rglob(MANIFEST_FILE))

    def _frame_name(self, frame: int) -> str:
        return f"{frame:0{self.configs.FRAME_ID_WIDTH}d}"

    def _read_manifest(self, path: Path) -> SessionManifestDTO:
        manifest_path = path / MANIFEST_FILE
        if not manifest_path.is_file():
            raise SessionFormatError(file_name=MANIFEST_FILE, reason="manifest missing")
        try:
            manifest = SessionManifestDTO.model_validate_json(manifest_path.read_bytes())
        except ValidationError as e:
            raise SessionFormatError(file_name=MANIFEST_FILE, reason=str(e.errors()[0]["msg"])) from e
        if manifest.format_version != self.configs.FORMAT_VERSION:
            raise SessionFormatError(
                file_name=MANIFEST_FILE,
                reason=f"unsupported format version {manifest.format_version}",
            )
        return manifest

    @staticmethod
    def _check_frame_files(directory: Path, display: str, expected: list[str]) -> None:
        if not directory.is_dir():
            raise SessionFormatError(file_name=display, reason="directory missing")
        present = sorted(item.name for item in directory.glob("*.pgm"))
        if len(present) != len(expected):
            raise SessionAlignmentError(file_name=display, expected=len(expected), actual=len(present))
        missing = sorted(set(expected) - set(present))
        if missing:
            raise SessionFormatError(file_name=f"{display}/{missing[0]}", reason="file missing")

    @staticmethod
    def _read_csv(path: Path, columns: tuple[str, ...], frames: int) -> pd.DataFrame:
        if not path.is_file():
            raise SessionFormatError(file_name=path.name, reason="file missing")
        try:
            table = pd.read_csv(path, float_precision="round_trip", lineterminator="\n")
        except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as e:
            logger.exception("Cannot parse %s", path)
            raise SessionFormatError(file_name=path.name, reason="unparsable CSV") from e
        if tuple(table.columns) != columns:
            raise SessionFormatError(file_name=path.name, reason=f"expected columns {','.join(columns)}")
        if len(table) != frames:
            raise SessionAlignmentError(file_name=path.name, expected=frames, actual=len(table))
        if not np.array_equal(table["frame_id"].to_numpy(), np.arange(frames)):
            raise SessionFormatError(file_name=path.name, reason="frame ids must run from 0 without gaps")
        return table

    def _read_face(self, path: Path, frames: int) -> tuple[FaceChannelRecordDTO, ...]:
        table = self._read_csv(path / FACE_FILE, FACE_COLUMNS, frames)
        tracked = table["tracked"].to_numpy()
        if not np.isin(tracked, (0, 1)).all():
            raise SessionFormatError(file_name=FACE_FILE, reason="tracked must be 0 or 1")
        angles = table[list(ANGLE_COLUMNS)].to_numpy(dtype=np.float64)
        for column_index, column in enumerate(ANGLE_COLUMNS):
            outside = (tracked == 1) & ~(np.abs(angles[:, column_index]) <= ANGLE_LIMIT)
            if np.any(outside):
                frame = int(np.flatnonzero(outside)[0])
                raise OutOfRangeError(
                    field_name=column,
                    additional_data={"file": FACE_FILE, "frame": frame, "value": angles[frame, column_index]},
                )

        aus = table[list(AU_COLUMNS)].to_numpy(dtype=np.float64)
        corners = table[list(CORNER_COLUMNS)].to_numpy(dtype=np.float64)
        records = []
        for frame in range(frames):
            if not tracked[frame]:
                records.append(FaceChannelRecordDTO(tracked=False))
                continue
            try:
                records.append(
                    FaceChannelRecordDTO(
                        tracked=True,
                        pitch=angles[frame, 0],
                        roll=angles[frame, 1],
                        yaw=angles[frame, 2],
                        aus=tuple(aus[frame]),
                        eye_corners=tuple(corners[frame]),
                    ),
                )
            except ValidationError as e:
                raise SessionFormatError(file_name=FACE_FILE, reason=f"frame {frame}: incomplete tracked record") from e
        return tuple(records)

    def _read_labels(self, path: Path, frames: int) -> np.ndarray:
        table = self._read_csv(path / LABELS_FILE, LABEL_COLUMNS, frames)
        labels = table["label"].to_numpy()
        codes = [member.value for member in DistractionClassType]
        unknown = ~np.isin(labels, codes)
        if unknown.any():
            frame = int(np.flatnonzero(unknown)[0])
            raise OutOfRangeError(
                field_name="label",
                additional_data={"file": LABELS_FILE, "frame": frame, "value": labels[frame]},
            )
        return labels.astype(np.int64)

    def _read_eye_annotations(self, path: Path, frames: int) -> np.ndarray:
        table = self._read_csv(path / EYE_ANNOTATIONS_FILE, EYE_ANNOTATION_COLUMNS, frames)
        values = table[list(EYE_ANNOTATION_COLUMNS[1:])].to_numpy(dtype=np.float64)
        if not np.isin(values[:, :2], (0.0, 1.0)).all() or not np.isfinite(values).all():
            raise SessionFormatError(file_name=EYE_ANNOTATIONS_FILE, reason="open flags must be 0 or 1")
        return values

    @staticmethod
    def _face_frame(session: SessionDTO) -> pd.DataFrame:
        rows = []
        for frame, record in enumerate(session.face):
            if record.tracked:
                pose = (record.pitch, record.roll, record.yaw)
                rows.append((frame, 1, *pose, *record.aus, *record.eye_corners))  # type: ignore[misc]
            else:
                rows.append((frame, 0, *([np.nan] * (len(FACE_COLUMNS) - 2))))
        table = pd.DataFrame(rows, columns=list(FACE_COLUMNS))
        return table.astype({"frame_id": np.int64, "tracked": np.int64})

    @staticmethod
    def _write_csv(path: Path, table: pd.DataFrame) -> None:
        table.to_csv(path, index=False, lineterminator="\n", na_rep="")
