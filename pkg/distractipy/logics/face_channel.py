from collections.abc import Iterable

import numpy as np

from distractipy.models.dtos.face_dtos import FaceFeaturesDTO
from distractipy.models.dtos.session_dtos import FaceChannelRecordDTO


def face_features(record: FaceChannelRecordDTO, previous: FaceFeaturesDTO | None = None) -> FaceFeaturesDTO:
    """Gate one face tracker record.

    Tracked records pass through. Untracked records repeat the previous values flagged
    invalid, or zeros at the start of the stream.

    Args:
        record: The tracker output for this frame.
        previous: Output for the preceding frame, if any.

    Returns:
        FaceFeaturesDTO: Head angles and the four mouth animation units.
    """
    if not record.tracked:
        if previous is None:
            return FaceFeaturesDTO()
        return previous.model_copy(update={"valid": False})
    au10, au26_27, au20, au13_15 = record.aus  # type: ignore[misc]
    return FaceFeaturesDTO(
        pitch=record.pitch,
        roll=record.roll,
        yaw=record.yaw,
        au10=au10,
        au26_27=au26_27,
        au20=au20,
        au13_15=au13_15,
        valid=True,
    )


def face_stream(records: Iterable[FaceChannelRecordDTO]) -> tuple[np.ndarray, np.ndarray]:
    """Gate a whole session's face records.

    Args:
        records: Records in frame order.

    Returns:
        Tuple of (T, 7) values and (T,) validity flags.
    """
    rows: list[np.ndarray] = []
    flags: list[bool] = []
    previous: FaceFeaturesDTO | None = None
    for record in records:
        previous = face_features(record, previous)
        rows.append(previous.as_array())
        flags.append(previous.valid)
    return np.asarray(rows, dtype=np.float64).reshape(len(rows), 7), np.asarray(flags, dtype=bool)
