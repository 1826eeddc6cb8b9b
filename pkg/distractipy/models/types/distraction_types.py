from enum import Enum, IntEnum, StrEnum


class DistractionClassType(IntEnum):
    """Driver state for one frame; the integer value is the code stored in labels.csv."""

    PHONE_CALL = 0
    DRINKING = 1
    TEXT_MESSAGE = 2
    OBJECT_DISTRACTION = 3
    NORMAL_DRIVING = 4

    @property
    def arm_pose(self) -> "ArmPoseType":
        """Arm position a driver holds while in this state.

        Returns:
            ArmPoseType: The pose used to label arm classifier training data.
        """
        return _ARM_POSE_BY_CLASS[self]

    @property
    def binary(self) -> "BinaryClassType":
        """Collapse to distracted versus normal driving.

        Returns:
            BinaryClassType: NORMAL for normal driving, DISTRACTED otherwise.
        """
        return BinaryClassType.NORMAL if self == DistractionClassType.NORMAL_DRIVING else BinaryClassType.DISTRACTED


class ArmPoseType(IntEnum):
    """Right-arm position scored by the arm position module."""

    UP = 0
    DOWN = 1
    RIGHT = 2
    FORWARD = 3


class BinaryClassType(IntEnum):
    """Two-class view of the distraction labels."""

    DISTRACTED = 0
    NORMAL = 1


class ClassifierPathType(StrEnum):
    """Fusion classifier paths."""

    ADABOOST = "ADABOOST"
    HMM = "HMM"
    BOTH = "BOTH"

    def includes(self, path: "ClassifierPathType") -> bool:
        """Check whether this selection runs the given path.

        Args:
            path: A single path (ADABOOST or HMM).

        Returns:
            bool: True if the path is selected.
        """
        return self in (path, ClassifierPathType.BOTH)


class FeatureGroupType(Enum):
    """Groups of the 17 per-frame features, used to restrict the fusion input.

    Each value is the tuple of column indices the group owns in the frame vector.
    """

    ARM = (0, 1, 2, 3)
    EYES = (4, 5, 6, 7, 8, 9)
    ORIENTATION = (10, 11, 12)
    EXPRESSION = (13, 14, 15, 16)


_ARM_POSE_BY_CLASS = {
    DistractionClassType.PHONE_CALL: ArmPoseType.UP,
    DistractionClassType.DRINKING: ArmPoseType.UP,
    DistractionClassType.TEXT_MESSAGE: ArmPoseType.DOWN,
    DistractionClassType.OBJECT_DISTRACTION: ArmPoseType.RIGHT,
    DistractionClassType.NORMAL_DRIVING: ArmPoseType.FORWARD,
}
