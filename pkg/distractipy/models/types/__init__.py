from distractipy.models.types.distraction_types import (
    ArmPoseType,
    BinaryClassType,
    ClassifierPathType,
    DistractionClassType,
    FeatureGroupType,
)
from distractipy.models.types.error_message_types import ErrorMessageType

__all__ = [
    "ArmPoseType",
    "BinaryClassType",
    "ClassifierPathType",
    "DistractionClassType",
    "ErrorMessageType",
    "FeatureGroupType",
]
