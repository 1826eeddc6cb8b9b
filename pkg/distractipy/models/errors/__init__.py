from distractipy.models.errors.custom_errors import (
    BaseError,
    DimensionMismatchError,
    EmptyInputError,
    InsufficientDataError,
    InternalError,
    InvalidArgumentError,
    ModelFormatError,
    NotFoundError,
    OutOfRangeError,
    SessionAlignmentError,
    SessionFormatError,
    SingleClassError,
    TrainingError,
)

__all__ = [
    "BaseError",
    "DimensionMismatchError",
    "EmptyInputError",
    "InsufficientDataError",
    "InternalError",
    "InvalidArgumentError",
    "ModelFormatError",
    "NotFoundError",
    "OutOfRangeError",
    "SessionAlignmentError",
    "SessionFormatError",
    "SingleClassError",
    "TrainingError",
]
