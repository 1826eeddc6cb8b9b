from enum import Enum

from distractipy.models.dtos.error_dto import ErrorDetailDTO

USAGE_EXIT_CODE = 2
DATA_EXIT_CODE = 3
TRAINING_EXIT_CODE = 4
INTERNAL_EXIT_CODE = 1


class ErrorMessageType(Enum):
    """Enumeration of error types with associated error details.

    Every member carries a stable code, an English message and the process exit status:
    2 for usage errors, 3 for data or validation errors, 4 for training failures.

    Attributes:
        INVALID_ARGUMENT: An argument or override is invalid.
        NOT_FOUND: A requested path does not exist.
        SESSION_FORMAT: A session file is missing or malformed.
        SESSION_ALIGNMENT: Session streams have different lengths or broken frame ids.
        OUT_OF_RANGE: A value lies outside its allowed range.
        DIMENSION_MISMATCH: Arrays that must agree in shape do not.
        EMPTY_INPUT: An operation received no data.
        MODEL_FORMAT: A model file is unreadable or of the wrong kind.
        INSUFFICIENT_DATA: Too little data to train.
        SINGLE_CLASS: Training data holds only one class.
        TRAINING_FAILED: A trainer could not produce a model.
        INTERNAL_ERROR: Unexpected failure.
    """

    INVALID_ARGUMENT = ErrorDetailDTO.create_error_detail(
        code="INVALID_ARGUMENT",
        message="Invalid argument provided",
        exit_code=USAGE_EXIT_CODE,
    )

    NOT_FOUND = ErrorDetailDTO.create_error_detail(
        code="NOT_FOUND",
        message="Requested path not found",
        exit_code=DATA_EXIT_CODE,
    )

    SESSION_FORMAT = ErrorDetailDTO.create_error_detail(
        code="SESSION_FORMAT",
        message="Session file missing or malformed",
        exit_code=DATA_EXIT_CODE,
    )

    SESSION_ALIGNMENT = ErrorDetailDTO.create_error_detail(
        code="SESSION_ALIGNMENT",
        message="Session streams are not aligned",
        exit_code=DATA_EXIT_CODE,
    )

    OUT_OF_RANGE = ErrorDetailDTO.create_error_detail(
        code="OUT_OF_RANGE",
        message="Value is out of acceptable range",
        exit_code=DATA_EXIT_CODE,
    )

    DIMENSION_MISMATCH = ErrorDetailDTO.create_error_detail(
        code="DIMENSION_MISMATCH",
        message="Input dimensions do not match",
        exit_code=DATA_EXIT_CODE,
    )

    EMPTY_INPUT = ErrorDetailDTO.create_error_detail(
        code="EMPTY_INPUT",
        message="Input is empty",
        exit_code=DATA_EXIT_CODE,
    )

    MODEL_FORMAT = ErrorDetailDTO.create_error_detail(
        code="MODEL_FORMAT",
        message="Model file is invalid",
        exit_code=DATA_EXIT_CODE,
    )

    INSUFFICIENT_DATA = ErrorDetailDTO.create_error_detail(
        code="INSUFFICIENT_DATA",
        message="Not enough data to train",
        exit_code=TRAINING_EXIT_CODE,
    )

    SINGLE_CLASS = ErrorDetailDTO.create_error_detail(
        code="SINGLE_CLASS",
        message="Training data contains a single class",
        exit_code=TRAINING_EXIT_CODE,
    )

    TRAINING_FAILED = ErrorDetailDTO.create_error_detail(
        code="TRAINING_FAILED",
        message="Training failed",
        exit_code=TRAINING_EXIT_CODE,
    )

    INTERNAL_ERROR = ErrorDetailDTO.create_error_detail(
        code="INTERNAL_ERROR",
        message="Internal error",
        exit_code=INTERNAL_EXIT_CODE,
    )
