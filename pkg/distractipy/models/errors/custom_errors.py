from distractipy.models.dtos.error_dto import ErrorDetailDTO
from distractipy.models.types.error_message_types import ErrorMessageType


class BaseError(Exception):
    """Base exception class for all pipeline errors.

    Carries a standard error detail (code, message, exit status) plus free-form context
    that ends up in the machine-readable error line printed by the CLI.
    """

    def __init__(
        self,
        error: ErrorDetailDTO | ErrorMessageType | None = None,
        additional_data: dict | None = None,
        *args: object,
    ) -> None:
        """Initializes the base exception.

        Args:
            error: The error detail or message. Can be:
                - ErrorDetailDTO: Direct error detail object
                - ErrorMessageType: Enum member containing error detail
                - None: Will use INTERNAL_ERROR
            additional_data: Additional context data for the error.
            *args: Additional arguments for the base Exception class.
        """
        if isinstance(error, ErrorMessageType):
            self.error_detail = error.value
        elif isinstance(error, ErrorDetailDTO):
            self.error_detail = error
        else:
            self.error_detail = ErrorMessageType.INTERNAL_ERROR.value

        self.additional_data = additional_data or {}

        super().__init__(self.get_message(), *args)

    def get_message(self) -> str:
        """Gets the error message, suffixed with the context when present.

        Returns:
            str: The error message.
        """
        if not self.additional_data:
            return self.error_detail.message
        context = ", ".join(f"{key}={value}" for key, value in sorted(self.additional_data.items()))
        return f"{self.error_detail.message} ({context})"

    def to_dict(self) -> dict:
        """Converts the exception to a dictionary.

        Returns:
            dict: A dictionary containing error details and additional data.
        """
        response = {
            "error": self.error_detail.code,
            "detail": self.error_detail.model_dump(mode="json", exclude_none=True),
        }

        detail = response["detail"]
        if isinstance(detail, dict) and self.additional_data:
            detail.update({key: str(value) for key, value in self.additional_data.items()})

        return response

    def __str__(self) -> str:
        """String representation of the exception.

        Returns:
            str: A formatted string containing the error code and message.
        """
        return f"[{self.error_detail.code}] {self.get_message()}"

    def __repr__(self) -> str:
        """Detailed string representation of the exception.

        Returns:
            str: A detailed string representation including all error details.
        """
        return (
            f"{self.__class__.__name__}("
            f"code='{self.error_detail.code}', "
            f"message='{self.error_detail.message}', "
            f"exit_code={self.exit_code}, "
            f"additional_data={self.additional_data}"
            f")"
        )

    @property
    def code(self) -> str:
        """Gets the error code.

        Returns:
            str: The error code.
        """
        return self.error_detail.code

    @property
    def message(self) -> str:
        """Gets the error message.

        Returns:
            str: The error message.
        """
        return self.get_message()

    @property
    def exit_code(self) -> int:
        """Gets the process exit status for this error.

        Returns:
            int: The exit status.
        """
        return self.error_detail.exit_code


class InvalidArgumentError(BaseError):
    """Exception raised for invalid arguments or overrides."""

    def __init__(
        self,
        argument_name: str | None = None,
        error: ErrorDetailDTO = ErrorMessageType.INVALID_ARGUMENT.value,
        additional_data: dict | None = None,
    ) -> None:
        """Initializes the exception.

        Args:
            argument_name: Name of the invalid argument.
            error: The error detail or message.
            additional_data: Additional context data for the error.
        """
        data = {"argument": argument_name} if argument_name else {}
        data.update(additional_data or {})
        super().__init__(error, data)


class NotFoundError(BaseError):
    """Exception raised when a path does not exist."""

    def __init__(
        self,
        resource_type: str | None = None,
        error: ErrorDetailDTO = ErrorMessageType.NOT_FOUND.value,
    ) -> None:
        """Initializes the exception.

        Args:
            resource_type: The missing path or resource.
            error: The error detail or message.
        """
        super().__init__(error, {"resource": resource_type} if resource_type else None)


class SessionFormatError(BaseError):
    """Exception raised when a session file is missing or malformed."""

    def __init__(
        self,
        file_name: str,
        reason: str | None = None,
        error: ErrorDetailDTO = ErrorMessageType.SESSION_FORMAT.value,
    ) -> None:
        """Initializes the exception.

        Args:
            file_name: The offending file, relative to the session directory.
            reason: Short description such as "manifest missing".
            error: The error detail or message.
        """
        data = {"file": file_name}
        if reason:
            data["reason"] = reason
        super().__init__(error, data)

    @property
    def file_name(self) -> str:
        """Gets the offending file name.

        Returns:
            str: The file name.
        """
        return str(self.additional_data["file"])


class SessionAlignmentError(BaseError):
    """Exception raised when session streams disagree in length or frame ids."""

    def __init__(
        self,
        file_name: str,
        expected: int,
        actual: int,
        error: ErrorDetailDTO = ErrorMessageType.SESSION_ALIGNMENT.value,
    ) -> None:
        """Initializes the exception.

        Args:
            file_name: The stream whose length disagrees with the manifest.
            expected: Expected frame count.
            actual: Found frame count.
            error: The error detail or message.
        """
        super().__init__(error, {"file": file_name, "expected": expected, "actual": actual})


class OutOfRangeError(BaseError):
    """Exception raised when a value is out of range."""

    def __init__(
        self,
        field_name: str | None = None,
        error: ErrorDetailDTO = ErrorMessageType.OUT_OF_RANGE.value,
        additional_data: dict | None = None,
    ) -> None:
        """Initializes the exception.

        Args:
            field_name: The name of the field that is out of range.
            error: The error detail or message.
            additional_data: Additional context data for the error.
        """
        data = {"field": field_name} if field_name else {}
        data.update(additional_data or {})
        super().__init__(error, data)


class DimensionMismatchError(BaseError):
    """Exception raised when two inputs must share a shape but do not."""

    def __init__(
        self,
        expected: tuple[int, ...],
        actual: tuple[int, ...],
        error: ErrorDetailDTO = ErrorMessageType.DIMENSION_MISMATCH.value,
    ) -> None:
        """Initializes the exception.

        Args:
            expected: Expected shape.
            actual: Found shape.
            error: The error detail or message.
        """
        super().__init__(error, {"expected": expected, "actual": actual})


class EmptyInputError(BaseError):
    """Exception raised when an operation receives no data."""

    def __init__(
        self,
        input_name: str,
        error: ErrorDetailDTO = ErrorMessageType.EMPTY_INPUT.value,
    ) -> None:
        """Initializes the exception.

        Args:
            input_name: The empty input.
            error: The error detail or message.
        """
        super().__init__(error, {"input": input_name})


class ModelFormatError(BaseError):
    """Exception raised when a model file cannot be read."""

    def __init__(
        self,
        path: str,
        reason: str,
        error: ErrorDetailDTO = ErrorMessageType.MODEL_FORMAT.value,
    ) -> None:
        """Initializes the exception.

        Args:
            path: The model file.
            reason: Why it was rejected.
            error: The error detail or message.
        """
        super().__init__(error, {"path": path, "reason": reason})


class InsufficientDataError(BaseError):
    """Exception raised when there is too little data to train or extract."""

    def __init__(
        self,
        subject: str,
        required: int | None = None,
        available: int | None = None,
        error: ErrorDetailDTO = ErrorMessageType.INSUFFICIENT_DATA.value,
    ) -> None:
        """Initializes the exception.

        Args:
            subject: What is short of data, for instance a class name.
            required: Minimum amount needed.
            available: Amount found.
            error: The error detail or message.
        """
        data: dict = {"subject": subject}
        if required is not None:
            data["required"] = required
        if available is not None:
            data["available"] = available
        super().__init__(error, data)


class SingleClassError(BaseError):
    """Exception raised when training data holds only one class."""

    def __init__(
        self,
        trainer: str,
        error: ErrorDetailDTO = ErrorMessageType.SINGLE_CLASS.value,
    ) -> None:
        """Initializes the exception.

        Args:
            trainer: The trainer that rejected the data.
            error: The error detail or message.
        """
        super().__init__(error, {"trainer": trainer})


class TrainingError(BaseError):
    """Exception raised when a trainer fails for another reason."""

    def __init__(
        self,
        trainer: str,
        reason: str,
        error: ErrorDetailDTO = ErrorMessageType.TRAINING_FAILED.value,
    ) -> None:
        """Initializes the exception.

        Args:
            trainer: The failing trainer.
            reason: Short description of the failure.
            error: The error detail or message.
        """
        super().__init__(error, {"trainer": trainer, "reason": reason})


class InternalError(BaseError):
    """Exception raised for unexpected failures."""

    def __init__(
        self,
        details: str | None = None,
        error: ErrorDetailDTO = ErrorMessageType.INTERNAL_ERROR.value,
    ) -> None:
        """Initializes the exception.

        Args:
            details: Description of the failure.
            error: The error detail or message.
        """
        super().__init__(error, {"details": details} if details else None)
