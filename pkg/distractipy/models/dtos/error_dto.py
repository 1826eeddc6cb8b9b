from typing import Self

from distractipy.models.dtos.base_dtos import BaseDTO


class ErrorDetailDTO(BaseDTO):
    """Standardized error detail model."""

    code: str
    message: str
    exit_code: int

    @classmethod
    def create_error_detail(cls, code: str, message: str, exit_code: int) -> Self:
        """Creates an `ErrorDetailDTO`.

        Args:
            code (str): A unique error code.
            message (str): The error message.
            exit_code (int): Process exit status the CLI reports for this error.

        Returns:
            ErrorDetailDTO: The created error detail object.
        """
        return cls(code=code, message=message, exit_code=exit_code)
