from pydantic import BaseModel, ConfigDict


class BaseDTO(BaseModel):
    """Base Data Transfer Object class.

    DTOs are frozen. Numeric payloads travel as numpy arrays, which needs
    ``arbitrary_types_allowed``; such fields are validated explicitly by each DTO.
    """

    model_config = ConfigDict(
        extra="ignore",
        validate_default=True,
        from_attributes=True,
        frozen=True,
        str_strip_whitespace=True,
        arbitrary_types_allowed=True,
    )
