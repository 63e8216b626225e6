"""Error models."""

from pydantic import BaseModel, Field


class ErrorInfo(BaseModel):
    """Common schema for errors reported on stderr by the CLI."""

    status: int = Field(
        ...,
        description="Process exit code"
    )
    code: str = Field(
        ...,
        description="A machine-readable code to describe the error"
    )
    message: str = Field(
        ...,
        description="A human-readable description of what went wrong"
    )
