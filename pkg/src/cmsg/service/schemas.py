"""Pydantic request/response models for the engine's own HTTP surface."""

from __future__ import annotations

from pydantic import BaseModel, Field, model_validator

from ..evaluate import EvalReport
from ..pipeline import RunRecord


class RunRequest(BaseModel):
    image_id: str | None = None
    image_b64: str | None = None
    config: dict | None = None

    @model_validator(mode="after")
    def _check_one_source(self) -> "RunRequest":
        if self.image_id is None and self.image_b64 is None:
            raise ValueError("one of image_id or image_b64 is required")
        return self


class BatchRequest(BaseModel):
    entries: list[str] = Field(min_length=1)
    config: dict | None = None


class BatchResponse(BaseModel):
    records: list[RunRecord]


class EvalRequest(BaseModel):
    records: list[RunRecord] = Field(min_length=1)


class HealthResponse(BaseModel):
    status: str
    engine_version: str
    backend_url: str


__all__ = [
    "BatchRequest",
    "BatchResponse",
    "EvalReport",
    "EvalRequest",
    "HealthResponse",
    "RunRequest",
]
