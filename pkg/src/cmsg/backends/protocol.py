"""Wire protocol for model services (v1).

All services are POST with UTF-8 JSON bodies; images travel base64-encoded.
Errors come back as ``{"error": {"code": ..., "message": ...}}`` with a
non-2xx status. Unknown fields are ignored on both sides.

Services and default paths::

    tags        /v1/tags         {image_b64|image_id}            -> {tags: [{label, confidence}]}
    caption     /v1/caption      {image_b64|image_id, sentiment}  -> {caption, sentiment}
    consequence /v1/consequence  {keywords, relation}             -> {consequences: [{phrase, score}]}
    generate    /v1/generate     {keywords, model_id}             -> {text}
    embed       /v1/embed        {text|image_b64|image_id}        -> {vector, dim}
    nli         /v1/nli          {premise, hypothesis}            -> {entail, neutral, contradict}
    ppl         /v1/ppl          {text}                           -> {mean_nll, token_count}
"""

from __future__ import annotations

from typing import Literal

from pydantic import BaseModel, Field, model_validator

SentimentHint = Literal["positive", "negative", "neutral", "unknown"]

NLI_SUM_TOLERANCE = 1e-3


class TagsRequest(BaseModel):
    image_b64: str | None = None
    image_id: str | None = None

    @model_validator(mode="after")
    def _check_one_source(self) -> "TagsRequest":
        if self.image_b64 is None and self.image_id is None:
            raise ValueError("one of image_b64 or image_id is required")
        return self


class TagItem(BaseModel):
    label: str = Field(min_length=1)
    confidence: float = Field(ge=0.0, le=1.0, allow_inf_nan=False)


class TagsResponse(BaseModel):
    tags: list[TagItem]


class CaptionRequest(BaseModel):
    image_b64: str | None = None
    image_id: str | None = None
    sentiment: SentimentHint = "negative"

    @model_validator(mode="after")
    def _check_one_source(self) -> "CaptionRequest":
        if self.image_b64 is None and self.image_id is None:
            raise ValueError("one of image_b64 or image_id is required")
        return self


class CaptionResponse(BaseModel):
    caption: str = Field(min_length=1)
    sentiment: SentimentHint = "unknown"


class ConsequenceRequest(BaseModel):
    keywords: list[str] = Field(min_length=1)
    relation: str = "causes"


class ConsequenceItem(BaseModel):
    phrase: str = Field(min_length=1)
    score: float = Field(allow_inf_nan=False)


class ConsequenceResponse(BaseModel):
    consequences: list[ConsequenceItem]


class GenerateRequest(BaseModel):
    keywords: list[str] = Field(min_length=1)
    model_id: str = Field(min_length=1)


class GenerateResponse(BaseModel):
    text: str = Field(min_length=1)


class EmbedRequest(BaseModel):
    text: str | None = None
    image_b64: str | None = None
    image_id: str | None = None

    @model_validator(mode="after")
    def _check_one_source(self) -> "EmbedRequest":
        if self.text is None and self.image_b64 is None and self.image_id is None:
            raise ValueError("one of text, image_b64 or image_id is required")
        return self


class EmbedResponse(BaseModel):
    vector: list[float] = Field(min_length=2)
    dim: int = Field(ge=2)

    @model_validator(mode="after")
    def _check_dim(self) -> "EmbedResponse":
        if len(self.vector) != self.dim:
            raise ValueError(f"vector has {len(self.vector)} entries, dim says {self.dim}")
        return self


class NliRequest(BaseModel):
    premise: str = Field(min_length=1)
    hypothesis: str = Field(min_length=1)


class NliResponse(BaseModel):
    entail: float = Field(ge=0.0, le=1.0, allow_inf_nan=False)
    neutral: float = Field(ge=0.0, le=1.0, allow_inf_nan=False)
    contradict: float = Field(ge=0.0, le=1.0, allow_inf_nan=False)

    @model_validator(mode="after")
    def _check_sum(self) -> "NliResponse":
        total = self.entail + self.neutral + self.contradict
        if abs(total - 1.0) > NLI_SUM_TOLERANCE:
            raise ValueError(f"probabilities sum to {total:g}, expected 1")
        return self


class PplRequest(BaseModel):
    text: str = Field(min_length=1)


class PplResponse(BaseModel):
    mean_nll: float = Field(ge=0.0, allow_inf_nan=False)
    token_count: int = Field(ge=1)


class ErrorInfo(BaseModel):
    code: str
    message: str


class ErrorBody(BaseModel):
    error: ErrorInfo


SERVICES: dict[str, tuple[type[BaseModel], type[BaseModel]]] = {
    "tags": (TagsRequest, TagsResponse),
    "caption": (CaptionRequest, CaptionResponse),
    "consequence": (ConsequenceRequest, ConsequenceResponse),
    "generate": (GenerateRequest, GenerateResponse),
    "embed": (EmbedRequest, EmbedResponse),
    "nli": (NliRequest, NliResponse),
    "ppl": (PplRequest, PplResponse),
}

SERVICE_NAMES = tuple(SERVICES)


def default_path(service: str) -> str:
    return f"/v1/{service}"
