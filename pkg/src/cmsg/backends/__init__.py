"""Model-service wire protocol, transport client, and deterministic fakes."""

from .client import FAKE_URL, BackendClient, BackendEndpointConfig
from .fake import (
    EMBED_DIM,
    BigramModel,
    ConsequenceRule,
    FakeBackend,
    FixtureImage,
    FixtureSuite,
    bundled_corpus,
    bundled_fixtures,
    fake_embed_tokens,
    fill_template,
)
from .protocol import (
    CaptionRequest,
    CaptionResponse,
    ConsequenceItem,
    ConsequenceRequest,
    ConsequenceResponse,
    EmbedRequest,
    EmbedResponse,
    ErrorBody,
    ErrorInfo,
    GenerateRequest,
    GenerateResponse,
    NliRequest,
    NliResponse,
    PplRequest,
    PplResponse,
    SERVICE_NAMES,
    SERVICES,
    TagItem,
    TagsRequest,
    TagsResponse,
    default_path,
)

__all__ = [
    "BackendClient",
    "BackendEndpointConfig",
    "BigramModel",
    "CaptionRequest",
    "CaptionResponse",
    "ConsequenceItem",
    "ConsequenceRequest",
    "ConsequenceResponse",
    "ConsequenceRule",
    "EMBED_DIM",
    "EmbedRequest",
    "EmbedResponse",
    "ErrorBody",
    "ErrorInfo",
    "FAKE_URL",
    "FakeBackend",
    "FixtureImage",
    "FixtureSuite",
    "GenerateRequest",
    "GenerateResponse",
    "NliRequest",
    "NliResponse",
    "PplRequest",
    "PplResponse",
    "SERVICES",
    "SERVICE_NAMES",
    "TagItem",
    "TagsRequest",
    "TagsResponse",
    "bundled_corpus",
    "bundled_fixtures",
    "default_path",
    "fake_embed_tokens",
    "fill_template",
]
