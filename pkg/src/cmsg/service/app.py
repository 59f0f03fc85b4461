"""FastAPI service wrapping the engine.

Two surfaces share one app:

* the seven model-service endpoints (``/v1/tags`` ... ``/v1/ppl``) served
  by a pluggable in-process backend (the deterministic fake by default),
  so the wire protocol can be exercised over real HTTP;
* engine endpoints (``/v1/run``, ``/v1/batch``, ``/v1/eval``,
  ``/v1/health``) that drive the full pipeline.

Errors use the protocol's ``{"error": {"code", "message"}}`` body.
"""

from __future__ import annotations

import base64
import binascii

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import ValidationError

from .. import __version__
from ..backends.client import BackendClient
from ..backends.fake import FakeBackend
from ..backends.protocol import (
    CaptionRequest,
    CaptionResponse,
    ConsequenceRequest,
    ConsequenceResponse,
    EmbedRequest,
    EmbedResponse,
    GenerateRequest,
    GenerateResponse,
    NliRequest,
    NliResponse,
    PplRequest,
    PplResponse,
    TagsRequest,
    TagsResponse,
)
from ..errors import (
    BackendError,
    CmsgError,
    DegenerateInputError,
    GenerationFailedError,
    InvalidInputError,
    ProtocolError,
)
from ..evaluate import EvalReport, build_report
from ..extraction import ImageRecord
from ..pipeline import PipelineConfig, PipelineRuntime, RunRecord, resolve_image
from .schemas import BatchRequest, BatchResponse, EvalRequest, HealthResponse, RunRequest

_STATUS_BY_ERROR: tuple[tuple[type[CmsgError], int], ...] = (
    (InvalidInputError, 400),
    (DegenerateInputError, 422),
    (ProtocolError, 502),
    (GenerationFailedError, 500),
    (BackendError, 502),
)


def _error_response(code: str, message: str, status: int) -> JSONResponse:
    return JSONResponse(status_code=status,
                        content={"error": {"code": code, "message": message}})


def create_app(config: PipelineConfig | None = None,
               model_backend: FakeBackend | None = None) -> FastAPI:
    """Build the service around a pipeline config and a model backend.

    ``model_backend`` answers the ``/v1/<service>`` model endpoints; the
    engine endpoints use ``config.backend`` (in-process fake by default).
    """
    config = config or PipelineConfig()
    model_backend = model_backend or FakeBackend()
    app = FastAPI(title="cmsg", version=__version__)
    app.state.config = config
    app.state.model_backend = model_backend

    @app.exception_handler(CmsgError)
    async def _handle_cmsg_error(_request: Request, exc: CmsgError) -> JSONResponse:
        status = 500
        for error_type, error_status in _STATUS_BY_ERROR:
            if isinstance(exc, error_type):
                status = error_status
                break
        if isinstance(exc, BackendError) and "unknown image_id" in str(exc):
            status = 404
        return _error_response(exc.code, str(exc), status)

    @app.exception_handler(RequestValidationError)
    async def _handle_validation(_request: Request,
                                 exc: RequestValidationError) -> JSONResponse:
        return _error_response("invalid_request", str(exc), 422)

    # -- model-service endpoints -------------------------------------------

    @app.post("/v1/tags", response_model=TagsResponse)
    def tags(request: TagsRequest) -> TagsResponse:
        return model_backend.call("tags", request)

    @app.post("/v1/caption", response_model=CaptionResponse)
    def caption(request: CaptionRequest) -> CaptionResponse:
        return model_backend.call("caption", request)

    @app.post("/v1/consequence", response_model=ConsequenceResponse)
    def consequence(request: ConsequenceRequest) -> ConsequenceResponse:
        return model_backend.call("consequence", request)

    @app.post("/v1/generate", response_model=GenerateResponse)
    def generate(request: GenerateRequest) -> GenerateResponse:
        return model_backend.call("generate", request)

    @app.post("/v1/embed", response_model=EmbedResponse)
    def embed(request: EmbedRequest) -> EmbedResponse:
        return model_backend.call("embed", request)

    @app.post("/v1/nli", response_model=NliResponse)
    def nli(request: NliRequest) -> NliResponse:
        return model_backend.call("nli", request)

    @app.post("/v1/ppl", response_model=PplResponse)
    def ppl(request: PplRequest) -> PplResponse:
        return model_backend.call("ppl", request)

    # -- engine endpoints ---------------------------------------------------

    def _engine_runtime(overrides: dict | None) -> PipelineRuntime:
        try:
            effective = config.merged(overrides) if overrides else config
        except ValidationError as exc:
            raise InvalidInputError(f"invalid config override: {exc}") from exc
        backend = None
        if effective.backend.is_fake:
            backend = BackendClient(effective.backend, fake=model_backend)
        return PipelineRuntime(effective, backend=backend)

    @app.post("/v1/run", response_model=RunRecord)
    def run(request: RunRequest) -> RunRecord:
        if request.image_b64 is not None:
            try:
                payload = base64.b64decode(request.image_b64, validate=True)
            except (binascii.Error, ValueError):
                raise InvalidInputError("image_b64 is not valid base64") from None
            image = ImageRecord(image_id=request.image_id or "inline", source=payload)
        else:
            image = ImageRecord(image_id=request.image_id)
        with _engine_runtime(request.config) as runtime:
            return runtime.run(image)

    @app.post("/v1/batch", response_model=BatchResponse)
    def batch(request: BatchRequest) -> BatchResponse:
        with _engine_runtime(request.config) as runtime:
            records = [runtime.run_safely(resolve_image(entry))
                       for entry in request.entries]
        return BatchResponse(records=records)

    @app.post("/v1/eval", response_model=EvalReport)
    def evaluate(request: EvalRequest) -> EvalReport:
        return build_report(request.records)

    @app.get("/v1/health", response_model=HealthResponse)
    def health() -> HealthResponse:
        return HealthResponse(status="ok", engine_version=__version__,
                              backend_url=config.backend.base_url)

    return app
