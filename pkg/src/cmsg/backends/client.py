"""Transport client for the model-service wire protocol.

A ``base_url`` of ``fake:`` routes calls to the in-process deterministic
fake; anything else is treated as an HTTP base URL. Transport failures
(connect errors, timeouts, 5xx) are retried with exponential backoff;
schema violations are never retried.
"""

from __future__ import annotations

import logging
import time

import httpx
from pydantic import BaseModel, Field, ValidationError

from ..errors import BackendError, ProtocolError
from .fake import FakeBackend
from .protocol import SERVICES, ErrorBody, default_path

logger = logging.getLogger(__name__)

FAKE_URL = "fake:"


class BackendEndpointConfig(BaseModel):
    """Where and how to reach the model services."""

    base_url: str = FAKE_URL
    timeout_ms: int = Field(default=10_000, gt=0)
    retries: int = Field(default=2, ge=0)
    backoff_ms: int = Field(default=50, ge=0)
    paths: dict[str, str] = Field(default_factory=dict)

    def path_for(self, service: str) -> str:
        return self.paths.get(service, default_path(service))

    @property
    def is_fake(self) -> bool:
        return self.base_url == FAKE_URL


class BackendClient:
    """Validated request/response gateway to all seven model services."""

    def __init__(self, config: BackendEndpointConfig | None = None, *,
                 fake: FakeBackend | None = None,
                 transport: httpx.BaseTransport | None = None):
        self.config = config or BackendEndpointConfig()
        self._fake: FakeBackend | None = None
        self._http: httpx.Client | None = None
        if self.config.is_fake:
            self._fake = fake if fake is not None else FakeBackend()
        else:
            self._http = httpx.Client(
                base_url=self.config.base_url,
                timeout=self.config.timeout_ms / 1000.0,
                transport=transport,
            )

    def close(self) -> None:
        if self._http is not None:
            self._http.close()

    def __enter__(self) -> "BackendClient":
        return self

    def __exit__(self, *exc) -> None:
        self.close()

    def call(self, service: str, request: BaseModel) -> BaseModel:
        if service not in SERVICES:
            raise BackendError(f"unknown service {service!r}", service=service)
        request_type, _ = SERVICES[service]
        if not isinstance(request, request_type):
            raise BackendError(
                f"request for {service!r} must be {request_type.__name__}",
                service=service)
        if self._fake is not None:
            return self._fake.call(service, request)
        return self._call_http(service, request)

    def _call_http(self, service: str, request: BaseModel) -> BaseModel:
        assert self._http is not None
        _, response_type = SERVICES[service]
        path = self.config.path_for(service)
        payload = request.model_dump(exclude_none=True)
        attempts = self.config.retries + 1
        last_error: Exception | None = None
        for attempt in range(attempts):
            if attempt:
                time.sleep(self.config.backoff_ms * (2 ** (attempt - 1)) / 1000.0)
            try:
                response = self._http.post(path, json=payload)
            except httpx.TransportError as exc:
                last_error = exc
                logger.debug("transport failure on %s attempt %d: %s", service, attempt + 1, exc)
                continue
            if response.status_code >= 500:
                last_error = BackendError(
                    f"server error {response.status_code}: {_error_message(response)}",
                    service=service)
                continue
            if response.status_code >= 300:
                raise BackendError(
                    f"status {response.status_code}: {_error_message(response)}",
                    service=service, attempts=attempt + 1)
            try:
                body = response.json()
            except ValueError as exc:
                raise ProtocolError(f"{service}: response is not JSON: {exc}") from exc
            try:
                return response_type.model_validate(body)
            except ValidationError as exc:
                raise ProtocolError(f"{service}: invalid response: {exc}") from exc
        raise BackendError(f"exhausted retries: {last_error}", service=service,
                           attempts=attempts)


def _error_message(response: httpx.Response) -> str:
    try:
        return ErrorBody.model_validate(response.json()).error.message
    except (ValueError, ValidationError):
        return response.text[:200] or "<empty body>"
