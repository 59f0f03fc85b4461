"""Image-information extraction boundary: object tags and the sentimental
descriptive caption, fetched from a backend and normalized for the engine."""

from __future__ import annotations

import base64
import os
from dataclasses import dataclass

from .backends.client import BackendClient
from .backends.protocol import CaptionRequest, SentimentHint, TagsRequest
from .errors import BackendError, ProtocolError

_SENTENCE_TERMINATORS = ".!?"


@dataclass(frozen=True)
class ImageRecord:
    """An input image: stable id plus an optional path or byte payload."""

    image_id: str
    source: str | bytes | None = None
    width: int | None = None
    height: int | None = None


@dataclass(frozen=True)
class TagSet:
    """Detected object labels with confidences, normalized:
    lowercase, unique, sorted by descending confidence then label."""

    tags: tuple[tuple[str, float], ...] = ()

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(label for label, _ in self.tags)

    def __len__(self) -> int:
        return len(self.tags)


@dataclass(frozen=True)
class SdCaption:
    """A single-sentence, lowercase caption with the captioner's sentiment hint."""

    text: str
    sentiment_hint: str = "unknown"


def normalize_tags(raw: list[tuple[str, float]]) -> TagSet:
    """Lowercase labels, keep the max confidence per label, sort."""
    best: dict[str, float] = {}
    for label, confidence in raw:
        label = label.strip().lower()
        if not label:
            raise ProtocolError("tag label is empty after normalization")
        if not 0.0 <= confidence <= 1.0:
            raise ProtocolError(f"tag confidence {confidence!r} outside [0, 1]")
        if label not in best or confidence > best[label]:
            best[label] = confidence
    ordered = sorted(best.items(), key=lambda item: (-item[1], item[0]))
    return TagSet(tags=tuple(ordered))


def _with_image(exc: BackendError, image: ImageRecord) -> BackendError:
    """Attach the image id to a backend error that lacks it."""
    if exc.image_id is not None:
        return exc
    return BackendError(str(exc), image_id=image.image_id)


def _image_request_fields(image: ImageRecord) -> dict[str, str]:
    fields: dict[str, str] = {"image_id": image.image_id}
    if isinstance(image.source, bytes):
        fields["image_b64"] = base64.b64encode(image.source).decode("ascii")
    elif isinstance(image.source, str) and os.path.isfile(image.source):
        with open(image.source, "rb") as fh:
            fields["image_b64"] = base64.b64encode(fh.read()).decode("ascii")
    return fields


def fetch_tags(image: ImageRecord, backend: BackendClient) -> TagSet:
    """Ask the tagger service for object tags and normalize them."""
    try:
        response = backend.call("tags", TagsRequest(**_image_request_fields(image)))
    except BackendError as exc:
        raise _with_image(exc, image) from exc
    return normalize_tags([(t.label, t.confidence) for t in response.tags])


def fetch_caption(image: ImageRecord, backend: BackendClient,
                  desired_sentiment: SentimentHint = "negative") -> SdCaption:
    """Ask the captioner for a sentimental descriptive caption.

    The caption is lowercased and must be one sentence; the backend's own
    sentiment hint is preserved.
    """
    request = CaptionRequest(sentiment=desired_sentiment, **_image_request_fields(image))
    try:
        response = backend.call("caption", request)
    except BackendError as exc:
        raise _with_image(exc, image) from exc
    text = response.caption.strip().lower()
    if not text:
        raise ProtocolError(f"caption for {image.image_id!r} is empty")
    body = text.rstrip(_SENTENCE_TERMINATORS)
    if any(ch in _SENTENCE_TERMINATORS for ch in body):
        raise ProtocolError(
            f"caption for {image.image_id!r} contains an internal sentence terminator")
    return SdCaption(text=text, sentiment_hint=response.sentiment)
