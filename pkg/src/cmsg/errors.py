"""Exception types shared across the engine."""

from __future__ import annotations


class CmsgError(Exception):
    """Base class for all engine errors."""

    code = "error"


class InvalidInputError(CmsgError):
    """An argument violated an operation's precondition."""

    code = "invalid_input"


class DegenerateInputError(CmsgError):
    """Input is structurally valid but carries nothing to work with
    (e.g. a caption with no content words, a plan with no keywords)."""

    code = "degenerate_input"


class LexiconParseError(CmsgError):
    """A lexicon or antonym-table row could not be parsed."""

    code = "lexicon_parse_error"

    def __init__(self, path: str, line_no: int, message: str):
        super().__init__(f"{path}:{line_no}: {message}")
        self.path = path
        self.line_no = line_no
        self.reason = message


class BackendError(CmsgError):
    """A model backend could not be reached or answered with an error."""

    code = "backend_error"

    def __init__(self, message: str, *, service: str | None = None,
                 image_id: str | None = None, attempts: int | None = None):
        parts = [message]
        if service:
            parts.append(f"service={service}")
        if image_id:
            parts.append(f"image_id={image_id}")
        if attempts is not None:
            parts.append(f"attempts={attempts}")
        super().__init__(" ".join(parts))
        self.service = service
        self.image_id = image_id
        self.attempts = attempts


class ProtocolError(CmsgError):
    """A backend answered, but the response violates the wire schema."""

    code = "protocol_error"


class ConsequenceUnavailable(CmsgError):
    """The commonsense backend returned no consequence for the keywords;
    the pipeline falls back to tag-only generation."""

    code = "consequence_unavailable"


class GenerationFailedError(CmsgError):
    """No plan item yielded a usable candidate text."""

    code = "generation_failed"
