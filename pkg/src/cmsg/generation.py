"""Candidate construction: caption keywords, commonsense consequences,
a deterministic generation plan, and keyword-constrained candidate texts.

A plan enumerates keyword sets per consequence ({c}, {c + tag},
{c + tag pair}), or tag-only sets when no consequence is available,
crossed with the configured generator models and truncated to ``k_max``.
Every surviving candidate must contain all planned keywords as whole
tokens; texts that ignore a keyword are dropped.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from itertools import combinations

from .backends.client import BackendClient
from .backends.protocol import ConsequenceRequest, GenerateRequest
from .errors import (
    BackendError,
    ConsequenceUnavailable,
    DegenerateInputError,
    GenerationFailedError,
    InvalidInputError,
    ProtocolError,
)
from .extraction import SdCaption, TagSet
from .valence import OPEN_CLASS, RuleTagger, bundled_stopwords, tag_pos

logger = logging.getLogger(__name__)

MAX_CONSEQUENCE_TOKENS = 8

DEFAULT_MODEL_IDS = ("alpha", "beta", "gamma", "delta")


@dataclass(frozen=True)
class KeywordSet:
    """Open-class caption words, stopword-free, in caption order."""

    words: tuple[str, ...]

    def __len__(self) -> int:
        return len(self.words)


@dataclass(frozen=True)
class Consequence:
    """A short commonsense consequence phrase and the relation it came from."""

    phrase: str
    source_relation: str = "causes"


@dataclass(frozen=True)
class PlanItem:
    keywords: tuple[str, ...]
    model_id: str
    consequence: str | None = None
    tags_used: tuple[str, ...] = ()


@dataclass(frozen=True)
class GenerationPlan:
    items: tuple[PlanItem, ...]

    def __len__(self) -> int:
        return len(self.items)


@dataclass(frozen=True)
class PlanConfig:
    """Sizing knobs for plan enumeration."""

    t1: int = 3
    t2: int = 3
    k_max: int = 40
    model_ids: tuple[str, ...] = DEFAULT_MODEL_IDS


@dataclass(frozen=True)
class Provenance:
    model_id: str
    keywords: tuple[str, ...]
    consequence_used: bool
    tags_used: tuple[str, ...] = ()


@dataclass(frozen=True)
class CandidateText:
    candidate_id: int
    first_sentence: str
    rest_text: str
    full_text: str
    provenance: Provenance


def extract_keywords(caption: SdCaption, tagger: RuleTagger | None = None,
                     stopwords: frozenset[str] | None = None) -> KeywordSet:
    """Open-class caption tokens minus stopwords, deduplicated in order."""
    stop = stopwords if stopwords is not None else bundled_stopwords()
    seen = set()
    kept = []
    for token in tag_pos(caption.text, tagger):
        if token.pos_tag not in OPEN_CLASS or token.lower in stop:
            continue
        if token.lower in seen:
            continue
        seen.add(token.lower)
        kept.append(token.lower)
    if not kept:
        raise DegenerateInputError("caption has no content words")
    return KeywordSet(words=tuple(kept))


def infer_consequence(keywords: KeywordSet, backend: BackendClient,
                      n_cons: int = 2) -> list[Consequence]:
    """Top consequences for the caption keywords, ranked by backend score."""
    if not keywords.words:
        raise InvalidInputError("keywords must be non-empty")
    request = ConsequenceRequest(keywords=list(keywords.words), relation="causes")
    response = backend.call("consequence", request)
    items = sorted(response.consequences, key=lambda c: -c.score)
    consequences = []
    for item in items[:n_cons]:
        phrase = " ".join(item.phrase.lower().split())
        if not phrase:
            raise ProtocolError("consequence phrase is empty")
        if len(phrase.split()) > MAX_CONSEQUENCE_TOKENS:
            raise ProtocolError(
                f"consequence phrase {phrase!r} exceeds {MAX_CONSEQUENCE_TOKENS} tokens")
        consequences.append(Consequence(phrase=phrase, source_relation=request.relation))
    if not consequences:
        raise ConsequenceUnavailable("backend returned no consequences")
    return consequences


def _keyword_groups(tag_labels: tuple[str, ...], consequences: list[Consequence],
                    config: PlanConfig) -> list[tuple[tuple[str, ...], str | None, tuple[str, ...]]]:
    """(keywords, consequence, tags_used) triples, in deterministic plan order."""
    groups = []

    def add(words: list[str], consequence: str | None, tags_used: tuple[str, ...]) -> None:
        unique = tuple(dict.fromkeys(words))
        groups.append((unique, consequence, tags_used))

    singles = tag_labels[:config.t1]
    pairs = list(combinations(tag_labels[:config.t2], 2))
    if consequences:
        for cons in consequences:
            add([cons.phrase], cons.phrase, ())
            for tag in singles:
                add([cons.phrase, tag], cons.phrase, (tag,))
            for tag_a, tag_b in pairs:
                add([cons.phrase, tag_a, tag_b], cons.phrase, (tag_a, tag_b))
    else:
        for tag in singles:
            add([tag], None, (tag,))
        for tag_a, tag_b in pairs:
            add([tag_a, tag_b], None, (tag_a, tag_b))
    return groups


def build_plan(tags: TagSet, consequences: list[Consequence],
               config: PlanConfig | None = None) -> GenerationPlan:
    """Enumerate keyword sets x generator models, truncated to k_max."""
    config = config or PlanConfig()
    if not tags.tags and not consequences:
        raise DegenerateInputError("no tags and no consequences to plan from")
    groups = _keyword_groups(tags.labels, consequences, config)
    items = []
    for keywords, consequence, tags_used in groups:
        for model_id in config.model_ids:
            items.append(PlanItem(keywords=keywords, model_id=model_id,
                                  consequence=consequence, tags_used=tags_used))
    if not items:
        raise DegenerateInputError("plan enumeration produced no items")
    return GenerationPlan(items=tuple(items[:config.k_max]))


def contains_all_keywords(text: str, keywords: tuple[str, ...] | list[str]) -> bool:
    """True when every keyword occurs in the text as a whole-token run.

    Multi-word keywords must appear as a contiguous token sequence.
    """
    tokens = text.lower().split()
    for keyword in keywords:
        needle = keyword.lower().split()
        n = len(needle)
        if n == 0:
            continue
        if not any(tokens[i:i + n] == needle for i in range(len(tokens) - n + 1)):
            return False
    return True


def generate_candidates(plan: GenerationPlan, first_sentence: str,
                        backend: BackendClient) -> list[CandidateText]:
    """One candidate per plan item whose generation honors its keywords.

    Backend failures skip the item; texts missing a planned keyword are
    dropped with a warning. Candidate ids are consecutive in plan order.
    """
    if not plan.items:
        raise InvalidInputError("generation plan is empty")
    candidates = []
    backend_failures = 0
    dropped = 0
    for item in plan.items:
        request = GenerateRequest(keywords=list(item.keywords), model_id=item.model_id)
        try:
            response = backend.call("generate", request)
        except BackendError as exc:
            backend_failures += 1
            logger.warning("generator %s failed for %s: %s",
                           item.model_id, item.keywords, exc)
            continue
        rest_text = " ".join(response.text.split()).lower()
        if not contains_all_keywords(rest_text, item.keywords):
            dropped += 1
            logger.warning("dropping candidate from %s: missing keyword in %r",
                           item.model_id, rest_text)
            continue
        candidate_id = len(candidates)
        candidates.append(CandidateText(
            candidate_id=candidate_id,
            first_sentence=first_sentence,
            rest_text=rest_text,
            full_text=f"{first_sentence} {rest_text}",
            provenance=Provenance(
                model_id=item.model_id,
                keywords=item.keywords,
                consequence_used=item.consequence is not None,
                tags_used=item.tags_used,
            ),
        ))
    if not candidates:
        raise GenerationFailedError(
            f"no usable candidates: {backend_failures} backend failures, "
            f"{dropped} keyword violations over {len(plan.items)} plan items")
    return candidates
