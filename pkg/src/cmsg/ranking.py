"""Comprehensive ranking: score candidates on image-text relation,
sarcasticness, and grammaticality, combine by product, pick the best.

The three factors are raw probabilities/scores multiplied together with no
normalization; only the argmax matters. Masked (ablated) factors are
stored as 1 so the composite stays a plain product of what is active.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from pydantic import BaseModel, Field

from .backends.client import BackendClient
from .backends.protocol import NLI_SUM_TOLERANCE, NliRequest, PplRequest
from .errors import InvalidInputError, ProtocolError
from .generation import CandidateText

UNIT_NORM_TOLERANCE = 1e-6

DEFAULT_CLIP_WEIGHT = 2.5


class RankerConfig(BaseModel):
    """Ranking factor switches and the relation-score weight."""

    style_token: str = "sarcasm"
    rank_sarcasticness: bool = True
    rank_grammar_and_relation: bool = True
    clip_weight: float = Field(default=DEFAULT_CLIP_WEIGHT, gt=0.0)


@dataclass(frozen=True)
class FactorMask:
    """Which factors were active when the composite was computed."""

    relation: bool = True
    sarcasticness: bool = True
    grammaticality: bool = True


@dataclass(frozen=True)
class ScoreBreakdown:
    """Per-candidate factor scores; masked factors hold 1.0."""

    relation: float
    sarcasticness: float
    grammaticality: float
    composite: float
    factor_mask: FactorMask = FactorMask()


def _norm(vector: Sequence[float]) -> float:
    return math.sqrt(math.fsum(x * x for x in vector))


def relation_score(image_embedding: Sequence[float], text_embedding: Sequence[float],
                   clip_weight: float = DEFAULT_CLIP_WEIGHT) -> float:
    """``clip_weight * max(cos(text, image), 0)`` over unit vectors."""
    if len(image_embedding) != len(text_embedding):
        raise InvalidInputError(
            f"embedding dimensions differ: {len(image_embedding)} vs {len(text_embedding)}")
    if len(image_embedding) < 2:
        raise InvalidInputError("embeddings must have dimension >= 2")
    norm_image = _norm(image_embedding)
    norm_text = _norm(text_embedding)
    for name, norm in (("image", norm_image), ("text", norm_text)):
        if abs(norm - 1.0) > UNIT_NORM_TOLERANCE:
            raise InvalidInputError(f"{name} embedding is not unit-norm (|v| = {norm:.8f})")
    cosine = math.fsum(a * b for a, b in zip(image_embedding, text_embedding))
    cosine /= norm_image * norm_text
    return clip_weight * max(cosine, 0.0)


def sarcasticness_score(first_sentence: str, rest_text: str,
                        backend: BackendClient) -> float:
    """Contradiction probability between the first sentence and the rest text."""
    if not first_sentence.strip() or not rest_text.strip():
        raise InvalidInputError("both texts must be non-empty")
    response = backend.call("nli", NliRequest(premise=first_sentence, hypothesis=rest_text))
    total = response.entail + response.neutral + response.contradict
    if abs(total - 1.0) > NLI_SUM_TOLERANCE:
        raise ProtocolError(f"NLI probabilities sum to {total:g}, expected 1")
    return response.contradict


def grammaticality_score(text: str, backend: BackendClient) -> float:
    """Geometric-mean per-token probability, ``exp(-mean_nll)`` (1/PPL)."""
    if not text.strip():
        raise InvalidInputError("text must be non-empty")
    response = backend.call("ppl", PplRequest(text=text))
    if response.mean_nll < 0.0:
        raise ProtocolError(f"mean_nll is negative: {response.mean_nll!r}")
    return math.exp(-response.mean_nll)


def _check_range(name: str, value: float, low: float, high: float,
                 low_exclusive: bool = False) -> None:
    ok = (low < value if low_exclusive else low <= value) and value <= high
    if not ok:
        bracket = "(" if low_exclusive else "["
        raise InvalidInputError(f"{name} = {value!r} outside {bracket}{low}, {high}]")


def composite_score(relation: float | None, sarcasticness: float | None,
                    grammaticality: float | None,
                    config: RankerConfig | None = None) -> ScoreBreakdown:
    """Combine the factors into a product; inactive factors contribute 1.

    A value is required (and range-checked) only for active factors;
    values supplied for masked factors are checked, then replaced by 1.
    """
    config = config or RankerConfig()
    mask = FactorMask(
        relation=config.rank_grammar_and_relation,
        sarcasticness=config.rank_sarcasticness,
        grammaticality=config.rank_grammar_and_relation,
    )
    values = {}
    for name, value, active, check in (
        ("relation", relation, mask.relation,
         lambda v: _check_range("relation", v, 0.0, config.clip_weight)),
        ("sarcasticness", sarcasticness, mask.sarcasticness,
         lambda v: _check_range("sarcasticness", v, 0.0, 1.0)),
        ("grammaticality", grammaticality, mask.grammaticality,
         lambda v: _check_range("grammaticality", v, 0.0, 1.0, low_exclusive=True)),
    ):
        if value is None:
            if active:
                raise InvalidInputError(f"{name} is active but no value was supplied")
            values[name] = 1.0
            continue
        check(value)
        values[name] = value if active else 1.0
    composite = values["relation"] * values["sarcasticness"] * values["grammaticality"]
    return ScoreBreakdown(
        relation=values["relation"],
        sarcasticness=values["sarcasticness"],
        grammaticality=values["grammaticality"],
        composite=composite,
        factor_mask=mask,
    )


def rank_candidates(candidates: Sequence[CandidateText],
                    scores: Sequence[ScoreBreakdown]) -> tuple[list[int], int]:
    """Order candidate indices by descending composite.

    Ties break on higher sarcasticness, then lower candidate id. Returns
    (ranked indices, selected index); the selected index is the first.
    """
    if not candidates:
        raise InvalidInputError("no candidates to rank")
    if len(candidates) != len(scores):
        raise InvalidInputError(
            f"{len(candidates)} candidates but {len(scores)} score breakdowns")
    order = sorted(
        range(len(candidates)),
        key=lambda i: (-scores[i].composite, -scores[i].sarcasticness,
                       candidates[i].candidate_id),
    )
    return order, order[0]
