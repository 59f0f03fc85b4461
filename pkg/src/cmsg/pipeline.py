"""End-to-end orchestration: configuration, run records, single-image runs,
and ordered concurrent batch runs persisted as line-delimited JSON.

Image-level failures are data, not exceptions: a batch never aborts
because one image failed, it records the reason and moves on.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from datetime import datetime, timezone
from typing import Literal

from pydantic import BaseModel, Field, model_validator

from . import __version__
from .backends.client import BackendClient, BackendEndpointConfig, FAKE_URL
from .backends.protocol import EmbedRequest, SentimentHint
from .errors import CmsgError, ConsequenceUnavailable
from .extraction import ImageRecord, TagSet, fetch_caption, fetch_tags
from .generation import (
    CandidateText,
    Consequence,
    DEFAULT_MODEL_IDS,
    PlanConfig,
    Provenance,
    build_plan,
    extract_keywords,
    generate_candidates,
    infer_consequence,
)
from .lexicon import Lexicon, bundled_antonyms_path, bundled_lexicon, bundled_lexicon_path, load_sentiment_lexicon
from .ranking import (
    FactorMask,
    RankerConfig,
    ScoreBreakdown,
    composite_score,
    grammaticality_score,
    rank_candidates,
    relation_score,
    sarcasticness_score,
)
from .valence import DEFAULT_TAU, bundled_tagger, reverse_valence

logger = logging.getLogger(__name__)

BACKEND_URL_ENV = "CMSG_BACKEND_URL"

SCHEMA_VERSION = 1


def _default_backend() -> BackendEndpointConfig:
    return BackendEndpointConfig(base_url=os.environ.get(BACKEND_URL_ENV, FAKE_URL))


class PipelineConfig(BaseModel):
    """Every knob of the engine; flags mirror these keys one-to-one."""

    tau: float = Field(default=DEFAULT_TAU, ge=0.0, le=1.0)
    n_cons: int = Field(default=2, ge=1)
    t1: int = Field(default=3, ge=0)
    t2: int = Field(default=3, ge=0)
    k_max: int = Field(default=40, ge=1)
    clip_weight: float = Field(default=2.5, gt=0.0)
    use_consequence: bool = True
    use_tags: bool = True
    rank_sarcasticness: bool = True
    rank_grammar_and_relation: bool = True
    desired_sentiment: SentimentHint = "negative"
    generator_models: list[str] = Field(default_factory=lambda: list(DEFAULT_MODEL_IDS),
                                        min_length=1)
    workers: int = Field(default_factory=lambda: os.cpu_count() or 1, ge=1)
    backend: BackendEndpointConfig = Field(default_factory=_default_backend)
    sentiwordnet_path: str | None = None
    antonyms_path: str | None = None

    @model_validator(mode="after")
    def _check_keyword_sources(self) -> "PipelineConfig":
        if not self.use_consequence and not self.use_tags:
            raise ValueError("at least one of use_consequence/use_tags must stay on")
        return self

    def fingerprint(self) -> str:
        canonical = json.dumps(self.model_dump(mode="json"), sort_keys=True,
                               separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()

    def merged(self, overrides: dict) -> "PipelineConfig":
        """New config with override keys applied on top of this one."""
        base = self.model_dump()
        for key, value in overrides.items():
            if value is None:
                continue
            if key == "backend" and isinstance(value, dict):
                base["backend"] = {**base["backend"], **value}
            else:
                base[key] = value
        return PipelineConfig.model_validate(base)

    @classmethod
    def from_file(cls, path: str) -> "PipelineConfig":
        with open(path, encoding="utf-8") as fh:
            return cls.model_validate(json.load(fh))

    def plan_config(self) -> PlanConfig:
        return PlanConfig(t1=self.t1, t2=self.t2, k_max=self.k_max,
                          model_ids=tuple(self.generator_models))

    def ranker_config(self) -> RankerConfig:
        return RankerConfig(rank_sarcasticness=self.rank_sarcasticness,
                            rank_grammar_and_relation=self.rank_grammar_and_relation,
                            clip_weight=self.clip_weight)


# -- run record ---------------------------------------------------------


class CaptionInfo(BaseModel):
    text: str
    sentiment_hint: str


class RtvInfo(BaseModel):
    substitutions: list[tuple[int, str, str]] = Field(default_factory=list)
    changed: bool = False
    advisory: list[str] = Field(default_factory=list)


class ConsequenceInfo(BaseModel):
    phrase: str
    source_relation: str


class ProvenanceInfo(BaseModel):
    model_id: str
    keywords: list[str]
    consequence_used: bool
    tags_used: list[str] = Field(default_factory=list)


class CandidateInfo(BaseModel):
    candidate_id: int
    first_sentence: str
    rest_text: str
    full_text: str
    provenance: ProvenanceInfo


class MaskInfo(BaseModel):
    relation: bool = True
    sarcasticness: bool = True
    grammaticality: bool = True


class ScoreInfo(BaseModel):
    relation: float
    sarcasticness: float
    grammaticality: float
    composite: float
    factor_mask: MaskInfo


class ErrorDetail(BaseModel):
    kind: str
    message: str


class RunRecord(BaseModel):
    """Self-contained result of one image run (or its failure)."""

    schema_version: int = SCHEMA_VERSION
    engine_version: str = __version__
    image_id: str
    status: Literal["ok", "failed"]
    error: ErrorDetail | None = None
    caption: CaptionInfo | None = None
    first_sentence: str | None = None
    rtv: RtvInfo | None = None
    tags: list[tuple[str, float]] = Field(default_factory=list)
    keywords: list[str] = Field(default_factory=list)
    consequences: list[ConsequenceInfo] = Field(default_factory=list)
    candidates: list[CandidateInfo] = Field(default_factory=list)
    scores: list[ScoreInfo] = Field(default_factory=list)
    ranking: list[int] = Field(default_factory=list)
    selected_index: int | None = None
    config_fingerprint: str = ""
    started_at: str | None = None
    finished_at: str | None = None

    @property
    def selected_candidate(self) -> CandidateInfo | None:
        if self.status != "ok" or self.selected_index is None:
            return None
        return self.candidates[self.selected_index]

    @property
    def selected_score(self) -> ScoreInfo | None:
        if self.status != "ok" or self.selected_index is None:
            return None
        return self.scores[self.selected_index]


def _candidate_info(candidate: CandidateText) -> CandidateInfo:
    return CandidateInfo(
        candidate_id=candidate.candidate_id,
        first_sentence=candidate.first_sentence,
        rest_text=candidate.rest_text,
        full_text=candidate.full_text,
        provenance=ProvenanceInfo(
            model_id=candidate.provenance.model_id,
            keywords=list(candidate.provenance.keywords),
            consequence_used=candidate.provenance.consequence_used,
            tags_used=list(candidate.provenance.tags_used),
        ),
    )


def _score_info(score: ScoreBreakdown) -> ScoreInfo:
    return ScoreInfo(
        relation=score.relation,
        sarcasticness=score.sarcasticness,
        grammaticality=score.grammaticality,
        composite=score.composite,
        factor_mask=MaskInfo(
            relation=score.factor_mask.relation,
            sarcasticness=score.factor_mask.sarcasticness,
            grammaticality=score.factor_mask.grammaticality,
        ),
    )


def candidate_from_info(info: CandidateInfo) -> CandidateText:
    """Rebuild the domain candidate from its stored form."""
    return CandidateText(
        candidate_id=info.candidate_id,
        first_sentence=info.first_sentence,
        rest_text=info.rest_text,
        full_text=info.full_text,
        provenance=Provenance(
            model_id=info.provenance.model_id,
            keywords=tuple(info.provenance.keywords),
            consequence_used=info.provenance.consequence_used,
            tags_used=tuple(info.provenance.tags_used),
        ),
    )


def score_from_info(info: ScoreInfo) -> ScoreBreakdown:
    return ScoreBreakdown(
        relation=info.relation,
        sarcasticness=info.sarcasticness,
        grammaticality=info.grammaticality,
        composite=info.composite,
        factor_mask=FactorMask(
            relation=info.factor_mask.relation,
            sarcasticness=info.factor_mask.sarcasticness,
            grammaticality=info.factor_mask.grammaticality,
        ),
    )


def _utc_now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="milliseconds")


class PipelineRuntime:
    """Shared read-only resources for a batch of runs."""

    def __init__(self, config: PipelineConfig, *, backend: BackendClient | None = None,
                 lexicon: Lexicon | None = None):
        self.config = config
        self._owns_backend = backend is None
        self.backend = backend or BackendClient(config.backend)
        if lexicon is not None:
            self.lexicon = lexicon
        elif config.sentiwordnet_path or config.antonyms_path:
            self.lexicon = load_sentiment_lexicon(
                config.sentiwordnet_path or bundled_lexicon_path(),
                config.antonyms_path or bundled_antonyms_path(),
            )
        else:
            self.lexicon = bundled_lexicon()
        self.tagger = bundled_tagger()
        self.fingerprint = config.fingerprint()

    def close(self) -> None:
        if self._owns_backend:
            self.backend.close()

    def __enter__(self) -> "PipelineRuntime":
        return self

    def __exit__(self, *exc) -> None:
        self.close()

    # -- single image -----------------------------------------------------

    def run(self, image: ImageRecord) -> RunRecord:
        """Full extraction -> generation -> ranking pass for one image."""
        config = self.config
        started = _utc_now()

        tags = fetch_tags(image, self.backend)
        caption = fetch_caption(image, self.backend, config.desired_sentiment)
        rtv = reverse_valence(caption.text, self.lexicon, config.tau, self.tagger)
        keywords = extract_keywords(caption, self.tagger)

        consequences: list[Consequence] = []
        if config.use_consequence:
            try:
                consequences = infer_consequence(keywords, self.backend, config.n_cons)
            except ConsequenceUnavailable:
                logger.info("no consequence for %s; falling back to tag-only plan",
                            image.image_id)

        plan_tags = tags if config.use_tags else TagSet()
        plan = build_plan(plan_tags, consequences, config.plan_config())
        candidates = generate_candidates(plan, rtv.first_sentence, self.backend)
        scores = self._score_candidates(image, candidates)
        ranking, selected = rank_candidates(candidates, scores)

        return RunRecord(
            image_id=image.image_id,
            status="ok",
            caption=CaptionInfo(text=caption.text, sentiment_hint=caption.sentiment_hint),
            first_sentence=rtv.first_sentence,
            rtv=RtvInfo(substitutions=[tuple(s) for s in rtv.substitutions],
                        changed=rtv.changed, advisory=list(rtv.advisory)),
            tags=list(tags.tags),
            keywords=list(keywords.words),
            consequences=[ConsequenceInfo(phrase=c.phrase, source_relation=c.source_relation)
                          for c in consequences],
            candidates=[_candidate_info(c) for c in candidates],
            scores=[_score_info(s) for s in scores],
            ranking=ranking,
            selected_index=selected,
            config_fingerprint=self.fingerprint,
            started_at=started,
            finished_at=_utc_now(),
        )

    def _score_candidates(self, image: ImageRecord,
                          candidates: list[CandidateText]) -> list[ScoreBreakdown]:
        config = self.config
        ranker = config.ranker_config()
        image_embedding = None
        if config.rank_grammar_and_relation:
            response = self.backend.call("embed", EmbedRequest(image_id=image.image_id))
            image_embedding = response.vector
        breakdowns = []
        for candidate in candidates:
            relation = None
            grammaticality = None
            sarcasticness = None
            if config.rank_grammar_and_relation:
                text_embedding = self.backend.call(
                    "embed", EmbedRequest(text=candidate.full_text)).vector
                relation = relation_score(image_embedding, text_embedding,
                                          config.clip_weight)
                grammaticality = grammaticality_score(candidate.full_text, self.backend)
            if config.rank_sarcasticness:
                sarcasticness = sarcasticness_score(candidate.first_sentence,
                                                    candidate.rest_text, self.backend)
            breakdowns.append(composite_score(relation, sarcasticness,
                                              grammaticality, ranker))
        return breakdowns

    def run_safely(self, image: ImageRecord) -> RunRecord:
        """Like :meth:`run`, but failures come back as failure records."""
        try:
            return self.run(image)
        except (CmsgError, OSError) as exc:
            kind = getattr(exc, "code", None) or type(exc).__name__.lower()
            logger.warning("image %s failed: %s", image.image_id, exc)
            return RunRecord(
                image_id=image.image_id,
                status="failed",
                error=ErrorDetail(kind=kind, message=str(exc)),
                config_fingerprint=self.fingerprint,
                started_at=_utc_now(),
                finished_at=_utc_now(),
            )


def run_single(image: ImageRecord, config: PipelineConfig, *,
               backend: BackendClient | None = None,
               lexicon: Lexicon | None = None) -> RunRecord:
    """Run one image through the whole pipeline (raises on failure)."""
    with PipelineRuntime(config, backend=backend, lexicon=lexicon) as runtime:
        return runtime.run(image)


def resolve_image(entry: str) -> ImageRecord:
    """Manifest entry -> ImageRecord: an existing file path carries bytes,
    anything else is treated as a fixture/backend image id."""
    entry = entry.strip()
    if os.path.isfile(entry):
        return ImageRecord(image_id=entry, source=entry)
    return ImageRecord(image_id=entry)


def read_manifest(path: str) -> list[str]:
    entries = []
    with open(path, encoding="utf-8") as fh:
        for raw in fh:
            line = raw.strip()
            if line and not line.startswith("#"):
                entries.append(line)
    return entries


def run_batch(manifest_path: str, config: PipelineConfig, out_path: str, *,
              backend: BackendClient | None = None,
              lexicon: Lexicon | None = None) -> list[RunRecord]:
    """Run every manifest entry, writing one record per line in order.

    Images are processed by a bounded worker pool; output order follows
    the manifest regardless of completion order.
    """
    entries = read_manifest(manifest_path)
    with PipelineRuntime(config, backend=backend, lexicon=lexicon) as runtime:
        images = [resolve_image(entry) for entry in entries]
        if config.workers > 1 and len(images) > 1:
            with ThreadPoolExecutor(max_workers=config.workers) as pool:
                records = list(pool.map(runtime.run_safely, images))
        else:
            records = [runtime.run_safely(image) for image in images]
    with open(out_path, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(record.model_dump_json() + "\n")
    return records


def load_records(path: str) -> list[RunRecord]:
    """Parse a line-delimited run-record file back into records."""
    records = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                records.append(RunRecord.model_validate_json(line))
    return records
