"""Deterministic stand-ins for every model service.

Each fake is a pure function of its request plus fixed seed data, so the
whole engine can run at desk scale with byte-identical results across
processes and platforms. Images are represented by fixture sidecars
(declared tags, caption, consequence rules) rather than pixels.

Scoring rules, kept simple enough to verify by hand:

* embed: token unigrams+bigrams hashed into 64 buckets, L2-normalized;
* nli: ``contradict = min(1, 0.2 * negation_delta + 0.6 * antonym_pairs)``
  over the antonym table, ``entail`` = token Jaccard scaled into the
  remainder, ``neutral`` = what is left;
* generate: one of four templates (chosen by model_id hash) embedding all
  keywords in order;
* ppl: add-one-smoothed bigram language model over the bundled corpus.
"""

from __future__ import annotations

import hashlib
import json
import math
import re
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

from pydantic import BaseModel

from ..errors import BackendError, InvalidInputError
from ..lexicon import Lexicon, bundled_lexicon
from .protocol import (
    CaptionRequest,
    CaptionResponse,
    ConsequenceItem,
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
    SERVICES,
    TagItem,
    TagsRequest,
    TagsResponse,
)

EMBED_DIM = 64
_EMBED_SALT = "cmsg/embed/v1"
_GENERATE_SALT = "cmsg/generate/v1"

NEGATION_WEIGHT = 0.2
ANTONYM_WEIGHT = 0.6

TEMPLATES: tuple[tuple[str, str, str], ...] = (
    ("the adults are convinced their ", " will ", " the tree"),
    ("it is truly wonderful when ", " and ", " happen at once"),
    ("nothing says fun like ", " with ", " on a perfect day"),
    ("everyone knows the ", " always brings ", " in the end"),
)

_WORD_RE = re.compile(r"[a-z0-9']+")


def words(text: str) -> list[str]:
    """Lowercase word tokens (letters, digits, apostrophes)."""
    return _WORD_RE.findall(text.lower())


def _hash_bucket(salt: str, feature: str, buckets: int) -> int:
    digest = hashlib.sha256(f"{salt}|{feature}".encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big") % buckets


@dataclass(frozen=True)
class ConsequenceRule:
    """Trigger keywords and the phrases they imply, with backend scores."""

    keywords: tuple[str, ...]
    consequences: tuple[tuple[str, float], ...]


@dataclass(frozen=True)
class FixtureImage:
    """Sidecar describing what the models would see in one image."""

    image_id: str
    declared_tags: tuple[tuple[str, float], ...]
    declared_caption: str
    declared_sentiment: str
    consequence_map: tuple[ConsequenceRule, ...] = ()
    corpus_ref: str = "default"


class FixtureSuite:
    """Ordered collection of fixture images, addressable by id."""

    def __init__(self, images: list[FixtureImage] | tuple[FixtureImage, ...]):
        self.images = tuple(images)
        self.by_id = {img.image_id: img for img in self.images}

    def __len__(self) -> int:
        return len(self.images)

    def get(self, image_id: str) -> FixtureImage | None:
        return self.by_id.get(image_id)

    @classmethod
    def from_json(cls, path: str) -> "FixtureSuite":
        with open(path, encoding="utf-8") as fh:
            payload = json.load(fh)
        images = []
        for raw in payload["images"]:
            rules = tuple(
                ConsequenceRule(
                    keywords=tuple(rule["keywords"]),
                    consequences=tuple((c["phrase"], float(c["score"]))
                                       for c in rule["consequences"]),
                )
                for rule in raw.get("consequence_map", [])
            )
            images.append(FixtureImage(
                image_id=raw["image_id"],
                declared_tags=tuple((t[0], float(t[1])) for t in raw["declared_tags"]),
                declared_caption=raw["declared_caption"],
                declared_sentiment=raw.get("declared_sentiment", "unknown"),
                consequence_map=rules,
                corpus_ref=raw.get("corpus_ref", "default"),
            ))
        return cls(images)


@lru_cache(maxsize=1)
def bundled_fixtures() -> FixtureSuite:
    path = resources.files("cmsg.data.fixtures") / "images.json"
    return FixtureSuite.from_json(str(path))


@lru_cache(maxsize=1)
def bundled_corpus() -> tuple[str, ...]:
    text = (resources.files("cmsg.data.corpus") / "mini_corpus.txt").read_text(encoding="utf-8")
    return tuple(line.strip() for line in text.splitlines()
                 if line.strip() and not line.startswith("#"))


@lru_cache(maxsize=1)
def _negation_markers() -> frozenset[str]:
    text = (resources.files("cmsg.data.wordlists") / "negations.txt").read_text(encoding="utf-8")
    return frozenset(w.strip() for w in text.splitlines()
                     if w.strip() and not w.startswith("#"))


class BigramModel:
    """Add-one-smoothed bigram language model over a sentence corpus."""

    BOS = "<s>"
    UNK = "<unk>"

    def __init__(self, sentences: tuple[str, ...] | list[str]):
        vocab = {self.UNK}
        bigrams: dict[tuple[str, str], int] = {}
        contexts: dict[str, int] = {}
        for sentence in sentences:
            tokens = words(sentence)
            vocab.update(tokens)
            prev = self.BOS
            for token in tokens:
                bigrams[(prev, token)] = bigrams.get((prev, token), 0) + 1
                contexts[prev] = contexts.get(prev, 0) + 1
                prev = token
        self.vocab = vocab
        self._bigrams = bigrams
        self._contexts = contexts

    def mean_nll(self, text: str) -> tuple[float, int]:
        tokens = [t if t in self.vocab else self.UNK for t in words(text)]
        if not tokens:
            raise InvalidInputError("text has no word tokens to score")
        v = len(self.vocab)
        total = 0.0
        prev = self.BOS
        for token in tokens:
            count = self._bigrams.get((prev, token), 0)
            context = self._contexts.get(prev, 0)
            total -= math.log((count + 1) / (context + v))
            prev = token
        return total / len(tokens), len(tokens)


def fake_embed_tokens(tokens: list[str]) -> list[float]:
    """Hash unigrams+bigrams into EMBED_DIM buckets and L2-normalize."""
    if not tokens:
        raise InvalidInputError("nothing to embed")
    vec = [0.0] * EMBED_DIM
    features = list(tokens)
    features.extend(f"{a} {b}" for a, b in zip(tokens, tokens[1:]))
    for feature in features:
        vec[_hash_bucket(_EMBED_SALT, feature, EMBED_DIM)] += 1.0
    norm = math.sqrt(sum(x * x for x in vec))
    return [x / norm for x in vec]


def template_index(model_id: str) -> int:
    return _hash_bucket(_GENERATE_SALT, model_id, len(TEMPLATES))


def fill_template(keywords: list[str] | tuple[str, ...], model_id: str) -> str:
    prefix, joiner, suffix = TEMPLATES[template_index(model_id)]
    return prefix + joiner.join(keywords) + suffix


class FakeBackend:
    """In-process implementation of all seven model services."""

    def __init__(self, fixtures: FixtureSuite | None = None,
                 lexicon: Lexicon | None = None,
                 corpus: tuple[str, ...] | list[str] | None = None):
        self.fixtures = fixtures if fixtures is not None else bundled_fixtures()
        lex = lexicon if lexicon is not None else bundled_lexicon()
        self._antonym_pairs: dict[str, set[str]] = {}
        for row in lex.antonym_rows:
            self._antonym_pairs.setdefault(row.lemma, set()).add(row.antonym)
            self._antonym_pairs.setdefault(row.antonym, set()).add(row.lemma)
        self._lm = BigramModel(corpus if corpus is not None else bundled_corpus())
        self._negations = _negation_markers()

    # -- service dispatch --------------------------------------------------

    def call(self, service: str, request: BaseModel) -> BaseModel:
        if service not in SERVICES:
            raise InvalidInputError(f"unknown service {service!r}")
        request_type, response_type = SERVICES[service]
        if not isinstance(request, request_type):
            request = request_type.model_validate(request.model_dump())
        handler = getattr(self, f"_serve_{service}")
        response = handler(request)
        # same schema gate real responses pass through
        return response_type.model_validate(response.model_dump())

    def _fixture(self, service: str, image_id: str | None) -> FixtureImage:
        if image_id is None:
            raise BackendError("fake backend resolves images by image_id only",
                               service=service)
        image = self.fixtures.get(image_id)
        if image is None:
            raise BackendError(f"unknown image_id {image_id!r}", service=service,
                               image_id=image_id)
        return image

    def _serve_tags(self, request: TagsRequest) -> TagsResponse:
        image = self._fixture("tags", request.image_id)
        return TagsResponse(tags=[TagItem(label=label, confidence=conf)
                                  for label, conf in image.declared_tags])

    def _serve_caption(self, request: CaptionRequest) -> CaptionResponse:
        image = self._fixture("caption", request.image_id)
        return CaptionResponse(caption=image.declared_caption,
                               sentiment=image.declared_sentiment)

    def _serve_consequence(self, request: ConsequenceRequest) -> ConsequenceResponse:
        requested = set(request.keywords)
        seen = set()
        items = []
        for image in self.fixtures.images:
            for rule in image.consequence_map:
                if not set(rule.keywords) <= requested:
                    continue
                for phrase, score in rule.consequences:
                    if phrase in seen:
                        continue
                    seen.add(phrase)
                    items.append(ConsequenceItem(phrase=phrase, score=score))
        return ConsequenceResponse(consequences=items)

    def _serve_generate(self, request: GenerateRequest) -> GenerateResponse:
        return GenerateResponse(text=fill_template(request.keywords, request.model_id))

    def _serve_embed(self, request: EmbedRequest) -> EmbedResponse:
        if request.text is not None:
            tokens = words(request.text)
        else:
            image = self._fixture("embed", request.image_id)
            tokens = []
            for label, _conf in image.declared_tags:
                tokens.extend(words(label))
            tokens.extend(words(image.declared_caption))
        vector = fake_embed_tokens(tokens)
        return EmbedResponse(vector=vector, dim=EMBED_DIM)

    def _serve_nli(self, request: NliRequest) -> NliResponse:
        premise = words(request.premise)
        hypothesis = words(request.hypothesis)
        negation_delta = abs(self._count_negations(premise) - self._count_negations(hypothesis))
        pairs = set()
        for p in set(premise):
            for h in set(hypothesis):
                if p == h:
                    continue
                if h in self._antonym_pairs.get(p, ()):
                    pairs.add(frozenset((p, h)))
        contradict = min(1.0, NEGATION_WEIGHT * negation_delta + ANTONYM_WEIGHT * len(pairs))
        p_set, h_set = set(premise), set(hypothesis)
        union = p_set | h_set
        jaccard = len(p_set & h_set) / len(union) if union else 0.0
        entail = jaccard * (1.0 - contradict)
        neutral = 1.0 - contradict - entail
        return NliResponse(entail=entail, neutral=neutral, contradict=contradict)

    def _count_negations(self, tokens: list[str]) -> int:
        return sum(1 for t in tokens if t in self._negations or t.endswith("n't"))

    def _serve_ppl(self, request: PplRequest) -> PplResponse:
        mean_nll, token_count = self._lm.mean_nll(request.text)
        return PplResponse(mean_nll=mean_nll, token_count=token_count)
