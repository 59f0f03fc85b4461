"""Valence reversal: flip evaluative-negative caption words to antonyms.

A deterministic rule tagger assigns coarse part-of-speech codes, the
sentiment lexicon flags strongly negative words, and each flagged word is
replaced by its first table antonym. Captions without negative sentiment
pass through unchanged.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

from .errors import InvalidInputError
from .lexicon import Lexicon

OPEN_CLASS = ("n", "v", "a", "r")
OTHER = "other"

DEFAULT_TAU = 0.5

_TOKEN_RE = re.compile(r"[A-Za-z0-9_']+|[^\sA-Za-z0-9_']+")

# suffix heuristics skip very short words ("day", "bed", "king")
_MIN_LY = 4
_MIN_ED = 4
_MIN_ING = 6
_MIN_Y = 4
_ADJ_SUFFIXES = ("ous", "ful", "ive")


@dataclass(frozen=True)
class Token:
    surface: str
    lower: str
    pos_tag: str
    index: int


@dataclass(frozen=True)
class RtvResult:
    """Outcome of reversing a caption's valence.

    ``first_sentence`` keeps the input's token count; ``advisory`` lists
    negative words left in place (no antonym) and replacements that are
    themselves still negative.
    """

    first_sentence: str
    substitutions: tuple[tuple[int, str, str], ...] = ()
    changed: bool = False
    advisory: tuple[str, ...] = ()


def _read_wordlist(name: str) -> frozenset[str]:
    text = (resources.files("cmsg.data.wordlists") / name).read_text(encoding="utf-8")
    words = set()
    for line in text.splitlines():
        word = line.strip().lower()
        if word and not word.startswith("#"):
            words.add(word)
    return frozenset(words)


class RuleTagger:
    """Deterministic part-of-speech tagger over word lists and suffixes.

    Rules, in order: tokens without letters and closed-class words map to
    ``other``; adjective- and verb-list membership wins next; then the
    suffix heuristics -ly (adverb), -ing/-ed (verb), -ous/-ful/-ive/-y
    (adjective); everything else is a noun.
    """

    def __init__(self, closed_class: frozenset[str], adjectives: frozenset[str],
                 verbs: frozenset[str]):
        self.closed_class = closed_class
        self.adjectives = adjectives
        self.verbs = verbs

    def tag_word(self, lower: str) -> str:
        if not any(ch.isalpha() for ch in lower):
            return OTHER
        if lower in self.closed_class:
            return OTHER
        if lower in self.adjectives:
            return "a"
        if lower in self.verbs:
            return "v"
        if lower.endswith("ly") and len(lower) >= _MIN_LY:
            return "r"
        if lower.endswith("ing") and len(lower) >= _MIN_ING:
            return "v"
        if lower.endswith("ed") and len(lower) >= _MIN_ED:
            return "v"
        if lower.endswith(_ADJ_SUFFIXES) and len(lower) >= _MIN_Y:
            return "a"
        if lower.endswith("y") and len(lower) >= _MIN_Y:
            return "a"
        return "n"

    def tag(self, sentence: str) -> list[Token]:
        if not sentence or not sentence.strip():
            raise InvalidInputError("cannot tag an empty sentence")
        tokens = []
        for index, match in enumerate(_TOKEN_RE.finditer(sentence)):
            surface = match.group()
            lower = surface.lower()
            tokens.append(Token(surface, lower, self.tag_word(lower), index))
        if not tokens:
            raise InvalidInputError("cannot tag an empty sentence")
        return tokens


@lru_cache(maxsize=1)
def bundled_tagger() -> RuleTagger:
    return RuleTagger(
        closed_class=_read_wordlist("closed_class.txt"),
        adjectives=_read_wordlist("adjectives.txt"),
        verbs=_read_wordlist("verbs.txt"),
    )


@lru_cache(maxsize=1)
def bundled_stopwords() -> frozenset[str]:
    return _read_wordlist("stopwords.txt")


def tag_pos(sentence: str, tagger: RuleTagger | None = None) -> list[Token]:
    """Tokenize on whitespace/punctuation boundaries and tag each token."""
    return (tagger or bundled_tagger()).tag(sentence)


def normalize(tokens: list[Token]) -> str:
    """Lowercased tokens joined by single spaces."""
    return " ".join(t.lower for t in tokens)


def identify_evaluative(tokens: list[Token], lex: Lexicon, tau: float) -> list[int]:
    """Indices of open-class tokens whose lexicon negativity reaches tau.

    Only in-lexicon words qualify, so tau = 0 never flags unknown words.
    """
    if not 0.0 <= tau <= 1.0:
        raise InvalidInputError(f"tau must lie in [0, 1], got {tau!r}")
    hits = []
    for token in tokens:
        if token.pos_tag not in OPEN_CLASS:
            continue
        if not lex.has_entry(token.lower, token.pos_tag):
            continue
        if lex.negativity(token.lower, token.pos_tag) >= tau:
            hits.append(token.index)
    return hits


def reverse_valence(caption: str, lex: Lexicon, tau: float = DEFAULT_TAU,
                    tagger: RuleTagger | None = None) -> RtvResult:
    """Replace each strongly negative word with its first table antonym.

    Words with no antonym stay in place and are reported in ``advisory``;
    a replacement whose own negativity still reaches tau is reported too.
    A caption with no qualifying word passes through unchanged
    (``changed`` is false and the text is only normalized).
    """
    tokens = tag_pos(caption, tagger)
    lowers = [t.lower for t in tokens]
    substitutions = []
    advisory = []
    for index in identify_evaluative(tokens, lex, tau):
        token = tokens[index]
        antonyms = lex.antonyms_for(token.lower, token.pos_tag)
        if not antonyms:
            advisory.append(token.lower)
            continue
        replacement = antonyms[0]
        lowers[index] = replacement
        substitutions.append((index, token.lower, replacement))
        if lex.negativity(replacement, token.pos_tag) >= tau:
            advisory.append(replacement)
    return RtvResult(
        first_sentence=" ".join(lowers),
        substitutions=tuple(substitutions),
        changed=bool(substitutions),
        advisory=tuple(advisory),
    )
