"""Sentiment-lexicon and antonym-table parsing.

Two on-disk formats feed valence reversal:

* the standard 6-column sentiment-lexicon TSV
  (``POS<TAB>ID<TAB>PosScore<TAB>NegScore<TAB>SynsetTerms<TAB>Gloss``,
  ``#``-prefixed comment lines), where SynsetTerms is a space-separated
  list of ``word#rank`` forms;
* a 3-column antonym TSV (``lemma<TAB>pos<TAB>antonym``, no header,
  ``#`` comments allowed) produced offline from a lexical database.

Both load into an immutable :class:`Lexicon`; lookups on absent keys
return empty results rather than raising.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

from .errors import LexiconParseError

POS_TAGS = ("n", "v", "a", "r")

_SCORE_EPS = 1e-9


@dataclass(frozen=True)
class LexiconEntry:
    """One synset row: part of speech, id, polarity scores, member lemmas."""

    pos_tag: str
    synset_id: int
    pos_score: float
    neg_score: float
    lemmas: tuple[str, ...]


@dataclass(frozen=True)
class AntonymRow:
    lemma: str
    pos_tag: str
    antonym: str


class Lexicon:
    """Immutable lookup structure over sentiment entries and antonym rows.

    Entries are indexed by lemma and by (lemma, pos); antonym rows by
    (lemma, pos) in file order with duplicates removed.
    """

    def __init__(self, entries: list[LexiconEntry] | tuple[LexiconEntry, ...] = (),
                 antonym_rows: list[AntonymRow] | tuple[AntonymRow, ...] = ()):
        self._entries = tuple(entries)
        self._antonym_rows = tuple(antonym_rows)
        by_lemma: dict[str, list[LexiconEntry]] = {}
        by_lemma_pos: dict[tuple[str, str], list[LexiconEntry]] = {}
        for entry in self._entries:
            for lemma in entry.lemmas:
                by_lemma.setdefault(lemma, []).append(entry)
                by_lemma_pos.setdefault((lemma, entry.pos_tag), []).append(entry)
        antonyms: dict[tuple[str, str], list[str]] = {}
        for row in self._antonym_rows:
            bucket = antonyms.setdefault((row.lemma, row.pos_tag), [])
            if row.antonym not in bucket:
                bucket.append(row.antonym)
        self._by_lemma = by_lemma
        self._by_lemma_pos = by_lemma_pos
        self._antonyms = antonyms

    @property
    def entries(self) -> tuple[LexiconEntry, ...]:
        return self._entries

    @property
    def antonym_rows(self) -> tuple[AntonymRow, ...]:
        return self._antonym_rows

    def __len__(self) -> int:
        return len(self._entries)

    def _matches(self, word: str, pos_tag: str | None) -> list[LexiconEntry]:
        if pos_tag is None:
            return self._by_lemma.get(word, [])
        return self._by_lemma_pos.get((word, pos_tag), [])

    def has_entry(self, word: str, pos_tag: str | None = None) -> bool:
        return bool(self._matches(word, pos_tag))

    def negativity(self, word: str, pos_tag: str | None = None) -> float:
        """Maximum negative score over matching senses; 0 for absent words."""
        matches = self._matches(word, pos_tag)
        if not matches:
            return 0.0
        return max(entry.neg_score for entry in matches)

    def antonyms_for(self, word: str, pos_tag: str) -> list[str]:
        """Antonyms in file order, deduplicated; empty when none exist."""
        return list(self._antonyms.get((word, pos_tag), []))

    def with_antonyms(self, antonym_rows: list[AntonymRow] | tuple[AntonymRow, ...]) -> "Lexicon":
        return Lexicon(self._entries, antonym_rows)


def _data_lines(path: str) -> list[tuple[int, str]]:
    """Non-comment, non-blank lines of a lexicon file with 1-based numbers."""
    out = []
    with open(path, encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n").rstrip("\r")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            out.append((line_no, line))
    return out


def _parse_score(path: str, line_no: int, label: str, raw: str) -> float:
    try:
        value = float(raw)
    except ValueError:
        raise LexiconParseError(path, line_no, f"unparsable {label} {raw!r}") from None
    if math.isnan(value) or not 0.0 <= value <= 1.0:
        raise LexiconParseError(path, line_no, f"{label} {raw!r} outside [0, 1]")
    return value


def parse_sentiment_rows(path: str) -> list[LexiconEntry]:
    """Parse the 6-column sentiment TSV into entries, one per data line."""
    entries = []
    for line_no, line in _data_lines(path):
        fields = line.split("\t")
        if len(fields) != 6:
            raise LexiconParseError(path, line_no,
                                    f"expected 6 tab-separated columns, got {len(fields)}")
        pos_tag, synset_raw, pos_raw, neg_raw, terms_raw, _gloss = fields
        pos_tag = pos_tag.strip().lower()
        if pos_tag not in POS_TAGS:
            raise LexiconParseError(path, line_no, f"unknown pos tag {pos_tag!r}")
        try:
            synset_id = int(synset_raw)
        except ValueError:
            raise LexiconParseError(path, line_no, f"unparsable synset id {synset_raw!r}") from None
        pos_score = _parse_score(path, line_no, "PosScore", pos_raw)
        neg_score = _parse_score(path, line_no, "NegScore", neg_raw)
        if pos_score + neg_score > 1.0 + _SCORE_EPS:
            raise LexiconParseError(path, line_no,
                                    f"PosScore + NegScore = {pos_score + neg_score:g} exceeds 1")
        lemmas = []
        for term in terms_raw.split():
            lemma = term.rsplit("#", 1)[0] if "#" in term else term
            lemma = lemma.strip().lower()
            if lemma:
                lemmas.append(lemma)
        if not lemmas:
            raise LexiconParseError(path, line_no, "row has no lemmas")
        entries.append(LexiconEntry(pos_tag, synset_id, pos_score, neg_score, tuple(lemmas)))
    return entries


def parse_antonym_rows(path: str) -> list[AntonymRow]:
    """Parse the 3-column antonym TSV, keeping rows in file order."""
    rows = []
    for line_no, line in _data_lines(path):
        fields = line.split("\t")
        if len(fields) != 3:
            raise LexiconParseError(path, line_no,
                                    f"expected 3 tab-separated columns, got {len(fields)}")
        lemma, pos_tag, antonym = (f.strip().lower() for f in fields)
        if pos_tag not in POS_TAGS:
            raise LexiconParseError(path, line_no, f"unknown pos tag {pos_tag!r}")
        if not lemma or not antonym:
            raise LexiconParseError(path, line_no, "empty lemma or antonym")
        if any(ch.isspace() for ch in antonym):
            raise LexiconParseError(path, line_no,
                                    f"antonym {antonym!r} is not a single word")
        rows.append(AntonymRow(lemma, pos_tag, antonym))
    return rows


def load_sentiment_lexicon(path: str, antonyms_path: str | None = None) -> Lexicon:
    """Load the sentiment TSV (and optionally an antonym TSV) into a Lexicon."""
    entries = parse_sentiment_rows(path)
    rows = parse_antonym_rows(antonyms_path) if antonyms_path else []
    return Lexicon(entries, rows)


def bundled_lexicon_path() -> str:
    return str(resources.files("cmsg.data.lexicon") / "mini_sentiwordnet.tsv")


def bundled_antonyms_path() -> str:
    return str(resources.files("cmsg.data.lexicon") / "antonyms.tsv")


@lru_cache(maxsize=1)
def bundled_lexicon() -> Lexicon:
    """The mini lexicon + antonym table shipped with the package."""
    return load_sentiment_lexicon(bundled_lexicon_path(), bundled_antonyms_path())
