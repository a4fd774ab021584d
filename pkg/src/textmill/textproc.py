"""Sentence segmentation, tokenization, stopword handling, and the
normalized word-frequency table that drives sentence scoring.

The frequency table maps each non-stopword token to its raw occurrence
count divided by the maximum raw count, so the most frequent token always
scores exactly 1.0.
"""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path

__all__ = [
    "Sentence",
    "SentenceList",
    "StopwordSet",
    "WordFrequencyTable",
    "split_sentences",
    "tokenize",
    "tokenize_sentences",
    "build_word_frequencies",
]

# A token is a maximal run of Unicode letters/digits, optionally chained
# by hyphens embedded between alphanumerics ("gene-disease" is one token,
# "ABL1," yields "ABL1").
_TOKEN_RE = re.compile(r"[^\W_]+(?:-[^\W_]+)*", re.UNICODE)

# Sentence terminator followed by whitespace and an uppercase opener, or
# by end of text.
_BOUNDARY_RE = re.compile(r"[.!?]+(?=\s+[\"'(]?[A-ZÀ-Þ]|\s*$)")

# Title abbreviations that end with '.' mid-sentence and must not split.
_ABBREVIATIONS = frozenset(
    {"dr", "mr", "mrs", "ms", "prof", "sr", "jr", "st", "vs", "fig", "eq", "al", "etc", "no"}
)

_WS_RE = re.compile(r"\s+")


@dataclass(frozen=True)
class Sentence:
    index: int
    text: str
    tokens: tuple[str, ...] = ()

    @property
    def word_count(self) -> int:
        return len(self.tokens)


@dataclass(frozen=True)
class SentenceList:
    sentences: tuple[Sentence, ...]

    def __len__(self) -> int:
        return len(self.sentences)

    def __iter__(self):
        return iter(self.sentences)

    def __getitem__(self, i: int) -> Sentence:
        return self.sentences[i]


@dataclass(frozen=True)
class StopwordSet:
    """Lowercase stopwords plus a tag recording where they came from."""

    words: frozenset[str]
    source: str = "builtin"

    def __post_init__(self) -> None:
        bad = [w for w in self.words if w != w.lower() or _WS_RE.search(w)]
        if bad:
            raise ValueError(f"stopwords must be lowercase with no whitespace: {bad[:5]!r}")

    def __contains__(self, word: str) -> bool:
        return word in self.words

    @classmethod
    def builtin(cls) -> "StopwordSet":
        text = resources.files("textmill.data").joinpath("stopwords_en.txt").read_text("utf-8")
        return cls(words=_parse_stopword_lines(text), source="builtin")

    @classmethod
    def from_file(cls, path: str | Path) -> "StopwordSet":
        """Load a stopword file: one word per line, UTF-8, '#' comments."""
        text = Path(path).read_text("utf-8")
        return cls(words=_parse_stopword_lines(text), source=str(path))


def _parse_stopword_lines(text: str) -> frozenset[str]:
    words = set()
    for line in text.splitlines():
        word = line.split("#", 1)[0].strip()
        if word:
            words.add(word.lower())
    return frozenset(words)


@dataclass(frozen=True)
class WordFrequencyTable:
    """Token -> max-normalized frequency in (0, 1], plus the raw counts.

    Invariants: the key sets of ``entries`` and ``raw_counts`` are equal,
    and when the table is non-empty the maximum entry is exactly 1.0.
    """

    entries: dict[str, float] = field(default_factory=dict)
    raw_counts: dict[str, int] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if set(self.entries) != set(self.raw_counts):
            raise ValueError("entries and raw_counts must share one key set")

    def __len__(self) -> int:
        return len(self.entries)

    def get(self, token: str, default: float = 0.0) -> float:
        return self.entries.get(token, default)

    def __contains__(self, token: str) -> bool:
        return token in self.entries


def split_sentences(text: str) -> SentenceList:
    """Split text into sentences at '.', '!' or '?' boundaries.

    A terminator only closes a sentence when followed by whitespace and an
    uppercase letter (or end of text), and not when it trails a known title
    abbreviation or a single uppercase initial ("Dr. Smith", "J. Smith").
    Whitespace inside each sentence is collapsed, so joining the sentence
    texts with single spaces reproduces the input modulo whitespace.
    """
    pieces: list[str] = []
    start = 0
    for match in _BOUNDARY_RE.finditer(text):
        if _is_guarded(text, match.start()):
            continue
        end = match.end()
        pieces.append(text[start:end])
        start = end
    tail = text[start:]
    if tail.strip():
        pieces.append(tail)

    sentences = []
    for piece in pieces:
        cleaned = _WS_RE.sub(" ", piece).strip()
        if cleaned:
            sentences.append(Sentence(index=len(sentences), text=cleaned))
    return SentenceList(sentences=tuple(sentences))


def _is_guarded(text: str, dot_pos: int) -> bool:
    # Word immediately before the terminator; guard single uppercase
    # initials and title abbreviations.
    head = text[:dot_pos]
    match = re.search(r"([^\W\d_]+)$", head, re.UNICODE)
    if not match:
        return False
    word = match.group(1)
    if len(word) == 1 and word.isupper():
        return True
    return word.lower() in _ABBREVIATIONS


def tokenize(text: str) -> list[str]:
    """Return maximal alphanumeric runs (hyphens kept when embedded).

    Case is preserved; everything that is not a letter, digit, or embedded
    hyphen separates tokens.
    """
    return _TOKEN_RE.findall(text)


def tokenize_sentences(sentences: SentenceList) -> SentenceList:
    """Fill each sentence's tokens via :func:`tokenize`."""
    return SentenceList(
        sentences=tuple(
            replace(s, tokens=tuple(tokenize(s.text))) for s in sentences
        )
    )


def build_word_frequencies(
    sentences: SentenceList,
    stopwords: StopwordSet,
    lowercase: bool = True,
) -> WordFrequencyTable:
    """Count non-stopword tokens and normalize by the maximum count.

    With ``lowercase`` (the default) tokens are folded before counting and
    before the stopword check. An input whose tokens are all filtered out
    yields an empty table; downstream scoring then produces no scores.
    """
    counts: Counter[str] = Counter()
    for sentence in sentences:
        for token in sentence.tokens:
            if token.lower() in stopwords:
                continue
            counts[token.lower() if lowercase else token] += 1
    if not counts:
        return WordFrequencyTable()
    freq_max = max(counts.values())
    entries = {token: count / freq_max for token, count in counts.items()}
    return WordFrequencyTable(entries=entries, raw_counts=dict(counts))
