"""Extractive summarization: frequency-accumulation sentence scores,
top-N selection with priority-queue semantics, and an alternative
cosine-similarity centrality ranker.

A sentence's score is the sum of the normalized frequencies of its
tokens that appear in the word-frequency table; only sentences shorter
than ``max_words`` tokens are scored at all. Selected sentences are
always emitted in document order.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field

import numpy as np

from .textproc import SentenceList, StopwordSet, WordFrequencyTable

__all__ = [
    "SentenceScoreTable",
    "Summary",
    "SimilarityMatrix",
    "CentralityRanking",
    "score_sentences",
    "select_top_n",
    "sentence_vectors",
    "similarity_matrix",
    "rank_by_centrality",
    "summarize_frequency",
    "summarize_centrality",
]

DEFAULT_MAX_WORDS = 30
DEFAULT_DAMPING = 0.85
DEFAULT_TOL = 1e-6
DEFAULT_MAX_ITER = 100


@dataclass(frozen=True)
class SentenceScoreTable:
    """Sentence index -> accumulated score; only sentences with
    word_count < max_words (and at least one in-table token) appear."""

    scores: dict[int, float] = field(default_factory=dict)
    max_words: int = DEFAULT_MAX_WORDS


@dataclass(frozen=True)
class Summary:
    selected: tuple[int, ...]
    text: str
    method: str
    n_requested: int
    short: bool = False

    def __post_init__(self) -> None:
        if any(b <= a for a, b in zip(self.selected, self.selected[1:])):
            raise ValueError("selected indices must be strictly increasing")


@dataclass(frozen=True)
class SimilarityMatrix:
    dim: int
    values: np.ndarray

    def __post_init__(self) -> None:
        if self.values.shape != (self.dim, self.dim):
            raise ValueError(f"expected {self.dim}x{self.dim}, got {self.values.shape}")
        if self.dim and not np.allclose(self.values, self.values.T, atol=1e-12, rtol=0.0):
            raise ValueError("similarity matrix must be symmetric")


@dataclass(frozen=True)
class CentralityRanking:
    """Sentence indices with stationary centrality scores, ordered by
    decreasing score (ties: lower index first). Scores sum to 1."""

    ranked: tuple[tuple[int, float], ...]
    converged: bool
    iterations: int

    def score_of(self, index: int) -> float:
        for i, score in self.ranked:
            if i == index:
                return score
        raise KeyError(index)


def _freq_lookup(freqs: WordFrequencyTable, token: str) -> float | None:
    """Table lookup honouring the table's casing: exact key first, then
    the lowercase fold used by the default table construction."""
    if token in freqs.entries:
        return freqs.entries[token]
    folded = token.lower()
    if folded in freqs.entries:
        return freqs.entries[folded]
    return None


def score_sentences(
    sentences: SentenceList,
    freqs: WordFrequencyTable,
    max_words: int = DEFAULT_MAX_WORDS,
) -> SentenceScoreTable:
    """Accumulate each eligible sentence's token frequencies.

    A sentence is scored only when its word count is strictly below
    ``max_words``; its first in-table token initializes the score and
    every further in-table token (repeats included) adds on. Sentences
    with no in-table token never initialize and are absent.
    """
    scores: dict[int, float] = {}
    for sentence in sentences:
        if sentence.word_count >= max_words:
            continue
        total = None
        for token in sentence.tokens:
            value = _freq_lookup(freqs, token)
            if value is None:
                continue
            total = value if total is None else total + value
        if total is not None:
            scores[sentence.index] = total
    return SentenceScoreTable(scores=scores, max_words=max_words)


def select_top_n(
    scores: SentenceScoreTable,
    sentences: SentenceList,
    n: int,
    method: str = "frequency",
) -> Summary:
    """Pick the n highest-scoring sentences and emit them in document
    order. Equal scores favour the lower sentence index. When fewer than
    n sentences are eligible the summary is flagged short.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    top = heapq.nlargest(n, scores.scores.items(), key=lambda kv: (kv[1], -kv[0]))
    selected = tuple(sorted(index for index, _ in top))
    text = " ".join(sentences[i].text for i in selected)
    return Summary(
        selected=selected,
        text=text,
        method=method,
        n_requested=n,
        short=len(selected) < n,
    )


def sentence_vectors(
    sentences: SentenceList,
    vocabulary: list[str],
    embeddings: dict[str, np.ndarray] | None = None,
) -> list[np.ndarray]:
    """Mean-of-word-vectors sentence representation.

    Default scheme: each token maps to its one-hot vocabulary vector
    (out-of-vocabulary tokens map to the zero vector) and the sentence
    vector is the mean over all its tokens, i.e. the term-frequency
    vector scaled by 1/word_count. With ``embeddings``, the sentence
    vector is the mean of the available token embeddings; a sentence
    with none available maps to the zero vector.
    """
    if not vocabulary:
        raise ValueError("vocabulary must be non-empty")
    if embeddings is not None:
        dim = len(next(iter(embeddings.values())))
        out = []
        for sentence in sentences:
            hits = [embeddings[t] for t in sentence.tokens if t in embeddings]
            if hits:
                out.append(np.mean(np.asarray(hits, dtype=float), axis=0))
            else:
                out.append(np.zeros(dim))
        return out

    slot = {token: j for j, token in enumerate(vocabulary)}
    out = []
    for sentence in sentences:
        vec = np.zeros(len(vocabulary))
        for token in sentence.tokens:
            j = slot.get(token)
            if j is not None:
                vec[j] += 1.0
        if sentence.word_count:
            vec /= sentence.word_count
        out.append(vec)
    return out


def similarity_matrix(vectors: list[np.ndarray]) -> SimilarityMatrix:
    """Pairwise cosine similarities; pairs involving a zero vector get 0
    (including that vector's diagonal entry)."""
    n = len(vectors)
    if n == 0:
        return SimilarityMatrix(dim=0, values=np.zeros((0, 0)))
    dims = {len(v) for v in vectors}
    if len(dims) != 1:
        raise ValueError(f"vectors have mixed dimensions: {sorted(dims)}")

    stacked = np.asarray(vectors, dtype=float)
    norms = np.linalg.norm(stacked, axis=1)
    nonzero = norms > 0.0
    unit = np.zeros_like(stacked)
    unit[nonzero] = stacked[nonzero] / norms[nonzero, None]

    gram = unit @ unit.T
    # Mirror the upper triangle so symmetry is exact, then pin the
    # diagonal and clamp float overshoot.
    gram = np.triu(gram) + np.triu(gram, 1).T
    np.fill_diagonal(gram, np.where(nonzero, 1.0, 0.0))
    gram = np.clip(gram, -1.0, 1.0)
    return SimilarityMatrix(dim=n, values=gram)


def rank_by_centrality(
    matrix: SimilarityMatrix,
    damping: float = DEFAULT_DAMPING,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> CentralityRanking:
    """Damped power iteration over the row-normalized similarity graph.

    Rows that sum to zero redistribute uniformly. Iteration starts from
    the uniform vector and stops when successive iterates differ by less
    than ``tol`` in max-norm, or after ``max_iter`` sweeps with the
    convergence flag cleared. Scores are normalized to sum to 1.
    """
    if not 0.0 < damping < 1.0:
        raise ValueError("damping must lie in (0, 1)")
    n = matrix.dim
    if n == 0:
        return CentralityRanking(ranked=(), converged=True, iterations=0)

    row_sums = matrix.values.sum(axis=1)
    transition = np.full((n, n), 1.0 / n)
    live = row_sums > 0.0
    transition[live] = matrix.values[live] / row_sums[live, None]

    rank = np.full(n, 1.0 / n)
    converged = False
    iterations = 0
    for iterations in range(1, max_iter + 1):
        updated = (1.0 - damping) / n + damping * (transition.T @ rank)
        delta = np.max(np.abs(updated - rank))
        rank = updated
        if delta < tol:
            converged = True
            break
    rank = rank / rank.sum()

    order = sorted(range(n), key=lambda i: (-rank[i], i))
    ranked = tuple((i, float(rank[i])) for i in order)
    return CentralityRanking(ranked=ranked, converged=converged, iterations=iterations)


def summarize_frequency(
    sentences: SentenceList,
    freqs: WordFrequencyTable,
    n: int,
    max_words: int = DEFAULT_MAX_WORDS,
) -> Summary:
    """Frequency-accumulation summary: score, then take the top n."""
    scores = score_sentences(sentences, freqs, max_words=max_words)
    return select_top_n(scores, sentences, n, method="frequency")


def summarize_centrality(
    sentences: SentenceList,
    n: int,
    stopwords: StopwordSet | None = None,
    damping: float = DEFAULT_DAMPING,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> Summary:
    """Centrality summary: rank every sentence on the cosine-similarity
    graph and take the top n."""
    if n < 1:
        raise ValueError("n must be >= 1")
    exclude = stopwords.words if stopwords is not None else frozenset()
    vocabulary = sorted(
        {t for s in sentences for t in s.tokens if t.lower() not in exclude}
    )
    if not sentences or not vocabulary:
        return Summary(selected=(), text="", method="centrality", n_requested=n, short=True)
    vectors = sentence_vectors(sentences, vocabulary)
    ranking = rank_by_centrality(
        similarity_matrix(vectors), damping=damping, tol=tol, max_iter=max_iter
    )
    top = [index for index, _ in ranking.ranked[:n]]
    selected = tuple(sorted(top))
    text = " ".join(sentences[i].text for i in selected)
    return Summary(
        selected=selected,
        text=text,
        method="centrality",
        n_requested=n,
        short=len(selected) < n,
    )
