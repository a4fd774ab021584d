"""Latent-semantic-analysis summarizer: term-sentence matrix, truncated
SVD, and one-sentence-per-concept selection.

The SVD is a one-sided Jacobi iteration: it needs no randomized
initialization, so results are deterministic for a given input without
any seed plumbing. ``tol`` bounds the relative off-diagonal residual at
convergence.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .summarize import Summary
from .textproc import SentenceList, StopwordSet

__all__ = [
    "TermSentenceMatrix",
    "SvdFactors",
    "build_term_sentence_matrix",
    "truncated_svd",
    "select_sentences_lsa",
    "summarize_lsa",
]

DEFAULT_TOL = 1e-9
_MAX_SWEEPS = 60


@dataclass(frozen=True)
class TermSentenceMatrix:
    """Rows are terms in first-appearance order, columns are sentences."""

    terms: tuple[str, ...]
    sentence_count: int
    values: np.ndarray

    def __post_init__(self) -> None:
        if self.values.shape != (len(self.terms), self.sentence_count):
            raise ValueError("values shape does not match terms x sentences")
        if np.any(self.values < 0.0):
            raise ValueError("weights must be non-negative")
        if len(self.terms) and not np.all(np.any(self.values != 0.0, axis=1)):
            raise ValueError("all-zero term rows are not allowed")


@dataclass(frozen=True)
class SvdFactors:
    U: np.ndarray
    S: np.ndarray
    V: np.ndarray

    def __post_init__(self) -> None:
        k = len(self.S)
        if self.U.shape[1] != k or self.V.shape[1] != k:
            raise ValueError("factor column counts must equal len(S)")
        if np.any(np.diff(self.S) > 0.0):
            raise ValueError("singular values must be non-increasing")
        if np.any(self.S < 0.0):
            raise ValueError("singular values must be non-negative")
        for factor, name in ((self.U, "U"), (self.V, "V")):
            gram = factor.T @ factor
            if not np.allclose(gram, np.eye(k), atol=1e-6):
                raise ValueError(f"columns of {name} are not orthonormal")


def build_term_sentence_matrix(
    sentences: SentenceList,
    stopwords: StopwordSet,
    weighting: str = "tf",
) -> TermSentenceMatrix:
    """Count non-stopword terms per sentence (tf), optionally scaled by
    ln(n_sentences / sentence-frequency) (tfidf).

    Terms whose weights vanish everywhere (tfidf terms present in every
    sentence) are dropped; an entirely empty matrix is an error.
    """
    if weighting not in ("tf", "tfidf"):
        raise ValueError(f"unknown weighting: {weighting!r}")
    if len(sentences) == 0:
        raise ValueError("at least one sentence required")

    terms: list[str] = []
    slot: dict[str, int] = {}
    for sentence in sentences:
        for token in sentence.tokens:
            term = token.lower()
            if term in stopwords:
                continue
            if term not in slot:
                slot[term] = len(terms)
                terms.append(term)

    counts = np.zeros((len(terms), len(sentences)))
    for s, sentence in enumerate(sentences):
        for token in sentence.tokens:
            row = slot.get(token.lower())
            if row is not None:
                counts[row, s] += 1.0

    if weighting == "tfidf":
        doc_freq = (counts > 0).sum(axis=1)
        idf = np.log(len(sentences) / doc_freq)
        counts = counts * idf[:, None]

    keep = np.any(counts != 0.0, axis=1)
    counts = counts[keep]
    kept_terms = tuple(t for t, k in zip(terms, keep) if k)
    if not kept_terms:
        raise ValueError("empty matrix")
    return TermSentenceMatrix(
        terms=kept_terms, sentence_count=len(sentences), values=counts
    )


def _jacobi_svd(values: np.ndarray, tol: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """One-sided (Hestenes) Jacobi SVD: rotate column pairs of A until
    all columns are mutually orthogonal, accumulating the rotations in V.
    Column norms are then the singular values."""
    work = np.array(values, dtype=float)
    n = work.shape[1]
    v = np.eye(n)
    for _ in range(_MAX_SWEEPS):
        rotated = False
        for p in range(n - 1):
            for q in range(p + 1, n):
                app = float(work[:, p] @ work[:, p])
                aqq = float(work[:, q] @ work[:, q])
                apq = float(work[:, p] @ work[:, q])
                if app * aqq == 0.0 or abs(apq) <= tol * math.sqrt(app * aqq):
                    continue
                rotated = True
                tau = (aqq - app) / (2.0 * apq)
                t = math.copysign(1.0, tau) / (abs(tau) + math.sqrt(1.0 + tau * tau))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = c * t
                wp = work[:, p].copy()
                work[:, p] = c * wp - s * work[:, q]
                work[:, q] = s * wp + c * work[:, q]
                vp = v[:, p].copy()
                v[:, p] = c * vp - s * v[:, q]
                v[:, q] = s * vp + c * v[:, q]
        if not rotated:
            break
    singular = np.linalg.norm(work, axis=0)
    return work, singular, v


def _complete_column(u: np.ndarray, col: int) -> None:
    # Deterministic orthonormal completion for a (near-)zero singular
    # direction: orthogonalize canonical basis vectors against the
    # columns already placed.
    m = u.shape[0]
    for basis_index in range(m):
        candidate = np.zeros(m)
        candidate[basis_index] = 1.0
        for j in range(col):
            candidate -= (u[:, j] @ candidate) * u[:, j]
        norm = np.linalg.norm(candidate)
        if norm > 0.5:
            u[:, col] = candidate / norm
            return
    raise ValueError("cannot complete an orthonormal basis")


def truncated_svd(
    matrix: TermSentenceMatrix | np.ndarray,
    k: int,
    tol: float = DEFAULT_TOL,
) -> SvdFactors:
    """Top-k singular triplets of the term-sentence matrix.

    Raises when k exceeds min(rows, cols); near-zero singular directions
    get a deterministic orthonormal completion so U and V stay
    orthonormal even for rank-deficient inputs.
    """
    values = matrix.values if isinstance(matrix, TermSentenceMatrix) else np.asarray(matrix, dtype=float)
    m, n = values.shape
    bound = min(m, n)
    if not 1 <= k <= bound:
        raise ValueError(f"k must satisfy 1 <= k <= min(rows, cols) = {bound}")

    rotated, singular, v_full = _jacobi_svd(values, tol)
    order = np.argsort(-singular, kind="stable")[:k]
    s = singular[order]
    v = v_full[:, order]
    u = np.zeros((m, k))
    floor = (s[0] if s.size else 0.0) * 1e-12
    for j in range(k):
        if s[j] > floor and s[j] > 0.0:
            u[:, j] = rotated[:, order[j]] / s[j]
        else:
            _complete_column(u, j)
    return SvdFactors(U=u, S=s, V=v)


def select_sentences_lsa(
    factors: SvdFactors,
    sentences: SentenceList,
    n: int,
) -> Summary:
    """One sentence per latent concept: walk concepts in decreasing
    singular-value order and take the not-yet-selected sentence with the
    largest |V| loading (ties: lower index). When n exceeds the concept
    count the walk wraps around; when it exceeds the sentence count all
    sentences are returned and the summary is flagged short.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    total = len(sentences)
    k = factors.V.shape[1]
    target = min(n, total)
    picked: list[int] = []
    taken = set()
    concept = 0
    while len(picked) < target and k > 0:
        loadings = np.abs(factors.V[:, concept % k])
        best = -1.0
        best_index = -1
        for s in range(total):
            if s in taken:
                continue
            if loadings[s] > best:
                best = loadings[s]
                best_index = s
        picked.append(best_index)
        taken.add(best_index)
        concept += 1
    selected = tuple(sorted(picked))
    text = " ".join(sentences[i].text for i in selected)
    return Summary(
        selected=selected, text=text, method="lsa", n_requested=n, short=len(selected) < n
    )


def summarize_lsa(
    sentences: SentenceList,
    stopwords: StopwordSet,
    n: int,
    weighting: str = "tf",
    tol: float = DEFAULT_TOL,
) -> Summary:
    """Build the matrix, factor it, and select n sentences."""
    matrix = build_term_sentence_matrix(sentences, stopwords, weighting=weighting)
    k = min(n, len(matrix.terms), matrix.sentence_count)
    factors = truncated_svd(matrix, k, tol=tol)
    return select_sentences_lsa(factors, sentences, n)
