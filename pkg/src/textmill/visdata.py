"""Visualization quantities for the topic explorer: topic prevalence,
term relevance under the λ blend, term saliency, inter-topic
Jensen-Shannon distances with a classical-MDS 2-D projection, and the
visdata.json payload export.

Relevance is r = λ·ln φ[t,w] + (1−λ)·ln(φ[t,w]/p(w)) with the marginal
p(w) = Σ_t p(t)·φ[t,w]; λ=1 ranks by within-topic probability, λ=0 by
lift. Saliency is p(w) times the KL divergence of the term's topic
posterior from the topic prior, so saliencies sum to the mutual
information between the term and topic variables.
"""

from __future__ import annotations

import json
import os
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .lda import Dictionary, LdaModelState, LoadedModel

__all__ = [
    "TopicSummary",
    "TermRelevanceTable",
    "TopicCoordinates",
    "DEFAULT_R",
    "DEFAULT_LAMBDA_STEP",
    "DEFAULT_LAMBDA",
    "SCHEMA_VERSION",
    "topic_prevalence",
    "build_term_relevance",
    "term_relevance",
    "term_saliency",
    "topic_distances",
    "project_2d",
    "build_vis_payload",
    "export_vis_json",
]

DEFAULT_R = 30
DEFAULT_LAMBDA_STEP = 0.01
DEFAULT_LAMBDA = 0.48
SCHEMA_VERSION = 1
JSD_BOUND = float(np.log(2.0))


@dataclass(frozen=True)
class TopicSummary:
    prevalence: np.ndarray
    order: tuple[int, ...]

    def __post_init__(self) -> None:
        if np.any(self.prevalence < 0.0):
            raise ValueError("prevalence entries must be >= 0")
        if abs(float(self.prevalence.sum()) - 1.0) > 1e-9:
            raise ValueError("prevalence must sum to 1")
        expected = tuple(
            sorted(range(len(self.prevalence)), key=lambda k: (-self.prevalence[k], k))
        )
        if self.order != expected:
            raise ValueError("order must sort topics by decreasing prevalence")


@dataclass(frozen=True)
class TermRelevanceTable:
    logprob: np.ndarray
    loglift: np.ndarray
    marginal: np.ndarray
    freq: np.ndarray

    def __post_init__(self) -> None:
        rows = np.exp(self.logprob).sum(axis=1)
        if not np.allclose(rows, 1.0, atol=1e-6, rtol=0.0):
            raise ValueError("exp(logprob) rows must re-normalize to 1")
        expected = self.logprob - np.log(self.marginal)[None, :]
        if not np.allclose(self.loglift, expected, atol=1e-9, rtol=0.0):
            raise ValueError("loglift must equal logprob - ln p(w)")

    @property
    def topic_count(self) -> int:
        return self.logprob.shape[0]


@dataclass(frozen=True)
class TopicCoordinates:
    xy: np.ndarray

    def __post_init__(self) -> None:
        if self.xy.ndim != 2 or self.xy.shape[1] != 2:
            raise ValueError("coordinates must be K x 2")
        if len(self.xy) and np.any(np.abs(self.xy.mean(axis=0)) > 1e-9):
            raise ValueError("centroid must be at the origin")


def topic_prevalence(theta: np.ndarray, doc_lengths: np.ndarray) -> TopicSummary:
    """Length-weighted average of θ rows: prevalence[k] is the share of
    corpus tokens attributed to topic k."""
    theta = np.asarray(theta, dtype=float)
    lengths = np.asarray(doc_lengths, dtype=float)
    if theta.shape[0] != lengths.shape[0]:
        raise ValueError("theta rows must match doc_lengths")
    weights = (lengths[:, None] * theta).sum(axis=0) / lengths.sum()
    order = tuple(sorted(range(theta.shape[1]), key=lambda k: (-weights[k], k)))
    return TopicSummary(prevalence=weights, order=order)


def build_term_relevance(
    phi: np.ndarray, prevalence: TopicSummary, term_totals: np.ndarray
) -> TermRelevanceTable:
    """Tabulate ln φ and ln lift against the model-consistent marginal
    p(w) = Σ_t p(t)·φ[t,w]; corpus counts ride along for display."""
    phi = np.asarray(phi, dtype=float)
    marginal = prevalence.prevalence @ phi
    with np.errstate(divide="ignore"):
        logprob = np.log(phi)
        loglift = logprob - np.log(marginal)[None, :]
    return TermRelevanceTable(
        logprob=logprob,
        loglift=loglift,
        marginal=marginal,
        freq=np.asarray(term_totals),
    )


def term_relevance(table: TermRelevanceTable, topic: int, lam: float) -> list[int]:
    """Term ids sorted by decreasing λ-blended relevance for one topic;
    ties break toward the lower term id."""
    if not 0.0 <= lam <= 1.0:
        raise ValueError("lambda must lie in [0, 1]")
    if not 0 <= topic < table.topic_count:
        raise ValueError(f"topic index out of range: {topic}")
    blended = lam * table.logprob[topic] + (1.0 - lam) * table.loglift[topic]
    return sorted(range(blended.shape[0]), key=lambda w: (-blended[w], w))


def term_saliency(table: TermRelevanceTable, prevalence: TopicSummary) -> np.ndarray:
    """saliency(w) = p(w) · KL(p(t|w) ‖ p(t)), non-negative, summing to
    the term-topic mutual information."""
    phi = np.exp(table.logprob)
    p_t = prevalence.prevalence
    joint = p_t[:, None] * phi
    posterior = joint / table.marginal[None, :]
    prior = np.broadcast_to(p_t[:, None], posterior.shape)
    kl_terms = np.zeros_like(posterior)
    mask = posterior > 0.0
    kl_terms[mask] = posterior[mask] * np.log(posterior[mask] / prior[mask])
    return table.marginal * kl_terms.sum(axis=0)


def _jsd(p: np.ndarray, q: np.ndarray) -> float:
    mid = 0.5 * (p + q)

    def half(a: np.ndarray) -> float:
        mask = a > 0.0
        return float(np.sum(a[mask] * np.log(a[mask] / mid[mask])))

    return 0.5 * half(p) + 0.5 * half(q)


def topic_distances(phi: np.ndarray) -> np.ndarray:
    """Pairwise Jensen-Shannon divergences (natural log, bounded by
    ln 2) between topic-word rows."""
    phi = np.asarray(phi, dtype=float)
    k = phi.shape[0]
    out = np.zeros((k, k))
    for i in range(k):
        for j in range(i + 1, k):
            d = min(_jsd(phi[i], phi[j]), JSD_BOUND)
            out[i, j] = out[j, i] = d
    return out


def project_2d(distances: np.ndarray) -> TopicCoordinates:
    """Classical MDS: eigendecompose B = -½·J·D²·J and scale the top-2
    eigenvectors by the square roots of their (clamped) eigenvalues.
    Each eigenvector's first non-zero entry is made positive so the
    embedding is deterministic."""
    d = np.asarray(distances, dtype=float)
    k = d.shape[0]
    if k == 0:
        return TopicCoordinates(xy=np.zeros((0, 2)))
    centering = np.eye(k) - np.full((k, k), 1.0 / k)
    b = -0.5 * centering @ (d**2) @ centering
    b = 0.5 * (b + b.T)
    eigenvalues, eigenvectors = np.linalg.eigh(b)
    order = np.argsort(-eigenvalues, kind="stable")[:2]
    xy = np.zeros((k, 2))
    for axis, idx in enumerate(order):
        value = max(float(eigenvalues[idx]), 0.0)
        vector = eigenvectors[:, idx].copy()
        nonzero = np.nonzero(np.abs(vector) > 1e-12)[0]
        if nonzero.size and vector[nonzero[0]] < 0.0:
            vector = -vector
        xy[:, axis] = vector * np.sqrt(value)
    xy -= xy.mean(axis=0)
    return TopicCoordinates(xy=xy)


def _quantize(x: float) -> float:
    # Cap payload numbers at 12 significant digits.
    return float(f"{float(x):.12g}")


def build_vis_payload(
    model: LdaModelState | LoadedModel,
    dictionary: Dictionary,
    prevalence: TopicSummary,
    coordinates: TopicCoordinates,
    R: int = DEFAULT_R,
    lambda_step: float = DEFAULT_LAMBDA_STEP,
) -> dict:
    """Assemble the payload: one mds row per topic (display ids 1..K in
    prevalence order) and a tinfo table holding the top-R terms by
    saliency (Default category, freq = corpus count) plus each topic's
    top-R terms by λ=1 relevance (freq = estimated within-topic count)."""
    phi = np.asarray(model.phi, dtype=float)
    vocab_size = phi.shape[1]
    if R > vocab_size:
        warnings.warn(
            f"R={R} exceeds vocabulary size {vocab_size}; clamping", stacklevel=2
        )
        R = vocab_size
    table = build_term_relevance(phi, prevalence, model.term_totals)
    totals = np.asarray(model.term_totals, dtype=float)
    n_total = float(totals.sum())

    mds = []
    for display, topic in enumerate(prevalence.order, start=1):
        mds.append(
            {
                "id": display,
                "x": _quantize(coordinates.xy[topic, 0]),
                "y": _quantize(coordinates.xy[topic, 1]),
                "prevalence_pct": _quantize(100.0 * prevalence.prevalence[topic]),
            }
        )

    tinfo = []
    saliency = term_saliency(table, prevalence)
    default_terms = sorted(range(vocab_size), key=lambda w: (-saliency[w], w))[:R]
    for w in default_terms:
        tinfo.append(
            {
                "term": dictionary.id2word[w],
                "category": "Default",
                "freq": _quantize(totals[w]),
                "total": _quantize(totals[w]),
                "logprob": _quantize(table.logprob.max(axis=0)[w]),
                "loglift": _quantize(table.loglift.max(axis=0)[w]),
            }
        )
    for display, topic in enumerate(prevalence.order, start=1):
        p_topic = float(prevalence.prevalence[topic])
        for w in term_relevance(table, topic, 1.0)[:R]:
            tinfo.append(
                {
                    "term": dictionary.id2word[w],
                    "category": f"Topic{display}",
                    "freq": _quantize(phi[topic, w] * p_topic * n_total),
                    "total": _quantize(totals[w]),
                    "logprob": _quantize(table.logprob[topic, w]),
                    "loglift": _quantize(table.loglift[topic, w]),
                }
            )

    return {
        "schema_version": SCHEMA_VERSION,
        "lambda_step": _quantize(lambda_step),
        "R": R,
        "mds": mds,
        "tinfo": tinfo,
    }


def export_vis_json(
    path: str | Path,
    model: LdaModelState | LoadedModel,
    dictionary: Dictionary,
    prevalence: TopicSummary,
    coordinates: TopicCoordinates,
    R: int = DEFAULT_R,
    lambda_step: float = DEFAULT_LAMBDA_STEP,
) -> dict:
    """Write the payload as UTF-8 JSON (atomically) and return it."""
    payload = build_vis_payload(model, dictionary, prevalence, coordinates, R, lambda_step)
    target = Path(path)
    tmp = target.with_name(target.name + ".tmp")
    tmp.write_text(json.dumps(payload, ensure_ascii=False, indent=2) + "\n", "utf-8")
    os.replace(tmp, target)
    return payload
