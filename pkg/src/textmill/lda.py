"""Topic modelling: dictionary construction, bag-of-words corpus, and
LDA fitted by collapsed Gibbs sampling.

The sampler is bitwise deterministic for a given (corpus, config): topic
assignments are initialized from a seeded generator, each sweep pre-draws
one uniform per token position, and positions are scanned in a canonical
order (documents in corpus order, term ids ascending, counts expanded
consecutively). The conditional for a position is
p(z=k) proportional to (n_dk + alpha)(n_kw + beta)/(n_k + V*beta) with
the current token's counts excluded.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

__all__ = [
    "Dictionary",
    "BowDocument",
    "LdaConfig",
    "LdaModelState",
    "LoadedModel",
    "build_dictionary",
    "to_bow",
    "initialize_lda",
    "fit_lda",
    "perplexity",
    "save_model",
    "load_model",
]

MODEL_MAGIC = b"TMLM"
MODEL_FORMAT_VERSION = 1


@dataclass(frozen=True)
class Dictionary:
    id2word: tuple[str, ...]
    word2id: dict[str, int]
    doc_freq: dict[str, int]

    def __post_init__(self) -> None:
        if len(self.id2word) != len(self.word2id):
            raise ValueError("id2word and word2id must be the same size")
        for i, word in enumerate(self.id2word):
            if self.word2id.get(word) != i:
                raise ValueError("id2word and word2id are not mutual inverses")

    def __len__(self) -> int:
        return len(self.id2word)


@dataclass(frozen=True)
class BowDocument:
    doc_id: str
    pairs: tuple[tuple[int, int], ...]

    def __post_init__(self) -> None:
        previous = -1
        for term_id, count in self.pairs:
            if term_id <= previous:
                raise ValueError("term ids must be strictly increasing")
            if count < 1:
                raise ValueError("counts must be positive")
            previous = term_id

    @property
    def length(self) -> int:
        return sum(count for _, count in self.pairs)


@dataclass(frozen=True)
class LdaConfig:
    K: int = 5
    alpha: float | None = None
    beta: float = 0.01
    iterations: int = 1000
    burn_in: int = 100
    seed: int = 42
    average: bool = False

    def __post_init__(self) -> None:
        if self.K < 1:
            raise ValueError("K must be >= 1")
        if self.alpha is None:
            object.__setattr__(self, "alpha", 50.0 / self.K)
        if self.alpha <= 0 or self.beta <= 0:
            raise ValueError("alpha and beta must be > 0")
        if self.iterations <= self.burn_in:
            raise ValueError("iterations must exceed burn_in")
        if self.burn_in < 0:
            raise ValueError("burn_in must be >= 0")


@dataclass(frozen=True)
class LdaModelState:
    z: tuple[np.ndarray, ...]
    n_kw: np.ndarray
    n_dk: np.ndarray
    n_k: np.ndarray
    phi: np.ndarray
    theta: np.ndarray
    doc_ids: tuple[str, ...] = ()
    config: LdaConfig = field(default_factory=LdaConfig)

    def __post_init__(self) -> None:
        if not np.array_equal(self.n_kw.sum(axis=1), self.n_k):
            raise ValueError("topic-word counts inconsistent with topic totals")
        doc_lengths = np.array([len(assignments) for assignments in self.z])
        if not np.array_equal(self.n_dk.sum(axis=1), doc_lengths):
            raise ValueError("document-topic counts inconsistent with lengths")
        for rows, name in ((self.phi, "phi"), (self.theta, "theta")):
            if np.any(rows <= 0.0):
                raise ValueError(f"{name} must be strictly positive")
            if not np.allclose(rows.sum(axis=1), 1.0, atol=1e-9, rtol=0.0):
                raise ValueError(f"{name} rows must sum to 1")

    @property
    def doc_lengths(self) -> np.ndarray:
        return self.n_dk.sum(axis=1)

    @property
    def term_totals(self) -> np.ndarray:
        return self.n_kw.sum(axis=0)


@dataclass(frozen=True)
class LoadedModel:
    """Deserialized model: the distributions plus the corpus statistics
    needed to export visualization data."""

    config: LdaConfig
    id2word: tuple[str, ...]
    phi: np.ndarray
    theta: np.ndarray
    doc_ids: tuple[str, ...]
    doc_lengths: np.ndarray
    term_totals: np.ndarray


def build_dictionary(
    documents: list[list[str]],
    min_doc_freq: int = 1,
    max_doc_fraction: float = 1.0,
) -> Dictionary:
    """Assign contiguous ids (first-appearance order) to tokens that
    appear in at least min_doc_freq documents and in at most
    max_doc_fraction of them."""
    if not documents:
        raise ValueError("at least one document required")
    if min_doc_freq < 1:
        raise ValueError("min_doc_freq must be >= 1")
    if not 0.0 < max_doc_fraction <= 1.0:
        raise ValueError("max_doc_fraction must lie in (0, 1]")

    doc_freq: dict[str, int] = {}
    appearance: list[str] = []
    for tokens in documents:
        for token in dict.fromkeys(tokens):
            if token not in doc_freq:
                appearance.append(token)
                doc_freq[token] = 0
            doc_freq[token] += 1

    limit = max_doc_fraction * len(documents)
    kept = [t for t in appearance if min_doc_freq <= doc_freq[t] <= limit]
    if not kept:
        raise ValueError("empty vocabulary after filtering")
    return Dictionary(
        id2word=tuple(kept),
        word2id={t: i for i, t in enumerate(kept)},
        doc_freq={t: doc_freq[t] for t in kept},
    )


def to_bow(tokens: list[str], dictionary: Dictionary, doc_id: str = "") -> BowDocument:
    """Count in-dictionary tokens; unknown tokens are silently dropped."""
    counts: dict[int, int] = {}
    for token in tokens:
        term_id = dictionary.word2id.get(token)
        if term_id is not None:
            counts[term_id] = counts.get(term_id, 0) + 1
    return BowDocument(doc_id=doc_id, pairs=tuple(sorted(counts.items())))


def _expand_positions(
    corpus: list[BowDocument], vocab_size: int
) -> tuple[list[int], list[int]]:
    doc_of: list[int] = []
    word_of: list[int] = []
    for d, document in enumerate(corpus):
        for term_id, count in sorted(document.pairs):
            if term_id >= vocab_size:
                raise ValueError(
                    f"term id {term_id} outside vocabulary of size {vocab_size}"
                )
            doc_of.extend([d] * count)
            word_of.extend([term_id] * count)
    return doc_of, word_of


def _state_from_counts(
    z: list[int],
    n_kw: list[list[int]],
    n_dk: list[list[int]],
    n_k: list[int],
    corpus: list[BowDocument],
    config: LdaConfig,
    phi: np.ndarray | None = None,
    theta: np.ndarray | None = None,
) -> LdaModelState:
    n_kw_arr = np.array(n_kw, dtype=np.int64)
    n_dk_arr = np.array(n_dk, dtype=np.int64)
    n_k_arr = np.array(n_k, dtype=np.int64)
    vocab_size = n_kw_arr.shape[1]
    if phi is None:
        phi = (n_kw_arr + config.beta) / (n_k_arr[:, None] + vocab_size * config.beta)
    if theta is None:
        doc_lengths = n_dk_arr.sum(axis=1)
        theta = (n_dk_arr + config.alpha) / (
            doc_lengths[:, None] + config.K * config.alpha
        )
    per_doc: list[np.ndarray] = []
    cursor = 0
    for document in corpus:
        length = document.length
        per_doc.append(np.array(z[cursor : cursor + length], dtype=np.int64))
        cursor += length
    return LdaModelState(
        z=tuple(per_doc),
        n_kw=n_kw_arr,
        n_dk=n_dk_arr,
        n_k=n_k_arr,
        phi=phi,
        theta=theta,
        doc_ids=tuple(d.doc_id for d in corpus),
        config=config,
    )


def _initial_counts(
    corpus: list[BowDocument],
    vocab_size: int,
    config: LdaConfig,
    gen: np.random.Generator,
) -> tuple[list[int], list[int], list[int], list[list[int]], list[list[int]], list[int]]:
    doc_of, word_of = _expand_positions(corpus, vocab_size)
    z = [int(k) for k in gen.integers(0, config.K, size=len(doc_of))]
    n_kw = [[0] * vocab_size for _ in range(config.K)]
    n_dk = [[0] * config.K for _ in range(len(corpus))]
    n_k = [0] * config.K
    for pos, topic in enumerate(z):
        n_kw[topic][word_of[pos]] += 1
        n_dk[doc_of[pos]][topic] += 1
        n_k[topic] += 1
    return doc_of, word_of, z, n_kw, n_dk, n_k


def initialize_lda(
    corpus: list[BowDocument],
    dictionary: Dictionary,
    config: LdaConfig,
) -> LdaModelState:
    """The untrained model: seeded uniform-random topic assignments and
    the distributions they imply, before any Gibbs sweep. fit_lda starts
    from exactly this state for the same (corpus, config)."""
    if not corpus:
        raise ValueError("empty corpus")
    gen = np.random.Generator(np.random.PCG64(config.seed))
    doc_of, _, z, n_kw, n_dk, n_k = _initial_counts(corpus, len(dictionary), config, gen)
    return _state_from_counts(z, n_kw, n_dk, n_k, corpus, config)


def fit_lda(
    corpus: list[BowDocument],
    dictionary: Dictionary,
    config: LdaConfig,
    on_sweep: Callable[[int, np.ndarray, np.ndarray, np.ndarray], None] | None = None,
) -> LdaModelState:
    """Collapsed Gibbs sampling for `config.iterations` full sweeps.

    phi and theta are point estimates from the final sample; with
    config.average they are instead averaged over post-burn-in sweeps.
    `on_sweep`, if given, receives (sweep index, n_kw, n_dk, n_k) copies
    after every sweep.
    """
    if not corpus:
        raise ValueError("empty corpus")
    vocab_size = len(dictionary)
    gen = np.random.Generator(np.random.PCG64(config.seed))
    doc_of, word_of, z, n_kw, n_dk, n_k = _initial_counts(corpus, vocab_size, config, gen)

    total_positions = len(z)
    topics = config.K
    alpha = config.alpha
    beta = config.beta
    v_beta = vocab_size * beta
    phi_sum = np.zeros((topics, vocab_size)) if config.average else None
    theta_sum = np.zeros((len(corpus), topics)) if config.average else None
    averaged = 0

    for sweep in range(config.iterations):
        uniforms = gen.random(total_positions)
        for pos in range(total_positions):
            d = doc_of[pos]
            w = word_of[pos]
            old = z[pos]
            n_kw[old][w] -= 1
            n_dk[d][old] -= 1
            n_k[old] -= 1

            row_d = n_dk[d]
            total = 0.0
            cumulative = [0.0] * topics
            for t in range(topics):
                total += (row_d[t] + alpha) * (n_kw[t][w] + beta) / (n_k[t] + v_beta)
                cumulative[t] = total
            target = uniforms[pos] * total
            new = topics - 1
            for t in range(topics):
                if cumulative[t] > target:
                    new = t
                    break
            z[pos] = new
            n_kw[new][w] += 1
            n_dk[d][new] += 1
            n_k[new] += 1

        if on_sweep is not None:
            on_sweep(
                sweep,
                np.array(n_kw, dtype=np.int64),
                np.array(n_dk, dtype=np.int64),
                np.array(n_k, dtype=np.int64),
            )
        if config.average and sweep >= config.burn_in:
            n_kw_arr = np.array(n_kw, dtype=np.int64)
            n_dk_arr = np.array(n_dk, dtype=np.int64)
            n_k_arr = np.array(n_k, dtype=np.int64)
            phi_sum += (n_kw_arr + beta) / (n_k_arr[:, None] + v_beta)
            theta_sum += (n_dk_arr + alpha) / (
                n_dk_arr.sum(axis=1)[:, None] + topics * alpha
            )
            averaged += 1

    phi = theta = None
    if config.average and averaged:
        phi = phi_sum / averaged
        theta = theta_sum / averaged
    return _state_from_counts(z, n_kw, n_dk, n_k, corpus, config, phi, theta)


def perplexity(model: LdaModelState, corpus: list[BowDocument]) -> float:
    """exp(-sum count*ln(theta_d . phi[:,w]) / total token count), with
    documents matched to theta rows by corpus position."""
    if len(corpus) != model.theta.shape[0]:
        raise ValueError("corpus size does not match model document count")
    vocab_size = model.phi.shape[1]
    log_likelihood = 0.0
    tokens = 0
    for d, document in enumerate(corpus):
        for term_id, count in document.pairs:
            if term_id >= vocab_size:
                raise ValueError(
                    f"term id {term_id} outside vocabulary of size {vocab_size}"
                )
            p = float(model.theta[d] @ model.phi[:, term_id])
            log_likelihood += count * np.log(p)
            tokens += count
    if tokens == 0:
        return 1.0
    return float(np.exp(-log_likelihood / tokens))


def save_model(path: str | Path, model: LdaModelState, dictionary: Dictionary) -> None:
    """Single-file serialization: magic, version, JSON header, then phi
    and theta as little-endian float64. Round-trips bit-exactly."""
    phi = np.ascontiguousarray(model.phi, dtype="<f8")
    theta = np.ascontiguousarray(model.theta, dtype="<f8")
    header = {
        "format_version": MODEL_FORMAT_VERSION,
        "config": {
            "K": model.config.K,
            "alpha": model.config.alpha,
            "beta": model.config.beta,
            "iterations": model.config.iterations,
            "burn_in": model.config.burn_in,
            "seed": model.config.seed,
            "average": model.config.average,
        },
        "id2word": list(dictionary.id2word),
        "doc_ids": list(model.doc_ids),
        "doc_lengths": [int(x) for x in model.doc_lengths],
        "term_totals": [int(x) for x in model.term_totals],
        "phi_shape": list(phi.shape),
        "theta_shape": list(theta.shape),
    }
    blob = json.dumps(header, ensure_ascii=False).encode("utf-8")
    payload = (
        MODEL_MAGIC
        + len(blob).to_bytes(8, "little")
        + blob
        + phi.tobytes()
        + theta.tobytes()
    )
    target = Path(path)
    tmp = target.with_name(target.name + ".tmp")
    tmp.write_bytes(payload)
    os.replace(tmp, target)


def load_model(path: str | Path) -> LoadedModel:
    raw = Path(path).read_bytes()
    if raw[:4] != MODEL_MAGIC:
        raise ValueError("not a model file (bad magic)")
    header_len = int.from_bytes(raw[4:12], "little")
    header = json.loads(raw[12 : 12 + header_len].decode("utf-8"))
    if header["format_version"] != MODEL_FORMAT_VERSION:
        raise ValueError(f"unsupported model format version {header['format_version']}")
    offset = 12 + header_len
    phi_shape = tuple(header["phi_shape"])
    theta_shape = tuple(header["theta_shape"])
    phi_bytes = int(np.prod(phi_shape)) * 8
    phi = np.frombuffer(raw[offset : offset + phi_bytes], dtype="<f8").reshape(phi_shape)
    offset += phi_bytes
    theta_bytes = int(np.prod(theta_shape)) * 8
    theta = np.frombuffer(raw[offset : offset + theta_bytes], dtype="<f8").reshape(
        theta_shape
    )
    return LoadedModel(
        config=LdaConfig(**header["config"]),
        id2word=tuple(header["id2word"]),
        phi=phi,
        theta=theta,
        doc_ids=tuple(header["doc_ids"]),
        doc_lengths=np.array(header["doc_lengths"], dtype=np.int64),
        term_totals=np.array(header["term_totals"], dtype=np.int64),
    )
