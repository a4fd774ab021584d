"""ROUGE summary-evaluation metrics.

Implements ROUGE-N (n-gram clipped overlap), ROUGE-L (longest common
subsequence), ROUGE-W (weighted LCS with consecutive-run credit k^w),
ROUGE-S (skip-bigrams) and ROUGE-SU (skip-bigrams plus unigrams), each
reporting recall (overlap / reference units), precision (overlap /
system units) and F1, plus percentile-bootstrap confidence intervals
over evaluation pairs.

Evaluation tokenization is deliberately simpler than the pipeline
tokenizer: lowercase, split on every non-alphanumeric character (so
hyphens separate), and count tokens as one contiguous stream across
sentence boundaries.
"""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass

import numpy as np

__all__ = [
    "EvalTokenSequence",
    "RougeScore",
    "ConfidenceInterval",
    "DEFAULT_VARIANTS",
    "eval_tokenize",
    "rouge_n",
    "rouge_l",
    "rouge_w",
    "rouge_s",
    "rouge_su",
    "score_variant",
    "aggregate_max",
    "bootstrap_ci",
]

DEFAULT_VARIANTS = (
    "rouge-1",
    "rouge-2",
    "rouge-3",
    "rouge-4",
    "rouge-l",
    "rouge-w-1.2",
    "rouge-s*",
    "rouge-su*",
)

_SEPARATOR_RE = re.compile(r"(?:[^\w]|_)+", re.UNICODE)


@dataclass(frozen=True)
class EvalTokenSequence:
    """Lowercase token stream, contiguous across sentence boundaries."""

    tokens: tuple[str, ...]

    def __post_init__(self) -> None:
        if any(not t or _SEPARATOR_RE.search(t) for t in self.tokens):
            raise ValueError("tokens must be non-empty and alphanumeric")

    def __len__(self) -> int:
        return len(self.tokens)


@dataclass(frozen=True)
class RougeScore:
    variant: str
    recall: float
    precision: float
    f1: float
    ci_low: float | None = None
    ci_high: float | None = None
    level: float = 0.95

    def __post_init__(self) -> None:
        for name in ("recall", "precision", "f1"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} out of [0, 1]: {value}")
        expected = _f1(self.recall, self.precision)
        if abs(self.f1 - expected) > 1e-9:
            raise ValueError(f"f1 {self.f1} inconsistent with R/P (expected {expected})")
        if self.ci_low is not None and self.ci_high is not None:
            if not self.ci_low <= self.f1 <= self.ci_high:
                raise ValueError("f1 must lie inside its confidence interval")


@dataclass(frozen=True)
class ConfidenceInterval:
    low: float
    high: float
    level: float
    degenerate: bool = False


def eval_tokenize(text: str) -> EvalTokenSequence:
    """Lowercase and split on every non-alphanumeric character."""
    tokens = tuple(t for t in _SEPARATOR_RE.split(text.lower()) if t)
    return EvalTokenSequence(tokens=tokens)


def _f1(recall: float, precision: float) -> float:
    if recall + precision == 0.0:
        return 0.0
    return 2.0 * recall * precision / (recall + precision)


def _score(variant: str, overlap: float, ref_units: float, sys_units: float) -> RougeScore:
    recall = overlap / ref_units if ref_units else 0.0
    precision = overlap / sys_units if sys_units else 0.0
    return RougeScore(
        variant=variant, recall=recall, precision=precision, f1=_f1(recall, precision)
    )


def _ngram_counts(tokens: tuple[str, ...], n: int) -> Counter:
    return Counter(tokens[i : i + n] for i in range(len(tokens) - n + 1))


def _clipped_overlap(reference: Counter, system: Counter) -> int:
    return sum(min(count, system[gram]) for gram, count in reference.items())


def rouge_n(system: EvalTokenSequence, reference: EvalTokenSequence, n: int) -> RougeScore:
    """Clipped n-gram multiset overlap; n-grams span sentence boundaries."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if len(reference) < n:
        raise ValueError("reference too short")
    ref_grams = _ngram_counts(reference.tokens, n)
    sys_grams = _ngram_counts(system.tokens, n)
    overlap = _clipped_overlap(ref_grams, sys_grams)
    return _score(f"rouge-{n}", overlap, sum(ref_grams.values()), sum(sys_grams.values()))


def _lcs_length(a: tuple[str, ...], b: tuple[str, ...]) -> int:
    # Two-row DP keeps memory linear in |b|.
    prev = [0] * (len(b) + 1)
    for x in a:
        cur = [0]
        for j, y in enumerate(b):
            cur.append(prev[j] + 1 if x == y else max(prev[j + 1], cur[j]))
        prev = cur
    return prev[-1]


def rouge_l(system: EvalTokenSequence, reference: EvalTokenSequence) -> RougeScore:
    """Longest common subsequence of the two full token streams."""
    if not len(system) or not len(reference):
        raise ValueError("both sequences must be non-empty")
    lcs = _lcs_length(reference.tokens, system.tokens)
    return _score("rouge-l", lcs, len(reference), len(system))


def _prune_frontier(states: list[tuple[float, int]]) -> list[tuple[float, int]]:
    # Keep Pareto-optimal (credit, run) states: with a convex weight
    # function, a state is worth keeping unless another has both credit
    # and run at least as large.
    best_per_run: dict[int, float] = {}
    for credit, run in states:
        if credit > best_per_run.get(run, -1.0):
            best_per_run[run] = credit
    pruned: list[tuple[float, int]] = []
    top = -1.0
    for run in sorted(best_per_run, reverse=True):
        credit = best_per_run[run]
        if credit > top:
            pruned.append((credit, run))
            top = credit
    return pruned


def _wlcs(a: tuple[str, ...], b: tuple[str, ...], weight: float) -> float:
    """Exact maximum weighted common-subsequence credit, where each
    maximal consecutive-match run of length k earns k^weight.

    The single-candidate run recursion is not optimal for convex weights
    (a shorter-credit chain with a longer live run can overtake later),
    so each cell keeps the Pareto frontier of (stopped credit, live run)
    states for chains ending at that match. New runs branch from the
    best stopped credit over the strict prefix rectangle.
    """
    m, n = len(a), len(b)
    # ending[j]: frontier of (credit if stopped, live run) for chains
    # whose last match is (current row, j). prefix[j]: best stopped
    # credit over all cells (i' <= current row, j' <= j).
    ending: list[list[tuple[float, int]]] = [[] for _ in range(n)]
    prefix = [0.0] * (n + 1)
    best = 0.0
    for i in range(m):
        new_ending: list[list[tuple[float, int]]] = [[] for _ in range(n)]
        new_prefix = [0.0] * (n + 1)
        for j in range(n):
            if a[i] == b[j]:
                states = [(prefix[j] + 1.0, 1)]
                if i > 0 and j > 0:
                    states.extend(
                        (credit - run**weight + (run + 1) ** weight, run + 1)
                        for credit, run in ending[j - 1]
                    )
                frontier = _prune_frontier(states)
                new_ending[j] = frontier
                cell_best = frontier[-1][0]
                best = max(best, cell_best)
            else:
                cell_best = 0.0
            new_prefix[j + 1] = max(new_prefix[j], prefix[j + 1], cell_best)
        ending, prefix = new_ending, new_prefix
    return best


def rouge_w(
    system: EvalTokenSequence, reference: EvalTokenSequence, weight: float = 1.2
) -> RougeScore:
    """Weighted LCS: consecutive-match runs earn length^weight credit;
    recall = (WLCS / |reference|^weight)^(1/weight), precision likewise
    over the system length."""
    if weight <= 1.0:
        raise ValueError("weight must be > 1")
    if not len(system) or not len(reference):
        raise ValueError("both sequences must be non-empty")
    wlcs = _wlcs(reference.tokens, system.tokens, weight)
    inv = 1.0 / weight
    recall = (wlcs / len(reference) ** weight) ** inv
    precision = (wlcs / len(system) ** weight) ** inv
    return RougeScore(
        variant=f"rouge-w-{weight:g}",
        recall=recall,
        precision=precision,
        f1=_f1(recall, precision),
    )


def _skip_bigrams(tokens: tuple[str, ...], max_skip: int | None) -> Counter:
    # Pair (i, j) qualifies when at most max_skip tokens sit between the
    # two; max_skip None means unlimited ('*'), max_skip 0 means plain
    # bigrams.
    counts: Counter = Counter()
    for i in range(len(tokens)):
        stop = len(tokens) if max_skip is None else min(len(tokens), i + max_skip + 2)
        for j in range(i + 1, stop):
            counts[(tokens[i], tokens[j])] += 1
    return counts


def rouge_s(
    system: EvalTokenSequence, reference: EvalTokenSequence, max_skip: int | None = None
) -> RougeScore:
    """Skip-bigram overlap: ordered in-order token pairs."""
    if len(reference) < 2:
        raise ValueError("reference must have at least 2 tokens")
    ref_pairs = _skip_bigrams(reference.tokens, max_skip)
    sys_pairs = _skip_bigrams(system.tokens, max_skip)
    overlap = _clipped_overlap(ref_pairs, sys_pairs)
    tag = "rouge-s*" if max_skip is None else f"rouge-s{max_skip}"
    return _score(tag, overlap, sum(ref_pairs.values()), sum(sys_pairs.values()))


def rouge_su(
    system: EvalTokenSequence, reference: EvalTokenSequence, max_skip: int | None = None
) -> RougeScore:
    """Skip-bigrams plus unigrams added to both multisets."""
    if len(reference) < 2:
        raise ValueError("reference must have at least 2 tokens")
    ref_units = _skip_bigrams(reference.tokens, max_skip)
    sys_units = _skip_bigrams(system.tokens, max_skip)
    ref_units.update({(t,): c for t, c in Counter(reference.tokens).items()})
    sys_units.update({(t,): c for t, c in Counter(system.tokens).items()})
    overlap = _clipped_overlap(ref_units, sys_units)
    tag = "rouge-su*" if max_skip is None else f"rouge-su{max_skip}"
    return _score(tag, overlap, sum(ref_units.values()), sum(sys_units.values()))


_VARIANT_RE = re.compile(r"^rouge-(?:(?P<n>[1-9])|l|w-(?P<w>[\d.]+)|s(?P<ss>\*|\d+)|su(?P<su>\*|\d+))$")


def score_variant(
    variant: str, system: EvalTokenSequence, reference: EvalTokenSequence
) -> RougeScore:
    """Dispatch a variant tag like 'rouge-2', 'rouge-l', 'rouge-w-1.2',
    'rouge-s*', or 'rouge-su4' to its scoring function."""
    match = _VARIANT_RE.match(variant.lower())
    if not match:
        raise ValueError(f"unknown ROUGE variant: {variant!r}")
    if match.group("n"):
        return rouge_n(system, reference, int(match.group("n")))
    if match.group("w"):
        return rouge_w(system, reference, float(match.group("w")))
    if match.group("ss"):
        skip = None if match.group("ss") == "*" else int(match.group("ss"))
        return rouge_s(system, reference, skip)
    if match.group("su"):
        skip = None if match.group("su") == "*" else int(match.group("su"))
        return rouge_su(system, reference, skip)
    return rouge_l(system, reference)


def aggregate_max(per_reference: list[RougeScore]) -> RougeScore:
    """Multi-reference aggregation: keep the per-reference score with the
    highest F1 (ties favour the earlier reference)."""
    if not per_reference:
        raise ValueError("no scores to aggregate")
    best = per_reference[0]
    for score in per_reference[1:]:
        if score.f1 > best.f1:
            best = score
    return best


def bootstrap_ci(
    per_pair_scores: list[RougeScore],
    level: float = 0.95,
    resamples: int = 1000,
    seed: int | None = None,
) -> dict[str, ConfidenceInterval]:
    """Percentile bootstrap over (system, reference) pairs.

    Resamples the pair set with replacement, takes the mean of each
    metric per resample, and reports the central ``level`` percentile
    interval. A single pair degenerates to a zero-width interval at the
    point estimate, flagged as such.
    """
    if not per_pair_scores:
        raise ValueError("bootstrap requires at least one score")
    if not 0.0 < level < 1.0:
        raise ValueError("level must lie strictly between 0 and 1")

    values = np.array(
        [[s.recall, s.precision, s.f1] for s in per_pair_scores], dtype=float
    )
    names = ("recall", "precision", "f1")
    n = len(per_pair_scores)
    if n == 1:
        return {
            name: ConfidenceInterval(
                low=float(values[0, k]),
                high=float(values[0, k]),
                level=level,
                degenerate=True,
            )
            for k, name in enumerate(names)
        }

    gen = np.random.Generator(np.random.PCG64(seed))
    draws = gen.integers(0, n, size=(resamples, n))
    means = values[draws].mean(axis=1)
    lo_q = 100.0 * (1.0 - level) / 2.0
    hi_q = 100.0 - lo_q
    bounds = np.percentile(means, [lo_q, hi_q], axis=0)
    return {
        name: ConfidenceInterval(
            low=float(bounds[0, k]), high=float(bounds[1, k]), level=level
        )
        for k, name in enumerate(names)
    }
