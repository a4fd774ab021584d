"""Tests for the LSA summarizer: matrix construction, truncated SVD
against a dense oracle, and concept-based sentence selection."""

from __future__ import annotations

import numpy as np
import pytest

from textmill.lsa import (
    SvdFactors,
    TermSentenceMatrix,
    build_term_sentence_matrix,
    select_sentences_lsa,
    summarize_lsa,
    truncated_svd,
)
from textmill.textproc import (
    Sentence,
    SentenceList,
    StopwordSet,
    tokenize_sentences,
)

NO_STOPWORDS = StopwordSet(frozenset())


def _sentences(*texts: str) -> SentenceList:
    return tokenize_sentences(
        SentenceList(tuple(Sentence(index=i, text=t) for i, t in enumerate(texts)))
    )


class TestBuildMatrix:
    def test_tf_hand_count(self):
        m = build_term_sentence_matrix(_sentences("a b", "a"), NO_STOPWORDS)
        assert m.terms == ("a", "b")
        assert np.array_equal(m.values, [[1, 1], [1, 0]])

    def test_single_sentence_tfidf_is_empty(self):
        with pytest.raises(ValueError, match="empty matrix"):
            build_term_sentence_matrix(_sentences("a b"), NO_STOPWORDS, weighting="tfidf")

    def test_tfidf_hand_values(self):
        m = build_term_sentence_matrix(_sentences("a", "b"), NO_STOPWORDS, weighting="tfidf")
        assert np.allclose(m.values, [[np.log(2), 0], [0, np.log(2)]])

    def test_tfidf_drops_ubiquitous_terms(self):
        m = build_term_sentence_matrix(
            _sentences("a b", "a c"), NO_STOPWORDS, weighting="tfidf"
        )
        assert "a" not in m.terms
        assert set(m.terms) == {"b", "c"}

    def test_stopwords_filtered(self):
        m = build_term_sentence_matrix(_sentences("the gene", "the cell"), StopwordSet.builtin())
        assert set(m.terms) == {"gene", "cell"}

    def test_all_stopwords_is_empty_matrix(self):
        with pytest.raises(ValueError, match="empty matrix"):
            build_term_sentence_matrix(_sentences("the of"), StopwordSet.builtin())

    def test_terms_lowercased_and_merged(self):
        m = build_term_sentence_matrix(_sentences("Gene gene"), NO_STOPWORDS)
        assert m.terms == ("gene",)
        assert m.values[0, 0] == 2

    def test_no_sentences_rejected(self):
        with pytest.raises(ValueError):
            build_term_sentence_matrix(_sentences(), NO_STOPWORDS)

    def test_unknown_weighting_rejected(self):
        with pytest.raises(ValueError, match="weighting"):
            build_term_sentence_matrix(_sentences("a"), NO_STOPWORDS, weighting="bm25")

    def test_zero_row_construction_rejected(self):
        with pytest.raises(ValueError, match="all-zero"):
            TermSentenceMatrix(terms=("a", "b"), sentence_count=1, values=np.array([[1.0], [0.0]]))


class TestTruncatedSvd:
    def test_rank_one_outer_product(self):
        # outer((1,0), (1,1)) has the single singular value sqrt(2).
        values = np.outer([1.0, 0.0], [1.0, 1.0])
        factors = truncated_svd(values, 1)
        assert factors.S[0] == pytest.approx(np.sqrt(2), abs=1e-9)
        residual = values - factors.U @ np.diag(factors.S) @ factors.V.T
        assert np.linalg.norm(residual) == pytest.approx(0.0, abs=1e-9)

    def test_identity_singular_values(self):
        factors = truncated_svd(np.eye(2), 2)
        assert np.allclose(factors.S, [1.0, 1.0])

    def test_random_matrix_matches_dense_oracle(self):
        rng = np.random.default_rng(81)
        values = rng.random((6, 5))
        factors = truncated_svd(values, 3)
        oracle = np.linalg.svd(values, compute_uv=False)
        assert np.allclose(factors.S, oracle[:3], atol=1e-6)

    def test_k_bound_error_names_bound(self):
        with pytest.raises(ValueError, match="min\\(rows, cols\\) = 2"):
            truncated_svd(np.ones((2, 5)), 3)

    def test_oracle_agreement_orthonormality_and_order_on_100_matrices(self):
        rng = np.random.default_rng(83)
        for _ in range(100):
            m = int(rng.integers(2, 41))
            n = int(rng.integers(2, 31))
            k = int(rng.integers(1, min(m, n) + 1))
            values = rng.standard_normal((m, n))
            factors = truncated_svd(values, k)
            oracle = np.linalg.svd(values, compute_uv=False)[:k]
            assert np.allclose(factors.S, oracle, rtol=1e-6, atol=1e-9)
            assert np.all(np.diff(factors.S) <= 1e-12)
            assert np.allclose(factors.U.T @ factors.U, np.eye(k), atol=1e-6)
            assert np.allclose(factors.V.T @ factors.V, np.eye(k), atol=1e-6)

    def test_rank_k_approximation_error_bound(self):
        rng = np.random.default_rng(87)
        for _ in range(20):
            values = rng.random((7, 6))
            k = int(rng.integers(1, 6))
            factors = truncated_svd(values, k)
            approx = factors.U @ np.diag(factors.S) @ factors.V.T
            spectral_error = np.linalg.norm(values - approx, ord=2)
            full = np.linalg.svd(values, compute_uv=False)
            discarded = full[k] if k < len(full) else 0.0
            assert spectral_error <= discarded + 1e-6

    def test_rank_deficient_matrix_keeps_orthonormal_factors(self):
        values = np.array([[3.0, 2.0, 0.0, 0.0], [0.0, 0.0, 3.0, 2.0]])
        factors = truncated_svd(values, 2)
        assert np.allclose(factors.S, [np.sqrt(13), np.sqrt(13)])
        assert np.allclose(factors.U.T @ factors.U, np.eye(2), atol=1e-9)

    def test_determinism_across_runs(self):
        rng = np.random.default_rng(89)
        values = rng.random((9, 7))
        a = truncated_svd(values, 4)
        b = truncated_svd(values, 4)
        assert np.array_equal(a.U, b.U)
        assert np.array_equal(a.S, b.S)
        assert np.array_equal(a.V, b.V)

    def test_factor_validation(self):
        with pytest.raises(ValueError, match="orthonormal"):
            SvdFactors(
                U=np.array([[1.0], [1.0]]),
                S=np.array([1.0]),
                V=np.array([[1.0], [0.0]]),
            )
        with pytest.raises(ValueError, match="non-increasing"):
            SvdFactors(U=np.eye(2), S=np.array([1.0, 2.0]), V=np.eye(2))


class TestSelectSentences:
    def test_dominant_column_argmax(self):
        # Column 0 of V carries sentence 0's dominant loading.
        sents = _sentences("s0.", "s1.", "s2.")
        values = np.array([[3.0, 0.5, 0.2], [0.1, 0.2, 0.3]])
        factors = truncated_svd(values, 1)
        assert np.argmax(np.abs(factors.V[:, 0])) == 0
        summary = select_sentences_lsa(factors, sents, 1)
        assert summary.selected == (0,)
        assert summary.method == "lsa"

    def test_block_fixture_one_sentence_per_block(self):
        sents = _sentences("a a a", "a a", "b b b", "b b")
        summary = summarize_lsa(sents, NO_STOPWORDS, 2)
        assert len(summary.selected) == 2
        blocks = {0: "a", 1: "a", 2: "b", 3: "b"}
        assert {blocks[i] for i in summary.selected} == {"a", "b"}

    def test_saturation_returns_all(self):
        sents = _sentences("a b", "b c", "c d")
        summary = summarize_lsa(sents, NO_STOPWORDS, 3)
        assert summary.selected == (0, 1, 2)
        assert not summary.short

    def test_n_above_count_flags_short(self):
        sents = _sentences("a b", "b c")
        summary = summarize_lsa(sents, NO_STOPWORDS, 5)
        assert summary.selected == (0, 1)
        assert summary.short

    def test_selection_is_deterministic(self):
        sents = _sentences("gene disease", "disease cell", "cell protein", "protein gene")
        a = summarize_lsa(sents, NO_STOPWORDS, 2)
        b = summarize_lsa(sents, NO_STOPWORDS, 2)
        assert a == b

    def test_permutation_equivariance(self):
        rng = np.random.default_rng(91)
        vocab = [f"w{i}" for i in range(9)]
        texts = [
            " ".join(rng.choice(vocab, size=rng.integers(2, 7))) for _ in range(6)
        ]
        base = summarize_lsa(_sentences(*texts), NO_STOPWORDS, 3)
        perm = [3, 0, 5, 1, 4, 2]
        permuted_texts = [texts[p] for p in perm]
        permuted = summarize_lsa(_sentences(*permuted_texts), NO_STOPWORDS, 3)
        base_texts = {texts[i] for i in base.selected}
        permuted_sel_texts = {permuted_texts[i] for i in permuted.selected}
        assert base_texts == permuted_sel_texts

    def test_wraps_concepts_when_fewer_than_n(self):
        # 2 distinct terms -> at most 2 concepts, yet n=3 sentences wanted.
        sents = _sentences("a a", "a b", "b b", "a")
        summary = summarize_lsa(sents, NO_STOPWORDS, 3)
        assert len(summary.selected) == 3
        assert not summary.short
