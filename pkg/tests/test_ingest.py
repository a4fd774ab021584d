"""Tests for corpus acquisition, extraction, cleaning, persistence."""

from __future__ import annotations

import json
import re
import threading
from datetime import datetime, timezone
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import pytest

from textmill.ingest import (
    ArticleRecord,
    CleanDocument,
    CorpusError,
    CorpusManifest,
    FetchError,
    FetchResult,
    RecordEntry,
    build_corpus,
    clean_text,
    extract_text,
    fetch_articles,
    load_corpus,
    load_local_articles,
    make_article_id,
    persist_corpus,
)

ARTICLES = {
    "a1": b"<html><body><p>Gene one. Disease two.</p><p>Protein three.</p></body></html>",
    "a2": b"<html><body><p>Alpha beta [3] gamma.</p></body></html>",
    "a3": b"<html><body><p>Cells divide.</p></body></html>",
}


class _FixtureState:
    def __init__(self):
        self.log: list[str] = []
        self.fail_always: set[str] = set()
        self.fail_times: dict[str, int] = {}


class _FixtureHandler(BaseHTTPRequestHandler):
    state: _FixtureState

    def log_message(self, *args) -> None:
        pass

    def do_GET(self) -> None:
        self.state.log.append(self.path)
        if self.path.startswith("/search"):
            body = json.dumps(
                {
                    "articles": [
                        {"id": name, "url": f"articles/{name}.html"}
                        for name in sorted(ARTICLES)
                    ]
                }
            ).encode()
            self.send_response(200)
            self.send_header("Content-Type", "application/json")
            self.end_headers()
            self.wfile.write(body)
            return
        match = re.fullmatch(r"/articles/(\w+)\.html", self.path)
        if not match or match.group(1) not in ARTICLES:
            self.send_response(404)
            self.end_headers()
            return
        name = match.group(1)
        if name in self.state.fail_always:
            self.send_response(404)
            self.end_headers()
            return
        if self.state.fail_times.get(name, 0) > 0:
            self.state.fail_times[name] -= 1
            self.send_response(503)
            self.end_headers()
            return
        self.send_response(200)
        self.send_header("Content-Type", "text/html")
        self.end_headers()
        self.wfile.write(ARTICLES[name])


@pytest.fixture()
def fixture_server():
    state = _FixtureState()
    handler = type("Handler", (_FixtureHandler,), {"state": state})
    server = ThreadingHTTPServer(("127.0.0.1", 0), handler)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    try:
        yield f"http://127.0.0.1:{server.server_address[1]}", state
    finally:
        server.shutdown()
        server.server_close()


class TestFetchArticles:
    def test_fixture_server_returns_all_hosted_documents(self, fixture_server):
        endpoint, _ = fixture_server
        result = fetch_articles(["gene", "disease"], 10, endpoint, backoff=0.01)
        assert len(result.records) == 3
        assert result.failures == ()
        assert {r.id for r in result.records} == set(ARTICLES)
        for record in result.records:
            assert record.raw_html
            assert record.fetched_at.tzinfo is not None

    def test_max_count_zero_returns_empty_without_requests(self, fixture_server):
        endpoint, state = fixture_server
        result = fetch_articles(["gene"], 0, endpoint)
        assert result.records == ()
        assert state.log == []

    def test_max_count_caps_article_requests(self, fixture_server):
        endpoint, state = fixture_server
        result = fetch_articles(["gene"], 2, endpoint, backoff=0.01)
        assert len(result.records) == 2
        article_requests = [p for p in state.log if p.startswith("/articles/")]
        assert len(article_requests) == 2

    def test_transient_failure_is_retried_to_success(self, fixture_server):
        endpoint, state = fixture_server
        state.fail_times["a2"] = 2
        result = fetch_articles(["gene"], 10, endpoint, backoff=0.01)
        assert len(result.records) == 3
        assert result.failures == ()
        retries = [p for p in state.log if p == "/articles/a2.html"]
        assert len(retries) == 3

    def test_persistent_http_error_marks_record_failed(self, fixture_server):
        endpoint, state = fixture_server
        state.fail_always.add("a1")
        result = fetch_articles(["gene"], 10, endpoint, backoff=0.01)
        assert len(result.records) == 2
        assert len(result.failures) == 1
        failed_id, _, reason = result.failures[0]
        assert failed_id == "a1"
        assert "404" in reason

    def test_unreachable_endpoint_is_fatal(self):
        with pytest.raises(FetchError):
            fetch_articles(
                ["gene"], 5, "http://127.0.0.1:1", retries=1, backoff=0.01
            )

    def test_environment_variable_overrides_endpoint(self, fixture_server, monkeypatch):
        endpoint, _ = fixture_server
        monkeypatch.setenv("TEXTMILL_ENDPOINT", endpoint)
        result = fetch_articles(["gene"], 10, "http://127.0.0.1:1", backoff=0.01)
        assert len(result.records) == 3

    def test_negative_max_count_rejected(self):
        with pytest.raises(ValueError):
            fetch_articles(["gene"], -1, "http://127.0.0.1:1")

    def test_local_directory_source(self, tmp_path):
        (tmp_path / "one.html").write_bytes(b"<p>first</p>")
        (tmp_path / "two.html").write_bytes(b"<p>second</p>")
        result = load_local_articles(tmp_path)
        assert [r.id for r in result.records] == ["one", "two"]
        assert result.records[0].raw_html == b"<p>first</p>"


class TestMakeArticleId:
    def test_url_stem(self):
        assert make_article_id("http://host/articles/PMC123.html") == "PMC123"

    def test_sanitizes_unsafe_characters(self):
        assert make_article_id("a b&c.html") == "a-b-c"

    def test_degenerate_source_hashes(self):
        first = make_article_id("///")
        second = make_article_id("///")
        assert first == second
        assert re.fullmatch(r"[0-9a-f]{12}", first)


class TestExtractText:
    def test_single_paragraph(self):
        assert extract_text(b"<p>hello</p>") == ("hello", 1)

    def test_no_paragraph_tags(self):
        assert extract_text(b"<div>no paragraphs here</div>") == ("", 0)

    def test_inline_markup_and_script_block(self):
        html = (
            b"<html><body>"
            b"<p>The <b>ABL1</b> gene.</p>"
            b"<script>var x = 'hidden';</script>"
            b"<p>Linked to <i>leukemia</i>.</p>"
            b"<p>Treated with imatinib.</p>"
            b"</body></html>"
        )
        text, count = extract_text(html)
        assert text == "The ABL1 gene. Linked to leukemia. Treated with imatinib."
        assert count == 3
        assert "hidden" not in text

    def test_entities_decoded(self):
        assert extract_text(b"<p>a &amp; b &lt; c</p>") == ("a & b < c", 1)

    def test_style_content_excluded(self):
        text, count = extract_text(b"<p>keep<style>p {color: red}</style> this</p>")
        assert text == "keep this"
        assert count == 1

    def test_invalid_utf8_replaced(self):
        text, count = extract_text(b"<p>caf\xff</p>")
        assert count == 1
        assert text.startswith("caf")

    def test_plain_text_passes_through_unchanged(self):
        plain = "Sentence one. Sentence two, with commas; and 42%."
        assert extract_text(plain.encode()) == (plain, 0)

    def test_idempotent_on_own_output(self):
        html = b"<html><p>First bit.</p><p>Second &amp; third.</p></html>"
        text, _ = extract_text(html)
        again, _ = extract_text(text.encode())
        assert again == text

    def test_bare_less_than_is_not_markup(self):
        plain = "x < 5 and y > 3"
        assert extract_text(plain.encode()) == (plain, 0)


class TestCleanText:
    def test_citation_marker_removed(self):
        assert clean_text("gene [12] expression") == "gene expression"

    def test_multi_citation_markers(self):
        assert clean_text("found [3,4] and [7-9] here") == "found and here"

    def test_empty_input(self):
        assert clean_text("") == ""

    def test_whitespace_collapse(self):
        assert clean_text("a\t\tb\n c") == "a b c"

    def test_whitelist_preserved(self):
        kept = "BCR-ABL (p210), 95%; see: item.1"
        assert clean_text(kept) == kept

    def test_disallowed_characters_removed(self):
        assert clean_text("a+b=c «quote» #tag") == "ab=c quote tag".replace("=", "")

    def test_idempotent_on_fuzzed_input(self):
        import random

        rng = random.Random(55)
        alphabet = "ab c.,;:()-%[]12\t\n<>&*_«é"
        for _ in range(500):
            raw = "".join(rng.choice(alphabet) for _ in range(rng.randint(0, 60)))
            once = clean_text(raw)
            assert clean_text(once) == once

    def test_output_never_contains_double_spaces(self):
        import random

        rng = random.Random(56)
        alphabet = "ab c.,;()[]42\t\n#"
        for _ in range(200):
            raw = "".join(rng.choice(alphabet) for _ in range(rng.randint(0, 40)))
            cleaned = clean_text(raw)
            assert "  " not in cleaned
            assert cleaned == cleaned.strip()


class TestCleanDocumentInvariants:
    def test_markup_rejected(self):
        with pytest.raises(ValueError, match="markup"):
            CleanDocument(id="x", text="bad <p> tag", paragraph_count=1)

    def test_double_space_rejected(self):
        with pytest.raises(ValueError, match="consecutive"):
            CleanDocument(id="x", text="two  spaces", paragraph_count=1)

    def test_bare_comparison_allowed(self):
        doc = CleanDocument(id="x", text="x < 5", paragraph_count=0)
        assert doc.text == "x < 5"


class TestPersistAndLoad:
    def _sample_result(self) -> FetchResult:
        now = datetime.now(timezone.utc)
        records = tuple(
            ArticleRecord(id=name, source_url=f"http://host/{name}", raw_html=body, fetched_at=now)
            for name, body in sorted(ARTICLES.items())
        )
        return FetchResult(records=records, failures=())

    def test_round_trip_identity(self, tmp_path):
        corpus = build_corpus(self._sample_result(), "c1", ["gene", "disease"])
        persist_corpus(corpus, tmp_path)
        loaded = load_corpus(tmp_path)
        assert loaded.manifest == corpus.manifest
        assert loaded.raw == corpus.raw
        assert {k: v.text for k, v in loaded.clean.items()} == {
            k: v.text for k, v in corpus.clean.items()
        }

    def test_manifest_keys_exact(self, tmp_path):
        corpus = build_corpus(self._sample_result(), "c1", ["gene"])
        persist_corpus(corpus, tmp_path)
        payload = json.loads((tmp_path / "manifest.json").read_text("utf-8"))
        assert set(payload) == {"corpus_id", "query_terms", "created_at", "records"}
        for row in payload["records"]:
            assert set(row) == {"id", "source_url", "raw_path", "clean_path", "status"}

    def test_failed_record_has_no_paths(self, tmp_path):
        result = FetchResult(
            records=self._sample_result().records[:1],
            failures=(("broken", "http://host/broken", "HTTP 404"),),
        )
        corpus = build_corpus(result, "c1", ["gene"])
        persist_corpus(corpus, tmp_path)
        payload = json.loads((tmp_path / "manifest.json").read_text("utf-8"))
        failed = [r for r in payload["records"] if r["status"] == "failed"]
        assert len(failed) == 1
        assert failed[0]["raw_path"] is None
        assert failed[0]["clean_path"] is None
        loaded = load_corpus(tmp_path)
        assert loaded.manifest.records[-1].status == "failed"

    def test_records_preserve_fetch_order(self, tmp_path):
        corpus = build_corpus(self._sample_result(), "c1", ["gene"])
        persist_corpus(corpus, tmp_path)
        loaded = load_corpus(tmp_path)
        assert [e.id for e in loaded.manifest.records] == ["a1", "a2", "a3"]

    def test_stored_clean_file_matches_pipeline(self, tmp_path):
        corpus = build_corpus(self._sample_result(), "c1", ["gene"])
        persist_corpus(corpus, tmp_path)
        for entry in corpus.manifest.records:
            raw = (tmp_path / entry.raw_path).read_bytes()
            stored = (tmp_path / entry.clean_path).read_text("utf-8")
            assert clean_text(extract_text(raw)[0]) == stored

    def test_load_from_empty_directory(self, tmp_path):
        with pytest.raises(CorpusError, match="manifest.json not found"):
            load_corpus(tmp_path)

    def test_corrupt_manifest_json(self, tmp_path):
        (tmp_path / "manifest.json").write_text("{not json", "utf-8")
        with pytest.raises(CorpusError, match="not valid JSON"):
            load_corpus(tmp_path)

    def test_missing_field_named_in_error(self, tmp_path):
        (tmp_path / "manifest.json").write_text(
            json.dumps({"corpus_id": "c", "query_terms": [], "records": []}), "utf-8"
        )
        with pytest.raises(CorpusError, match="created_at"):
            load_corpus(tmp_path)

    def test_missing_record_field_named_in_error(self, tmp_path):
        (tmp_path / "manifest.json").write_text(
            json.dumps(
                {
                    "corpus_id": "c",
                    "query_terms": [],
                    "created_at": "2026-01-01T00:00:00+00:00",
                    "records": [{"id": "a", "source_url": ""}],
                }
            ),
            "utf-8",
        )
        with pytest.raises(CorpusError, match=r"records\[0\].raw_path"):
            load_corpus(tmp_path)

    def test_missing_clean_file_detected(self, tmp_path):
        corpus = build_corpus(self._sample_result(), "c1", ["gene"])
        persist_corpus(corpus, tmp_path)
        (tmp_path / "clean" / "a2.txt").unlink()
        with pytest.raises(CorpusError, match="missing clean file"):
            load_corpus(tmp_path)

    def test_duplicate_record_ids_rejected(self):
        entry = RecordEntry(
            id="a", source_url="", raw_path="raw/a.html", clean_path="clean/a.txt", status="complete"
        )
        with pytest.raises(ValueError, match="unique"):
            CorpusManifest(
                corpus_id="c",
                query_terms=(),
                created_at="2026-01-01T00:00:00+00:00",
                records=(entry, entry),
            )

    def test_no_tmp_file_left_behind(self, tmp_path):
        corpus = build_corpus(self._sample_result(), "c1", ["gene"])
        persist_corpus(corpus, tmp_path)
        assert not list(tmp_path.glob("*.tmp"))


class TestEndToEnd:
    def test_fetch_build_persist_load(self, fixture_server, tmp_path):
        endpoint, _ = fixture_server
        result = fetch_articles(["gene", "disease"], 10, endpoint, backoff=0.01)
        corpus = build_corpus(result, "fixture-corpus", ["gene", "disease"])
        persist_corpus(corpus, tmp_path)
        loaded = load_corpus(tmp_path)
        assert loaded.clean["a2"].text == "Alpha beta gamma."
        assert loaded.clean["a1"].text == "Gene one. Disease two. Protein three."
