"""Corpus acquisition: fetch article HTML from a search endpoint or a
local directory, extract paragraph text, clean it, and persist a
versioned corpus (manifest.json plus raw/ and clean/ files).

The remote protocol is one GET to ``{endpoint}/search`` returning
``{"articles": [{"id": ..., "url": ...}, ...]}`` followed by one GET
per article URL. Transient failures (connection errors, 5xx) are
retried with exponential backoff; a 4xx marks the article failed and
fetching continues. The ``TEXTMILL_ENDPOINT`` environment variable
overrides the endpoint base URL so tests can point at fixture servers.

Extraction and cleaning are pure functions and safe to run in parallel
across documents; manifest writes go through a single atomic replace.
"""

from __future__ import annotations

import hashlib
import html.parser
import json
import os
import re
import time
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from urllib.parse import urljoin, urlsplit

import requests

__all__ = [
    "ArticleRecord",
    "CleanDocument",
    "RecordEntry",
    "CorpusManifest",
    "Corpus",
    "FetchError",
    "FetchResult",
    "CorpusError",
    "ENDPOINT_ENV_VAR",
    "make_article_id",
    "fetch_articles",
    "load_local_articles",
    "extract_text",
    "clean_text",
    "build_corpus",
    "persist_corpus",
    "load_corpus",
]

ENDPOINT_ENV_VAR = "TEXTMILL_ENDPOINT"
DEFAULT_RETRIES = 3
DEFAULT_BACKOFF = 0.5

_MARKUP_RE = re.compile(r"<(?=[A-Za-z/])")
_DOUBLE_SPACE = "  "
_CITATION_RE = re.compile(r"\[\d+(?:\s*[,-]\s*\d+)*\]")
# Everything outside letters, digits, space, and . , ; : ( ) - % goes.
_DISALLOWED_RE = re.compile(r"[^\w\s.,;:()\-%]|_")
_WHITESPACE_RE = re.compile(r"\s+")
_ID_SAFE_RE = re.compile(r"[^A-Za-z0-9_-]+")

_VALID_STATUSES = frozenset({"complete", "failed"})


@dataclass(frozen=True)
class ArticleRecord:
    id: str
    source_url: str
    raw_html: bytes
    fetched_at: datetime

    def __post_init__(self) -> None:
        if not self.id:
            raise ValueError("article id must be non-empty")
        if not self.raw_html:
            raise ValueError("fetched article must carry non-empty raw_html")
        if self.fetched_at.tzinfo is None:
            raise ValueError("fetched_at must be timezone-aware")


@dataclass(frozen=True)
class CleanDocument:
    id: str
    text: str
    paragraph_count: int

    def __post_init__(self) -> None:
        if self.paragraph_count < 0:
            raise ValueError("paragraph_count must be >= 0")
        if _MARKUP_RE.search(self.text):
            raise ValueError("clean text must not contain markup tags")
        if _DOUBLE_SPACE in self.text:
            raise ValueError("clean text must not contain consecutive spaces")


@dataclass(frozen=True)
class RecordEntry:
    id: str
    source_url: str
    raw_path: str | None
    clean_path: str | None
    status: str

    def __post_init__(self) -> None:
        if self.status not in _VALID_STATUSES:
            raise ValueError(f"unknown record status: {self.status!r}")
        if self.status == "complete" and (self.raw_path is None or self.clean_path is None):
            raise ValueError("complete records need raw_path and clean_path")


@dataclass(frozen=True)
class CorpusManifest:
    corpus_id: str
    query_terms: tuple[str, ...]
    created_at: str
    records: tuple[RecordEntry, ...]

    def __post_init__(self) -> None:
        ids = [entry.id for entry in self.records]
        if len(set(ids)) != len(ids):
            raise ValueError("record ids must be unique within a manifest")


@dataclass(frozen=True)
class Corpus:
    manifest: CorpusManifest
    raw: dict[str, bytes]
    clean: dict[str, CleanDocument]


@dataclass(frozen=True)
class FetchResult:
    records: tuple[ArticleRecord, ...]
    failures: tuple[tuple[str, str, str], ...]  # (id, source_url, reason)


class FetchError(RuntimeError):
    """The search endpoint itself could not be reached or parsed."""


class CorpusError(ValueError):
    """A manifest is missing, malformed, or inconsistent with disk."""


def make_article_id(source: str) -> str:
    """Stable opaque id from a source URL or filename."""
    stem = Path(urlsplit(source).path).stem or source
    slug = _ID_SAFE_RE.sub("-", stem).strip("-")
    if slug:
        return slug
    return hashlib.sha1(source.encode("utf-8")).hexdigest()[:12]


class _RateLimiter:
    def __init__(self, per_second: float | None) -> None:
        self._interval = 1.0 / per_second if per_second else 0.0
        self._last = None

    def wait(self) -> None:
        if self._interval <= 0.0:
            return
        now = time.monotonic()
        if self._last is not None:
            remaining = self._last + self._interval - now
            if remaining > 0.0:
                time.sleep(remaining)
                now = time.monotonic()
        self._last = now


def _get_with_retry(
    session: requests.Session,
    url: str,
    limiter: _RateLimiter,
    retries: int,
    backoff: float,
) -> requests.Response:
    delay = backoff
    last_error: Exception | None = None
    for attempt in range(retries):
        limiter.wait()
        try:
            response = session.get(url, timeout=30)
        except requests.RequestException as exc:
            last_error = exc
        else:
            if response.status_code < 500:
                return response
            last_error = requests.HTTPError(f"server error {response.status_code}")
        if attempt + 1 < retries:
            time.sleep(delay)
            delay *= 2.0
    assert last_error is not None
    raise last_error


def fetch_articles(
    query_terms: list[str],
    max_count: int,
    endpoint: str,
    rate_limit: float | None = None,
    retries: int = DEFAULT_RETRIES,
    backoff: float = DEFAULT_BACKOFF,
) -> FetchResult:
    """Fetch up to max_count articles advertised by the endpoint's
    search listing. Successes come back as ArticleRecords; per-article
    failures are reported alongside and do not abort the run."""
    if max_count < 0:
        raise ValueError("max_count must be >= 0")
    if max_count == 0:
        return FetchResult(records=(), failures=())
    base = os.environ.get(ENDPOINT_ENV_VAR, endpoint)
    if not base.endswith("/"):
        base += "/"
    limiter = _RateLimiter(rate_limit)
    session = requests.Session()
    search_url = urljoin(base, "search") + "?terms=" + ",".join(query_terms)
    try:
        listing = _get_with_retry(session, search_url, limiter, retries, backoff)
        listing.raise_for_status()
        articles = listing.json()["articles"]
    except (requests.RequestException, ValueError, KeyError) as exc:
        raise FetchError(f"search endpoint unreachable or malformed: {exc}") from exc

    records: list[ArticleRecord] = []
    failures: list[tuple[str, str, str]] = []
    for item in articles[:max_count]:
        url = urljoin(base, item["url"])
        article_id = str(item.get("id") or make_article_id(url))
        try:
            response = _get_with_retry(session, url, limiter, retries, backoff)
        except requests.RequestException as exc:
            failures.append((article_id, url, str(exc)))
            continue
        if response.status_code >= 400:
            failures.append((article_id, url, f"HTTP {response.status_code}"))
            continue
        if not response.content:
            failures.append((article_id, url, "empty response body"))
            continue
        records.append(
            ArticleRecord(
                id=article_id,
                source_url=url,
                raw_html=response.content,
                fetched_at=datetime.now(timezone.utc),
            )
        )
    return FetchResult(records=tuple(records), failures=tuple(failures))


def load_local_articles(directory: str | Path) -> FetchResult:
    """Treat a directory of .html files as an already-fetched corpus."""
    root = Path(directory)
    records = []
    for path in sorted(root.glob("*.html")):
        records.append(
            ArticleRecord(
                id=make_article_id(path.name),
                source_url="",
                raw_html=path.read_bytes(),
                fetched_at=datetime.now(timezone.utc),
            )
        )
    return FetchResult(records=tuple(records), failures=())


class _ParagraphExtractor(html.parser.HTMLParser):
    def __init__(self) -> None:
        super().__init__(convert_charrefs=True)
        self.paragraphs: list[str] = []
        self.saw_tag = False
        self._open_p = 0
        self._skip = 0
        self._buffer: list[str] = []

    def handle_starttag(self, tag: str, attrs) -> None:
        self.saw_tag = True
        if tag in ("script", "style"):
            self._skip += 1
        elif tag == "p":
            self._flush()
            self._open_p += 1

    def handle_endtag(self, tag: str) -> None:
        self.saw_tag = True
        if tag in ("script", "style"):
            self._skip = max(0, self._skip - 1)
        elif tag == "p" and self._open_p:
            self._flush()
            self._open_p -= 1

    def handle_startendtag(self, tag: str, attrs) -> None:
        self.saw_tag = True

    def handle_data(self, data: str) -> None:
        if self._open_p and not self._skip:
            self._buffer.append(data)

    def _flush(self) -> None:
        if self._open_p:
            self.paragraphs.append("".join(self._buffer))
        self._buffer = []

    def close(self) -> None:
        super().close()
        self._flush()


def extract_text(raw_html: bytes | str) -> tuple[str, int]:
    """Inner text of every <p> element in document order, joined by a
    single space; script/style content is dropped and entities decode.

    Input that contains no markup at all is returned verbatim (with a
    paragraph count of zero) so that re-extracting already-extracted
    text is a no-op.
    """
    decoded = (
        raw_html.decode("utf-8", errors="replace")
        if isinstance(raw_html, bytes)
        else raw_html
    )
    parser = _ParagraphExtractor()
    parser.feed(decoded)
    parser.close()
    if not parser.saw_tag:
        return decoded, 0
    return " ".join(parser.paragraphs), len(parser.paragraphs)


def clean_text(text: str) -> str:
    """Drop bracketed numeric citation markers, strip characters outside
    the letter/digit/space/.,;:()-% whitelist, collapse whitespace runs
    to single spaces, and trim."""
    text = _CITATION_RE.sub(" ", text)
    text = _DISALLOWED_RE.sub("", text)
    return _WHITESPACE_RE.sub(" ", text).strip()


def _raw_path(article_id: str) -> str:
    return f"raw/{article_id}.html"


def _clean_path(article_id: str) -> str:
    return f"clean/{article_id}.txt"


def build_corpus(
    fetch_result: FetchResult, corpus_id: str, query_terms: list[str]
) -> Corpus:
    """Extract and clean every fetched article and assemble the manifest
    in fetch order, appending failed fetches with status failed."""
    entries: list[RecordEntry] = []
    raw: dict[str, bytes] = {}
    clean: dict[str, CleanDocument] = {}
    for record in fetch_result.records:
        extracted, paragraph_count = extract_text(record.raw_html)
        document = CleanDocument(
            id=record.id,
            text=clean_text(extracted),
            paragraph_count=paragraph_count,
        )
        raw[record.id] = record.raw_html
        clean[record.id] = document
        entries.append(
            RecordEntry(
                id=record.id,
                source_url=record.source_url,
                raw_path=_raw_path(record.id),
                clean_path=_clean_path(record.id),
                status="complete",
            )
        )
    for article_id, url, _reason in fetch_result.failures:
        entries.append(
            RecordEntry(
                id=article_id,
                source_url=url,
                raw_path=None,
                clean_path=None,
                status="failed",
            )
        )
    manifest = CorpusManifest(
        corpus_id=corpus_id,
        query_terms=tuple(query_terms),
        created_at=datetime.now(timezone.utc).isoformat(),
        records=tuple(entries),
    )
    return Corpus(manifest=manifest, raw=raw, clean=clean)


def _atomic_write_bytes(path: Path, data: bytes) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_bytes(data)
    os.replace(tmp, path)


def persist_corpus(corpus: Corpus, root: str | Path) -> None:
    """Write raw/ and clean/ files, then the manifest; every file goes
    through a temp-and-rename so a killed run leaves no truncated
    artifact."""
    base = Path(root)
    (base / "raw").mkdir(parents=True, exist_ok=True)
    (base / "clean").mkdir(parents=True, exist_ok=True)
    for entry in corpus.manifest.records:
        if entry.status != "complete":
            continue
        _atomic_write_bytes(base / entry.raw_path, corpus.raw[entry.id])
        _atomic_write_bytes(
            base / entry.clean_path, corpus.clean[entry.id].text.encode("utf-8")
        )
    payload = {
        "corpus_id": corpus.manifest.corpus_id,
        "query_terms": list(corpus.manifest.query_terms),
        "created_at": corpus.manifest.created_at,
        "records": [
            {
                "id": entry.id,
                "source_url": entry.source_url,
                "raw_path": entry.raw_path,
                "clean_path": entry.clean_path,
                "status": entry.status,
            }
            for entry in corpus.manifest.records
        ],
    }
    tmp = base / "manifest.json.tmp"
    tmp.write_text(json.dumps(payload, ensure_ascii=False, indent=2) + "\n", "utf-8")
    os.replace(tmp, base / "manifest.json")


def _require(mapping: dict, field: str, context: str):
    if field not in mapping:
        raise CorpusError(f"manifest missing required field: {context}{field}")
    return mapping[field]


def load_corpus(root: str | Path) -> Corpus:
    """Read a persisted corpus back; errors name the offending field."""
    base = Path(root)
    manifest_path = base / "manifest.json"
    if not manifest_path.exists():
        raise CorpusError(f"manifest.json not found under {base}")
    try:
        payload = json.loads(manifest_path.read_text("utf-8"))
    except json.JSONDecodeError as exc:
        raise CorpusError(f"manifest.json is not valid JSON: {exc}") from exc
    corpus_id = _require(payload, "corpus_id", "")
    query_terms = _require(payload, "query_terms", "")
    created_at = _require(payload, "created_at", "")
    raw_records = _require(payload, "records", "")

    entries: list[RecordEntry] = []
    raw: dict[str, bytes] = {}
    clean: dict[str, CleanDocument] = {}
    for index, item in enumerate(raw_records):
        context = f"records[{index}]."
        entry = RecordEntry(
            id=_require(item, "id", context),
            source_url=_require(item, "source_url", context),
            raw_path=_require(item, "raw_path", context),
            clean_path=_require(item, "clean_path", context),
            status=_require(item, "status", context),
        )
        entries.append(entry)
        if entry.status != "complete":
            continue
        raw_file = base / entry.raw_path
        clean_file = base / entry.clean_path
        if not raw_file.exists():
            raise CorpusError(f"missing raw file for record {entry.id}: {entry.raw_path}")
        if not clean_file.exists():
            raise CorpusError(
                f"missing clean file for record {entry.id}: {entry.clean_path}"
            )
        raw[entry.id] = raw_file.read_bytes()
        text = clean_file.read_text("utf-8")
        _, paragraph_count = extract_text(raw[entry.id])
        clean[entry.id] = CleanDocument(
            id=entry.id, text=text, paragraph_count=paragraph_count
        )
    manifest = CorpusManifest(
        corpus_id=corpus_id,
        query_terms=tuple(query_terms),
        created_at=created_at,
        records=tuple(entries),
    )
    return Corpus(manifest=manifest, raw=raw, clean=clean)
