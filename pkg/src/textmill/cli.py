"""Pipeline orchestration behind subcommands.

Stages write their artifacts into a run directory and stamp themselves
under ``.stages/`` with a content hash of their configuration and
inputs; re-running with unchanged inputs skips the work unless --force
is given. Exit codes: 0 success, 1 usage or configuration error,
2 missing upstream artifact, 3 runtime failure. Diagnostics go to
standard error as single lines; data goes to files only.

Stage order for ``pipeline``: fetch, extract, summarize, lsa, topics,
visdata. The topics stage fits on the per-document summaries written by
the summarize stage, so summarize is a hard dependency of topics.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from contextlib import contextmanager
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .ingest import (
    ENDPOINT_ENV_VAR,
    ArticleRecord,
    FetchError,
    FetchResult,
    build_corpus,
    fetch_articles,
    load_corpus,
    load_local_articles,
    persist_corpus,
)
from .lda import (
    Dictionary,
    LdaConfig,
    build_dictionary,
    fit_lda,
    load_model,
    save_model,
    to_bow,
)
from .lsa import summarize_lsa
from .rouge import (
    DEFAULT_VARIANTS,
    _VARIANT_RE,
    aggregate_max,
    eval_tokenize,
    score_variant,
)
from .summarize import (
    DEFAULT_MAX_WORDS,
    summarize_centrality,
    summarize_frequency,
)
from .textproc import (
    StopwordSet,
    build_word_frequencies,
    split_sentences,
    tokenize,
    tokenize_sentences,
)
from .visdata import (
    DEFAULT_LAMBDA_STEP,
    DEFAULT_R,
    export_vis_json,
    project_2d,
    topic_distances,
    topic_prevalence,
)

__all__ = ["RunConfig", "main"]

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_MISSING = 2
EXIT_RUNTIME = 3

_STAGE_ORDER = ("fetch", "extract", "summarize", "lsa", "topics", "visdata")


class UsageError(Exception):
    pass


class ConfigError(Exception):
    pass


class MissingArtifactError(Exception):
    pass


class LockError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    run_dir: Path
    endpoint: str
    source_dir: Path | None
    query_terms: tuple[str, ...]
    max_articles: int
    rate_limit: float | None
    method: str
    summary_n: int
    max_words: int
    lsa_n: int
    lsa_weighting: str
    lda: LdaConfig
    min_doc_freq: int
    vis_r: int
    lambda_step: float
    rouge_variants: tuple[str, ...]
    stopwords_path: Path | None

    def __post_init__(self) -> None:
        if self.method not in ("frequency", "centrality"):
            raise ConfigError(f"unknown summarizer method: {self.method!r}")
        if self.summary_n < 1 or self.lsa_n < 1:
            raise ConfigError("summary sentence counts must be >= 1")
        if self.max_words < 1:
            raise ConfigError("max_words must be >= 1")
        if self.max_articles < 0:
            raise ConfigError("max_articles must be >= 0")
        if self.min_doc_freq < 1:
            raise ConfigError("min_doc_freq must be >= 1")
        if self.vis_r < 1:
            raise ConfigError("vis R must be >= 1")
        if not 0.0 < self.lambda_step <= 1.0:
            raise ConfigError("lambda_step must lie in (0, 1]")
        if self.lsa_weighting not in ("tf", "tfidf"):
            raise ConfigError(f"unknown lsa weighting: {self.lsa_weighting!r}")
        for variant in self.rouge_variants:
            if not _VARIANT_RE.match(variant.lower()):
                raise ConfigError(f"unknown ROUGE variant: {variant!r}")
        if self.stopwords_path is not None and not self.stopwords_path.exists():
            raise ConfigError(f"stopword file not found: {self.stopwords_path}")
        if self.source_dir is not None and not self.source_dir.is_dir():
            raise ConfigError(f"source directory not found: {self.source_dir}")

    def stopwords(self) -> StopwordSet:
        if self.stopwords_path is not None:
            return StopwordSet.from_file(self.stopwords_path)
        return StopwordSet.builtin()


def _load_config(args: argparse.Namespace) -> RunConfig:
    raw: dict = {}
    if args.config is not None:
        path = Path(args.config)
        if not path.exists():
            raise ConfigError(f"config file not found: {path}")
        try:
            raw = json.loads(path.read_text("utf-8"))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file is not valid JSON: {exc}") from exc
        if not isinstance(raw, dict):
            raise ConfigError("config file must hold a JSON object")

    def section(name: str) -> dict:
        value = raw.get(name, {})
        if not isinstance(value, dict):
            raise ConfigError(f"config section {name!r} must be an object")
        return value

    summ = section("summarizer")
    lsa = section("lsa")
    lda = section("lda")
    vis = section("vis")
    rouge = section("rouge")

    def override(flag: str, fallback):
        value = getattr(args, flag, None)
        return fallback if value is None else value

    seed = override("seed", lda.get("seed", 42))
    try:
        lda_config = LdaConfig(
            K=int(override("topics", lda.get("K", 5))),
            alpha=lda.get("alpha"),
            beta=float(lda.get("beta", 0.01)),
            iterations=int(override("iterations", lda.get("iterations", 1000))),
            burn_in=int(lda.get("burn_in", 100)),
            seed=int(seed),
            average=bool(lda.get("average", False)),
        )
    except ValueError as exc:
        raise ConfigError(f"invalid lda settings: {exc}") from exc

    run_dir = override("run_dir", raw.get("run_dir", "run"))
    source_dir = override("source_dir", raw.get("source_dir"))
    return RunConfig(
        run_dir=Path(run_dir),
        endpoint=str(override("endpoint", raw.get("endpoint", ""))),
        source_dir=None if source_dir is None else Path(source_dir),
        query_terms=tuple(raw.get("query_terms", ["gene", "disease"])),
        max_articles=int(override("max_articles", raw.get("max_articles", 100))),
        rate_limit=raw.get("rate_limit"),
        method=str(override("method", summ.get("method", "frequency"))),
        summary_n=int(override("summary_n", summ.get("n", 7))),
        max_words=int(override("max_words", summ.get("max_words", DEFAULT_MAX_WORDS))),
        lsa_n=int(override("lsa_n", lsa.get("n", 7))),
        lsa_weighting=str(lsa.get("weighting", "tf")),
        lda=lda_config,
        min_doc_freq=int(lda.get("min_doc_freq", 1)),
        vis_r=int(override("vis_r", vis.get("R", DEFAULT_R))),
        lambda_step=float(override("lambda_step", vis.get("lambda_step", DEFAULT_LAMBDA_STEP))),
        rouge_variants=tuple(rouge.get("variants", DEFAULT_VARIANTS)),
        stopwords_path=None
        if raw.get("stopwords") is None
        else Path(raw["stopwords"]),
    )


def _sha256_bytes(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def _sha256_file(path: Path) -> str:
    return _sha256_bytes(path.read_bytes())


def _hash_paths(base: Path, paths: list[Path]) -> dict[str, str]:
    return {
        str(path.relative_to(base)): _sha256_file(path)
        for path in sorted(paths)
        if path.is_file()
    }


def _atomic_write(path: Path, text: str) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text, "utf-8")
    os.replace(tmp, path)


def _require(path: Path, hint: str) -> Path:
    if not path.exists():
        raise MissingArtifactError(f"missing upstream artifact {path.name}; {hint}")
    return path


@contextmanager
def _run_lock(run_dir: Path):
    run_dir.mkdir(parents=True, exist_ok=True)
    lock = run_dir / ".lock"
    try:
        fd = os.open(lock, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
    except FileExistsError:
        raise LockError(f"run directory is locked by another run: {lock}") from None
    try:
        os.write(fd, f"{os.getpid()}\n".encode())
        os.close(fd)
        yield
    finally:
        lock.unlink(missing_ok=True)


class _Stages:
    """Content-hash stage stamps under run_dir/.stages."""

    def __init__(self, run_dir: Path, force: bool) -> None:
        self.run_dir = run_dir
        self.force = force
        self.dir = run_dir / ".stages"
        self.dir.mkdir(parents=True, exist_ok=True)

    def _signature(self, payload: dict) -> str:
        return _sha256_bytes(json.dumps(payload, sort_keys=True).encode("utf-8"))

    def run(self, name: str, signature_payload: dict, worker) -> bool:
        """Run the stage unless its stamp matches; return True if work
        was performed."""
        signature = self._signature(signature_payload)
        stamp_path = self.dir / f"{name}.json"
        if not self.force and stamp_path.exists():
            try:
                stamp = json.loads(stamp_path.read_text("utf-8"))
            except json.JSONDecodeError:
                stamp = None
            if (
                stamp
                and stamp.get("signature") == signature
                and all(
                    (self.run_dir / rel).is_file()
                    and _sha256_file(self.run_dir / rel) == digest
                    for rel, digest in stamp.get("artifacts", {}).items()
                )
            ):
                print(f"stage {name}: skipped (up to date)", file=sys.stderr)
                return False
        artifacts = worker()
        stamp = {
            "signature": signature,
            "artifacts": _hash_paths(self.run_dir, artifacts),
        }
        _atomic_write(stamp_path, json.dumps(stamp, sort_keys=True, indent=2) + "\n")
        print(f"stage {name}: done", file=sys.stderr)
        return True


def _stopwords_token(config: RunConfig) -> str:
    if config.stopwords_path is None:
        return "builtin"
    return _sha256_file(config.stopwords_path)


def _stage_fetch(config: RunConfig, stages: _Stages) -> None:
    run_dir = config.run_dir
    endpoint = os.environ.get(ENDPOINT_ENV_VAR, config.endpoint)
    payload: dict = {
        "stage": "fetch",
        "endpoint": endpoint,
        "query_terms": list(config.query_terms),
        "max_articles": config.max_articles,
        "rate_limit": config.rate_limit,
    }
    if config.source_dir is not None:
        payload["source"] = _hash_paths(
            config.source_dir, sorted(config.source_dir.glob("*.html"))
        )

    def worker() -> list[Path]:
        if config.source_dir is not None:
            result = load_local_articles(config.source_dir)
        else:
            if not endpoint:
                raise ConfigError("no endpoint configured and no source directory")
            result = fetch_articles(
                list(config.query_terms),
                config.max_articles,
                endpoint,
                rate_limit=config.rate_limit,
            )
        raw_dir = run_dir / "raw"
        raw_dir.mkdir(parents=True, exist_ok=True)
        artifacts = []
        rows = []
        for record in result.records[: config.max_articles or None]:
            path = raw_dir / f"{record.id}.html"
            tmp = path.with_name(path.name + ".tmp")
            tmp.write_bytes(record.raw_html)
            os.replace(tmp, path)
            artifacts.append(path)
            rows.append(
                {
                    "id": record.id,
                    "source_url": record.source_url,
                    "raw_path": f"raw/{record.id}.html",
                    "status": "complete",
                }
            )
        for article_id, url, reason in result.failures:
            rows.append(
                {
                    "id": article_id,
                    "source_url": url,
                    "raw_path": None,
                    "status": "failed",
                    "reason": reason,
                }
            )
        fetch_manifest = run_dir / "fetch.json"
        _atomic_write(fetch_manifest, json.dumps({"records": rows}, indent=2) + "\n")
        artifacts.append(fetch_manifest)
        return artifacts

    stages.run("fetch", payload, worker)


def _stage_extract(config: RunConfig, stages: _Stages) -> None:
    run_dir = config.run_dir
    fetch_manifest = _require(run_dir / "fetch.json", "run the fetch stage first")
    raw_rows = json.loads(fetch_manifest.read_text("utf-8"))["records"]
    raw_paths = [run_dir / row["raw_path"] for row in raw_rows if row["raw_path"]]
    payload = {
        "stage": "extract",
        "inputs": {
            "fetch.json": _sha256_file(fetch_manifest),
            **_hash_paths(run_dir, raw_paths),
        },
    }

    def worker() -> list[Path]:
        from datetime import datetime, timezone

        records = []
        failures = []
        for row in raw_rows:
            if row["status"] != "complete":
                failures.append((row["id"], row["source_url"], row.get("reason", "")))
                continue
            records.append(
                ArticleRecord(
                    id=row["id"],
                    source_url=row["source_url"],
                    raw_html=(run_dir / row["raw_path"]).read_bytes(),
                    fetched_at=datetime.now(timezone.utc),
                )
            )
        corpus = build_corpus(
            FetchResult(records=tuple(records), failures=tuple(failures)),
            corpus_id=run_dir.name,
            query_terms=list(config.query_terms),
        )
        persist_corpus(corpus, run_dir)
        artifacts = [run_dir / "manifest.json"]
        for entry in corpus.manifest.records:
            if entry.status == "complete":
                artifacts.append(run_dir / entry.clean_path)
        return artifacts

    stages.run("extract", payload, worker)


def _clean_documents(run_dir: Path) -> list[tuple[str, str]]:
    corpus = load_corpus(run_dir)
    return [
        (entry.id, corpus.clean[entry.id].text)
        for entry in corpus.manifest.records
        if entry.status == "complete"
    ]


def _stage_summarize(config: RunConfig, stages: _Stages) -> None:
    run_dir = config.run_dir
    manifest = _require(run_dir / "manifest.json", "run the extract stage first")
    documents = _clean_documents(run_dir)
    payload = {
        "stage": "summarize",
        "method": config.method,
        "n": config.summary_n,
        "max_words": config.max_words,
        "stopwords": _stopwords_token(config),
        "inputs": {
            "manifest.json": _sha256_file(manifest),
            **_hash_paths(
                run_dir, [run_dir / "clean" / f"{doc_id}.txt" for doc_id, _ in documents]
            ),
        },
    }

    def worker() -> list[Path]:
        stopwords = config.stopwords()
        out_dir = run_dir / "summaries"
        out_dir.mkdir(parents=True, exist_ok=True)
        artifacts = []
        lines = []
        for doc_id, text in documents:
            sentences = tokenize_sentences(split_sentences(text))
            if config.method == "frequency":
                freqs = build_word_frequencies(sentences, stopwords)
                summary = summarize_frequency(
                    sentences, freqs, config.summary_n, max_words=config.max_words
                )
            else:
                summary = summarize_centrality(sentences, config.summary_n, stopwords)
            path = out_dir / f"{doc_id}.txt"
            _atomic_write(path, summary.text + "\n")
            artifacts.append(path)
            lines.append(summary.text)
        combined = run_dir / "summary.txt"
        _atomic_write(combined, "\n".join(lines) + "\n")
        artifacts.append(combined)
        return artifacts

    stages.run("summarize", payload, worker)


def _stage_lsa(config: RunConfig, stages: _Stages) -> None:
    run_dir = config.run_dir
    manifest = _require(run_dir / "manifest.json", "run the extract stage first")
    documents = _clean_documents(run_dir)
    payload = {
        "stage": "lsa",
        "n": config.lsa_n,
        "weighting": config.lsa_weighting,
        "stopwords": _stopwords_token(config),
        "inputs": {
            "manifest.json": _sha256_file(manifest),
            **_hash_paths(
                run_dir, [run_dir / "clean" / f"{doc_id}.txt" for doc_id, _ in documents]
            ),
        },
    }

    def worker() -> list[Path]:
        stopwords = config.stopwords()
        lines = []
        for _doc_id, text in documents:
            sentences = tokenize_sentences(split_sentences(text))
            try:
                summary = summarize_lsa(
                    sentences, stopwords, config.lsa_n, weighting=config.lsa_weighting
                )
                lines.append(summary.text)
            except ValueError:
                lines.append("")
        target = run_dir / "lsa_summary.txt"
        _atomic_write(target, "\n".join(lines) + "\n")
        return [target]

    stages.run("lsa", payload, worker)


def _stage_topics(config: RunConfig, stages: _Stages) -> None:
    run_dir = config.run_dir
    manifest = _require(run_dir / "manifest.json", "run the extract stage first")
    summaries_dir = _require(run_dir / "summaries", "run the summarize stage first")
    documents = _clean_documents(run_dir)
    summary_paths = [summaries_dir / f"{doc_id}.txt" for doc_id, _ in documents]
    for path in summary_paths:
        _require(path, "run the summarize stage first")
    payload = {
        "stage": "topics",
        "lda": {
            "K": config.lda.K,
            "alpha": config.lda.alpha,
            "beta": config.lda.beta,
            "iterations": config.lda.iterations,
            "burn_in": config.lda.burn_in,
            "seed": config.lda.seed,
            "average": config.lda.average,
        },
        "min_doc_freq": config.min_doc_freq,
        "stopwords": _stopwords_token(config),
        "inputs": {
            "manifest.json": _sha256_file(manifest),
            **_hash_paths(run_dir, summary_paths),
        },
    }

    def worker() -> list[Path]:
        stopwords = config.stopwords()
        doc_ids = []
        token_docs = []
        for doc_id, _ in documents:
            text = (summaries_dir / f"{doc_id}.txt").read_text("utf-8")
            tokens = [t.lower() for t in tokenize(text) if t.lower() not in stopwords]
            doc_ids.append(doc_id)
            token_docs.append(tokens)
        dictionary = build_dictionary(token_docs, min_doc_freq=config.min_doc_freq)
        corpus = [
            to_bow(tokens, dictionary, doc_id=doc_id)
            for doc_id, tokens in zip(doc_ids, token_docs)
        ]
        model = fit_lda(corpus, dictionary, config.lda)
        target = run_dir / "model.bin"
        save_model(target, model, dictionary)
        return [target]

    stages.run("topics", payload, worker)


def _stage_visdata(config: RunConfig, stages: _Stages) -> None:
    run_dir = config.run_dir
    model_path = _require(run_dir / "model.bin", "run the topics stage first")
    payload = {
        "stage": "visdata",
        "R": config.vis_r,
        "lambda_step": config.lambda_step,
        "inputs": {"model.bin": _sha256_file(model_path)},
    }

    def worker() -> list[Path]:
        model = load_model(model_path)
        dictionary = Dictionary(
            id2word=model.id2word,
            word2id={word: i for i, word in enumerate(model.id2word)},
            doc_freq={},
        )
        summary = topic_prevalence(model.theta, np.asarray(model.doc_lengths, dtype=float))
        coordinates = project_2d(topic_distances(model.phi))
        target = run_dir / "visdata.json"
        export_vis_json(
            target,
            model,
            dictionary,
            summary,
            coordinates,
            R=config.vis_r,
            lambda_step=config.lambda_step,
        )
        return [target]

    stages.run("visdata", payload, worker)


def _cmd_rouge(config: RunConfig, stages: _Stages, args: argparse.Namespace) -> None:
    system_path = Path(args.system)
    reference_paths = [Path(p) for p in args.reference]
    _require(system_path, "system summary file not found")
    for path in reference_paths:
        _require(path, "reference summary file not found")
    payload = {
        "stage": "rouge",
        "variants": list(config.rouge_variants),
        "inputs": {
            "system": _sha256_file(system_path),
            "references": [_sha256_file(p) for p in reference_paths],
        },
    }

    def worker() -> list[Path]:
        system = eval_tokenize(system_path.read_text("utf-8"))
        references = [eval_tokenize(p.read_text("utf-8")) for p in reference_paths]
        rows = []
        for variant in config.rouge_variants:
            per_reference = [score_variant(variant, system, ref) for ref in references]
            best = aggregate_max(per_reference)
            rows.append(
                {
                    "variant": variant,
                    "recall": best.recall,
                    "precision": best.precision,
                    "f1": best.f1,
                    "per_reference": [
                        {"recall": s.recall, "precision": s.precision, "f1": s.f1}
                        for s in per_reference
                    ],
                }
            )
        target = config.run_dir / "rouge.json"
        _atomic_write(target, json.dumps({"scores": rows}, indent=2) + "\n")
        return [target]

    stages.run("rouge", payload, worker)


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # noqa: A003 - argparse hook
        raise UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="textmill", description="Text mining pipeline")
    parser.add_argument("--config", type=Path, help="JSON config file")
    parser.add_argument("--run-dir", dest="run_dir", type=Path, help="run directory")
    parser.add_argument("--seed", type=int, help="override the topic model seed")
    parser.add_argument("--force", action="store_true", help="re-run stamped stages")
    sub = parser.add_subparsers(dest="command", required=True)

    fetch = sub.add_parser("fetch", help="fetch article HTML")
    fetch.add_argument("--max-articles", dest="max_articles", type=int)
    fetch.add_argument("--endpoint", dest="endpoint")
    fetch.add_argument("--source-dir", dest="source_dir", type=Path)

    sub.add_parser("extract", help="extract and clean paragraph text")

    summarize = sub.add_parser("summarize", help="summarize each document")
    summarize.add_argument("--method", choices=("frequency", "centrality"))
    summarize.add_argument("--n", dest="summary_n", type=int)
    summarize.add_argument("--max-words", dest="max_words", type=int)

    lsa = sub.add_parser("lsa", help="latent semantic summaries")
    lsa.add_argument("--n", dest="lsa_n", type=int)

    topics = sub.add_parser("topics", help="fit the topic model")
    topics.add_argument("--topics", dest="topics", type=int)
    topics.add_argument("--iterations", dest="iterations", type=int)

    visdata = sub.add_parser("visdata", help="export visualization data")
    visdata.add_argument("--r", dest="vis_r", type=int)
    visdata.add_argument("--lambda-step", dest="lambda_step", type=float)

    rouge = sub.add_parser("rouge", help="score a summary against references")
    rouge.add_argument("--system", required=True)
    rouge.add_argument("--reference", action="append", required=True)

    sub.add_parser("pipeline", help="run all stages in order")
    return parser


def _single_line(message: str) -> str:
    return " ".join(str(message).split())


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"error: usage: {_single_line(str(exc))}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        config = _load_config(args)
    except ConfigError as exc:
        print(f"error: config: {_single_line(str(exc))}", file=sys.stderr)
        return EXIT_CONFIG

    try:
        with _run_lock(config.run_dir):
            stages = _Stages(config.run_dir, force=args.force)
            if args.command == "fetch":
                _stage_fetch(config, stages)
            elif args.command == "extract":
                _stage_extract(config, stages)
            elif args.command == "summarize":
                _stage_summarize(config, stages)
            elif args.command == "lsa":
                _stage_lsa(config, stages)
            elif args.command == "topics":
                _stage_topics(config, stages)
            elif args.command == "visdata":
                _stage_visdata(config, stages)
            elif args.command == "rouge":
                _cmd_rouge(config, stages, args)
            elif args.command == "pipeline":
                _stage_fetch(config, stages)
                _stage_extract(config, stages)
                _stage_summarize(config, stages)
                _stage_lsa(config, stages)
                _stage_topics(config, stages)
                _stage_visdata(config, stages)
            else:  # pragma: no cover - argparse enforces the choices
                raise UsageError(f"unknown command {args.command!r}")
    except ConfigError as exc:
        print(f"error: config: {_single_line(str(exc))}", file=sys.stderr)
        return EXIT_CONFIG
    except MissingArtifactError as exc:
        print(f"error: missing-artifact: {_single_line(str(exc))}", file=sys.stderr)
        return EXIT_MISSING
    except LockError as exc:
        print(f"error: locked: {_single_line(str(exc))}", file=sys.stderr)
        return EXIT_RUNTIME
    except FetchError as exc:
        print(f"error: fetch: {_single_line(str(exc))}", file=sys.stderr)
        return EXIT_RUNTIME
    except Exception as exc:  # noqa: BLE001 - single line per contract
        print(f"error: runtime: {_single_line(f'{type(exc).__name__}: {exc}')}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
