"""Threshold-gated hybrid retrieval and knowledge-base auto-update.

The policy: search the local knowledge base first; when the best local
similarity clears the threshold ``c`` the (slower) web search is skipped
entirely. Otherwise web results are fetched, chunked, embedded and merged
with the local hits into a single ranked list of at most 2K paragraphs, and
any web document containing a paragraph scoring above ``c`` is added to the
knowledge base so the next identical query resolves locally.

``calibrate_threshold`` sets ``c`` at the 1% (nearest-rank) quantile of
similarities over a holdout set of (query, positive paragraph) pairs.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Optional, Sequence

import numpy as np

from .corpus import Chunk, Document, chunk_document, tokenize
from .encoder import EncoderPair
from .errors import EmptyHoldout, RaggateError, WebSearchFailed
from .index import ScoredHit, SimilarityMetric, VectorIndex, similarity
from .websearch import SearchClient, url_key

# Clamp width used to force a cosine threshold into the open interval (0, 1).
_THRESHOLD_EPS = 1e-9


@dataclass
class GateConfig:
    k: int = 5
    threshold: float = 0.5
    metric: SimilarityMetric = SimilarityMetric.COSINE
    use_kb: bool = True
    use_web: bool = True
    n_web: int = 5
    auto_update: bool = True

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.n_web < 1:
            raise ValueError("n_web must be >= 1")
        if not math.isfinite(self.threshold):
            raise ValueError("threshold must be finite")
        # The open-interval constraint only makes sense for cosine; dot and
        # euclidean thresholds are unbounded.
        if self.metric is SimilarityMetric.COSINE and not 0.0 < self.threshold < 1.0:
            raise ValueError(f"cosine threshold must lie in (0, 1), got {self.threshold}")


@dataclass(frozen=True)
class RetrievedParagraph:
    chunk: Chunk
    score: float
    provenance: str  # "local" | "web"
    source_url: Optional[str]
    published_at: datetime


@dataclass
class GateTrace:
    """Audit record of one gated retrieval."""

    local_max_score: Optional[float]
    web_search_performed: bool
    web_calls: int
    kb_documents_added: int
    result_count: int
    timings: dict[str, float] = field(default_factory=dict)
    web_degraded: bool = False
    error: Optional[str] = None


@dataclass(frozen=True)
class SaveWebResult:
    doc_id: str
    chunk_count: int
    already_present: bool


def nearest_rank_quantile(values: Sequence[float], quantile: float) -> float:
    """Sorted-array element at 0-based index ceil(q*n) - 1.

    A 1e-9 slack absorbs float rounding in q*n so that e.g. q=0.01, n=200
    lands on rank 2 exactly.
    """
    if not 0.0 < quantile < 1.0:
        raise ValueError("quantile must lie in (0, 1)")
    if len(values) == 0:
        raise ValueError("values must be non-empty")
    ordered = np.sort(np.asarray(values, dtype=np.float64))
    rank = math.ceil(quantile * len(ordered) - 1e-9)
    return float(ordered[max(rank, 1) - 1])


def calibrate_threshold(enc: EncoderPair, holdout: Sequence[tuple[str, str]],
                        metric: SimilarityMetric = SimilarityMetric.COSINE,
                        quantile: float = 0.01) -> float:
    """Threshold at the nearest-rank quantile of holdout pair similarities.

    Cosine results are clamped into the open interval (0, 1); other metrics
    return the raw quantile value.
    """
    if not holdout:
        raise EmptyHoldout("holdout set is empty")
    sims = holdout_similarities(enc, holdout, metric)
    c = nearest_rank_quantile(sims, quantile)
    if metric is SimilarityMetric.COSINE:
        c = min(max(c, _THRESHOLD_EPS), 1.0 - _THRESHOLD_EPS)
    return c


def holdout_similarities(enc: EncoderPair, holdout: Sequence[tuple[str, str]],
                         metric: SimilarityMetric = SimilarityMetric.COSINE) -> list[float]:
    return [similarity(enc.encode_query(q), enc.encode_key(p), metric)
            for q, p in holdout]


def write_calibration_report(path: str, sims: Sequence[float], quantile: float,
                             threshold: float, bins: int = 20) -> None:
    """JSON report with the similarity histogram used to pick the threshold."""
    counts, edges = np.histogram(np.asarray(sims, dtype=np.float64), bins=bins)
    report = {
        "n": len(sims),
        "quantile": quantile,
        "c": threshold,
        "threshold": threshold,  # readable alias of "c"
        "histogram": {"bin_edges": [float(e) for e in edges],
                      "counts": [int(c) for c in counts]},
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(report, fh, indent=2)
        fh.write("\n")


def _normalized_text(text: str) -> str:
    return " ".join(text.split()).casefold()


def _provenance_order(p: RetrievedParagraph) -> tuple:
    return (-p.score, 0 if p.provenance == "local" else 1, p.chunk.chunk_id)


def _local_paragraphs(ix: VectorIndex, hits: Sequence[ScoredHit]) -> list[RetrievedParagraph]:
    out = []
    for hit in hits:
        chunk = ix.get_chunk(hit.chunk_id)
        out.append(RetrievedParagraph(chunk=chunk, score=hit.score, provenance="local",
                                      source_url=None, published_at=chunk.published_at))
    return out


def web_document_id(url: str) -> str:
    return f"web-{url_key(url)}"


def _fetch_web_documents(question: str, cfg: GateConfig, web_client: SearchClient,
                         trace: GateTrace) -> list[Document]:
    """Search and fetch web results into Documents (origin=web).

    A failed page fetch falls back to the result snippet; results with no
    usable text are dropped. The publication date is the fetched page's when
    available, else the search result's, else the fetch time.
    """
    trace.web_calls += 1
    try:
        results = web_client.search(question, cfg.n_web)
    except RaggateError as exc:
        raise WebSearchFailed(str(exc)) from exc

    docs = []
    seen_urls = set()
    for result in results:
        if result.url in seen_urls:
            continue
        seen_urls.add(result.url)
        fetched_date = None
        try:
            body, fetched_date = web_client.fetch(result.url)
        except RaggateError:
            body = result.snippet
        if not tokenize(body):
            continue
        docs.append(Document(
            id=web_document_id(result.url),
            published_at=fetched_date or result.published_at or datetime.now(timezone.utc).replace(microsecond=0),
            title=result.title,
            summary=body,
            topics=[],
            source=result.url,
            origin="web",
        ))
    return docs


def retrieve(question: str, question_date: datetime, cfg: GateConfig, enc: EncoderPair,
             ix: VectorIndex, web_client: Optional[SearchClient] = None,
             ) -> tuple[list[RetrievedParagraph], GateTrace]:
    """Run one gated retrieval; returns the merged ranked paragraphs and the
    audit trace. ``question_date`` is carried by the caller into prompting and
    does not affect retrieval itself."""
    if not (cfg.use_kb or cfg.use_web):
        raise ValueError("at least one of use_kb, use_web must be enabled")
    if cfg.use_web and web_client is None:
        raise ValueError("use_web requires a web client")

    trace = GateTrace(local_max_score=None, web_search_performed=False, web_calls=0,
                      kb_documents_added=0, result_count=0)
    q_emb = enc.encode_query(question)

    local: list[RetrievedParagraph] = []
    if cfg.use_kb:
        t0 = time.perf_counter()
        hits = ix.search(q_emb, cfg.k, cfg.metric)
        trace.timings["local_search_ms"] = (time.perf_counter() - t0) * 1000.0
        local = _local_paragraphs(ix, hits)
        if hits:
            trace.local_max_score = hits[0].score

    best_local = trace.local_max_score
    if (best_local is not None and best_local > cfg.threshold) or not cfg.use_web:
        trace.result_count = len(local)
        return local, trace

    # Web phase.
    trace.web_search_performed = True
    t0 = time.perf_counter()
    try:
        web_docs = _fetch_web_documents(question, cfg, web_client, trace)
    except WebSearchFailed as exc:
        trace.timings["web_search_ms"] = (time.perf_counter() - t0) * 1000.0
        trace.web_degraded = True
        trace.error = str(exc)
        trace.result_count = len(local)
        return local, trace

    scored: list[tuple[Document, Chunk, np.ndarray, float]] = []
    for doc in web_docs:
        for chunk in chunk_document(doc):
            emb = enc.encode_key(chunk.text)
            score = similarity(q_emb, emb, cfg.metric)
            scored.append((doc, chunk, emb, score))
    trace.timings["web_search_ms"] = (time.perf_counter() - t0) * 1000.0

    web_top = sorted(scored, key=lambda s: (-s[3], s[1].chunk_id))[:cfg.k]
    web_paragraphs = [RetrievedParagraph(chunk=chunk, score=score, provenance="web",
                                         source_url=doc.source, published_at=chunk.published_at)
                      for doc, chunk, _, score in web_top]

    t0 = time.perf_counter()
    merged = sorted(local + web_paragraphs, key=_provenance_order)
    deduped: list[RetrievedParagraph] = []
    seen_text = set()
    for para in merged:
        key = _normalized_text(para.chunk.text)
        if key in seen_text:
            continue
        seen_text.add(key)
        deduped.append(para)
    trace.timings["merge_ms"] = (time.perf_counter() - t0) * 1000.0

    if cfg.auto_update:
        t0 = time.perf_counter()
        qualifying: dict[str, list[tuple[Chunk, np.ndarray]]] = {}
        doc_hit: dict[str, bool] = {}
        for doc, chunk, emb, score in scored:
            qualifying.setdefault(doc.id, []).append((chunk, emb))
            doc_hit[doc.id] = doc_hit.get(doc.id, False) or score > cfg.threshold
        for doc_id, items in qualifying.items():
            if doc_hit[doc_id] and not ix.has_document(doc_id):
                ix.add_chunks(items)
                trace.kb_documents_added += 1
        trace.timings["kb_update_ms"] = (time.perf_counter() - t0) * 1000.0

    trace.result_count = len(deduped)
    return deduped, trace


def save_web_document(url: str, web_client: SearchClient, enc: EncoderPair,
                      ix: VectorIndex) -> SaveWebResult:
    """Fetch a page and add it to the knowledge base; idempotent by url.

    A repeat call for a url already in the index is a no-op reporting
    ``already_present=True`` and a chunk count of 0.
    """
    doc_id = web_document_id(url)
    if ix.has_document(doc_id):
        return SaveWebResult(doc_id=doc_id, chunk_count=0, already_present=True)
    body, fetched_date = web_client.fetch(url)
    doc = Document(
        id=doc_id,
        published_at=fetched_date or datetime.now(timezone.utc).replace(microsecond=0),
        title="",
        summary=body,
        topics=[],
        source=url,
        origin="web",
    )
    chunks = chunk_document(doc)  # raises EmptyDocument on empty pages
    items = [(chunk, enc.encode_key(chunk.text)) for chunk in chunks]
    ix.add_chunks(items)
    return SaveWebResult(doc_id=doc_id, chunk_count=len(items), already_present=False)
