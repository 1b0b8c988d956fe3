"""Retrieval metrics (MAP@K / MAR@K) and the benchmark runner.

AP@K normalizes by min(|relevant|, K), the standard @K convention; MAR@K is
macro-averaged recall@K over queries. The benchmark runner scores every
(encoder, similarity metric) combination over one chunked corpus, mirroring
the trained-vs-untrained encoder comparison protocol.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Sequence, Set

from .corpus import Document, chunk_document
from .encoder import EncoderPair
from .errors import EmptyRelevantSet, MissingChunk
from .index import SimilarityMetric, VectorIndex


@dataclass(frozen=True)
class Judgment:
    query_id: str
    query_text: str
    relevant_chunk_ids: frozenset[str]

    def __post_init__(self) -> None:
        if not self.relevant_chunk_ids:
            raise EmptyRelevantSet(f"query {self.query_id!r} has no relevant chunks")


@dataclass
class EvalReport:
    encoder_label: str
    metric_label: str
    k: int
    map_at_k: float
    mar_at_k: float
    per_query: list[dict]


def average_precision_at_k(ranked: Sequence[str], relevant: Set[str], k: int) -> float:
    """AP@K = (1 / min(|relevant|, K)) * sum of precision@i at relevant ranks i <= K."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if not relevant:
        raise EmptyRelevantSet("relevant set is empty")
    hits = 0
    total = 0.0
    for i, chunk_id in enumerate(ranked[:k], start=1):
        if chunk_id in relevant:
            hits += 1
            total += hits / i
    return total / min(len(relevant), k)


def recall_at_k(ranked: Sequence[str], relevant: Set[str], k: int) -> float:
    if k < 1:
        raise ValueError("k must be >= 1")
    if not relevant:
        raise EmptyRelevantSet("relevant set is empty")
    return len(set(ranked[:k]) & set(relevant)) / len(relevant)


def run_benchmark(docs: Sequence[Document], judgments: Sequence[Judgment],
                  encoders: Sequence[tuple[str, EncoderPair]],
                  metrics: Sequence[SimilarityMetric], k: int = 5,
                  chunk_limit: int = 250) -> list[EvalReport]:
    """One EvalReport per (encoder, metric) cell over a shared chunked corpus."""
    chunks = [chunk for doc in docs for chunk in chunk_document(doc, chunk_limit)]
    chunk_ids = {c.chunk_id for c in chunks}
    for judgment in judgments:
        missing = judgment.relevant_chunk_ids - chunk_ids
        if missing:
            raise MissingChunk(f"query {judgment.query_id!r} judges unknown chunks: {sorted(missing)}")

    ordered = sorted(judgments, key=lambda j: j.query_id)
    reports = []
    for label, enc in encoders:
        ix = VectorIndex(enc.dim)
        ix.add_chunks([(c, enc.encode_key(c.text)) for c in chunks])
        query_embeddings = [(j, enc.encode_query(j.query_text)) for j in ordered]
        for metric in metrics:
            per_query = []
            for judgment, q_emb in query_embeddings:
                ranked = [hit.chunk_id for hit in ix.search(q_emb, k, metric)]
                per_query.append({
                    "query_id": judgment.query_id,
                    "average_precision": average_precision_at_k(ranked, judgment.relevant_chunk_ids, k),
                    "recall": recall_at_k(ranked, judgment.relevant_chunk_ids, k),
                })
            n = len(per_query)
            reports.append(EvalReport(
                encoder_label=label,
                metric_label=metric.value,
                k=k,
                map_at_k=sum(q["average_precision"] for q in per_query) / n if n else 0.0,
                mar_at_k=sum(q["recall"] for q in per_query) / n if n else 0.0,
                per_query=per_query,
            ))
    return reports


# -- judgments file (JSONL) ---------------------------------------------------

def read_judgments_jsonl(path: str) -> list[Judgment]:
    judgments = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                judgments.append(Judgment(
                    query_id=str(obj["query_id"]),
                    query_text=str(obj["query_text"]),
                    relevant_chunk_ids=frozenset(str(c) for c in obj["relevant_chunk_ids"]),
                ))
            except (json.JSONDecodeError, KeyError, EmptyRelevantSet) as exc:
                raise ValueError(f"line {lineno}: {exc}") from exc
    return judgments


def write_judgments_jsonl(path: str, judgments: Iterable[Judgment]) -> int:
    count = 0
    with open(path, "w", encoding="utf-8") as fh:
        for judgment in judgments:
            fh.write(json.dumps({
                "query_id": judgment.query_id,
                "query_text": judgment.query_text,
                "relevant_chunk_ids": sorted(judgment.relevant_chunk_ids),
            }, ensure_ascii=False) + "\n")
            count += 1
    return count


# -- report rendering ---------------------------------------------------------

def reports_to_json(reports: Sequence[EvalReport]) -> list[dict]:
    return [{
        "encoder": r.encoder_label,
        "metric": r.metric_label,
        "k": r.k,
        "map_at_k": r.map_at_k,
        "mar_at_k": r.mar_at_k,
        "per_query": r.per_query,
    } for r in reports]


def format_report_table(reports: Sequence[EvalReport]) -> str:
    """Aligned plain-text summary, one row per (encoder, metric) cell."""
    headers = ("encoder", "metric", f"MAP@{reports[0].k}" if reports else "MAP@K",
               f"MAR@{reports[0].k}" if reports else "MAR@K")
    rows = [(r.encoder_label, r.metric_label, f"{r.map_at_k:.4f}", f"{r.mar_at_k:.4f}")
            for r in reports]
    widths = [max(len(h), *(len(row[i]) for row in rows)) if rows else len(h)
              for i, h in enumerate(headers)]
    def fmt(row):
        return "  ".join(cell.ljust(widths[i]) for i, cell in enumerate(row)).rstrip()
    lines = [fmt(headers), fmt(tuple("-" * w for w in widths))]
    lines.extend(fmt(row) for row in rows)
    return "\n".join(lines)
