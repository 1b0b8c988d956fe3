"""End-to-end chat pipeline: gated retrieval -> prompt -> generation -> citations."""

from __future__ import annotations

import threading
import time
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from typing import Optional

from .corpus import format_timestamp
from .encoder import EncoderPair
from .gate import GateConfig, GateTrace, retrieve
from .generation import GenerationBackend, GenerationRequest
from .index import SimilarityMetric, VectorIndex
from .prompting import PromptConfig, build_prompt, citation_entries, format_citations, rank
from .websearch import SearchClient


@dataclass
class EngineState:
    """Everything one deployment needs to answer questions."""

    encoder: EncoderPair
    index: VectorIndex
    gate_config: GateConfig
    prompt_config: PromptConfig
    backend: GenerationBackend
    web_client: Optional[SearchClient] = None
    max_inflight_generations: int = 4
    _generation_slots: threading.Semaphore = field(init=False, repr=False)

    def __post_init__(self) -> None:
        self._generation_slots = threading.Semaphore(self.max_inflight_generations)


@dataclass
class ChatResult:
    answer: str
    citations: list[dict]
    citations_text: str
    retrieved: list[dict]
    trace: GateTrace
    timings: dict[str, float]
    prompt_text: str
    question_date: datetime
    language: str


def effective_configs(state: EngineState, *, k: Optional[int] = None, j: Optional[int] = None,
                      use_kb: Optional[bool] = None, use_web: Optional[bool] = None,
                      metric: Optional[str] = None) -> tuple[GateConfig, PromptConfig]:
    """Apply per-request overrides; raises ValueError on invalid combinations
    (including j >= k)."""
    gate_overrides = {}
    if k is not None:
        gate_overrides["k"] = k
    if use_kb is not None:
        gate_overrides["use_kb"] = use_kb
    if use_web is not None:
        gate_overrides["use_web"] = use_web
    if metric is not None:
        gate_overrides["metric"] = SimilarityMetric.parse(metric)
    gate_cfg = replace(state.gate_config, **gate_overrides)
    prompt_cfg = replace(state.prompt_config, **({"j": j} if j is not None else {}))
    prompt_cfg.validate_against_k(gate_cfg.k)
    if not (gate_cfg.use_kb or gate_cfg.use_web):
        raise ValueError("at least one of use_kb, use_web must be enabled")
    return gate_cfg, prompt_cfg


def trace_to_json(trace: GateTrace) -> dict:
    return {
        "local_max_score": trace.local_max_score,
        "web_search_performed": trace.web_search_performed,
        "web_calls": trace.web_calls,
        "kb_documents_added": trace.kb_documents_added,
        "result_count": trace.result_count,
        "web_degraded": trace.web_degraded,
        "error": trace.error,
    }


def answer_question(state: EngineState, question: str,
                    question_date: Optional[datetime] = None, *,
                    k: Optional[int] = None, j: Optional[int] = None,
                    use_kb: Optional[bool] = None, use_web: Optional[bool] = None,
                    metric: Optional[str] = None,
                    max_tokens: Optional[int] = None) -> ChatResult:
    """Answer one question through the full pipeline.

    ``question_date`` defaults to the current UTC time; pass it explicitly
    for reproducible outputs.
    """
    started = time.perf_counter()
    gate_cfg, prompt_cfg = effective_configs(state, k=k, j=j, use_kb=use_kb,
                                             use_web=use_web, metric=metric)
    if question_date is None:
        question_date = datetime.now(timezone.utc).replace(microsecond=0)

    results, trace = retrieve(question, question_date, gate_cfg, state.encoder,
                              state.index, state.web_client)
    ranked = rank(results)
    bundle = build_prompt(ranked, question, question_date, prompt_cfg)

    request = GenerationRequest(prompt=bundle.prompt_text,
                                **({"max_tokens": max_tokens} if max_tokens is not None else {}))
    t0 = time.perf_counter()
    with state._generation_slots:
        answer = state.backend.generate(request)
    timings = dict(trace.timings)
    timings["generation_ms"] = (time.perf_counter() - t0) * 1000.0
    timings["total_ms"] = (time.perf_counter() - started) * 1000.0

    retrieved = [{
        "chunk_id": p.chunk.chunk_id,
        "score": p.score,
        "provenance": p.provenance,
        "published_at": format_timestamp(p.published_at),
    } for p in ranked]

    return ChatResult(
        answer=answer,
        citations=citation_entries(bundle),
        citations_text=format_citations(bundle),
        retrieved=retrieved,
        trace=trace,
        timings=timings,
        prompt_text=bundle.prompt_text,
        question_date=question_date,
        language=bundle.language,
    )
