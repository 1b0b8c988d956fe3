"""Ranking, prompt assembly with temporal grounding, and citations.

The top J ranked paragraphs are rendered into the prompt's context block,
one line each as ``<published date>:<text>``; the remaining paragraphs become
supplementary citations. The instruction templates live under
``raggate/templates`` as versioned assets and are golden-tested byte for
byte; an English and a Chinese variant exist, selected by the share of CJK
characters in the question when the language is ``auto``.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime
from functools import lru_cache
from importlib import resources
from typing import Literal
from urllib.parse import urlparse

from .corpus import format_timestamp, is_cjk_char
from .gate import RetrievedParagraph

LOCAL_CITATION_LABEL = "Local Doc"

# Share of CJK characters in the question above which the Chinese template
# is selected under template_language="auto".
CJK_RATIO_THRESHOLD = 0.30

TemplateLanguage = Literal["auto", "english", "chinese"]


@dataclass
class PromptConfig:
    j: int = 3
    template_language: TemplateLanguage = "auto"

    def __post_init__(self) -> None:
        if self.j < 1:
            raise ValueError("j must be >= 1")
        if self.template_language not in ("auto", "english", "chinese"):
            raise ValueError(f"unknown template_language: {self.template_language!r}")

    def validate_against_k(self, k: int) -> None:
        if self.j >= k:
            raise ValueError(f"j must be < k, got j={self.j}, k={k}")


@dataclass
class PromptBundle:
    prompt_text: str
    used: list[RetrievedParagraph]
    extra_citations: list[RetrievedParagraph]
    question_date: datetime
    language: str = "english"


@lru_cache(maxsize=None)
def _template(name: str) -> str:
    return resources.files("raggate.templates").joinpath(name).read_text(encoding="utf-8")


def rank(results: list[RetrievedParagraph]) -> list[RetrievedParagraph]:
    """Sort by descending score; ties prefer local over web, then ascending
    chunk id. Stable, so fully tied entries keep their input order."""
    return sorted(results, key=lambda p: (-p.score, 0 if p.provenance == "local" else 1,
                                          p.chunk.chunk_id))


def cjk_ratio(text: str) -> float:
    if not text:
        return 0.0
    return sum(1 for ch in text if is_cjk_char(ch)) / len(text)


def choose_language(question: str, cfg: PromptConfig) -> str:
    if cfg.template_language != "auto":
        return cfg.template_language
    return "chinese" if cjk_ratio(question) >= CJK_RATIO_THRESHOLD else "english"


def build_prompt(ranked: list[RetrievedParagraph], question: str,
                 question_date: datetime, cfg: PromptConfig) -> PromptBundle:
    """Fill the instruction template with the top-J context lines, the
    question date, and the question. Empty input selects the no-context
    template variant."""
    language = choose_language(question, cfg)
    used = ranked[:cfg.j]
    extra = ranked[cfg.j:]
    date_str = format_timestamp(question_date)

    suffix = "zh" if language == "chinese" else "en"
    if used:
        # One physical line per context entry: embedded newlines in chunk
        # text collapse to spaces so the date prefix stays parseable.
        lines = "\n".join(
            f"{format_timestamp(p.published_at)}:{' '.join(p.chunk.text.split())}"
            for p in used)
        text = _template(f"prompt_{suffix}.txt").replace("{CONTEXT_LINES}", lines)
    else:
        text = _template(f"prompt_{suffix}_empty.txt")
    text = text.replace("{QUESTION_DATE}", date_str).replace("{QUESTION}", question)

    return PromptBundle(prompt_text=text, used=used, extra_citations=extra,
                        question_date=question_date, language=language)


def citation_label(paragraph: RetrievedParagraph) -> str:
    """Web paragraphs cite their site; local knowledge-base paragraphs cite
    as 'Local Doc'."""
    if paragraph.provenance != "web" or not paragraph.source_url:
        return LOCAL_CITATION_LABEL
    host = urlparse(paragraph.source_url).netloc.lower().split(":")[0]
    if host.startswith("www."):
        host = host[4:]
    return host or paragraph.source_url


def citation_entries(bundle: PromptBundle) -> list[dict]:
    """Ordered, de-duplicated citations: used sources first, then the
    remaining (K - J) paragraphs; duplicate labels keep their first slot."""
    entries = []
    seen = set()
    for paragraph in [*bundle.used, *bundle.extra_citations]:
        label = citation_label(paragraph)
        if label in seen:
            continue
        seen.add(label)
        entries.append({
            "label": label,
            "url_or_local": paragraph.source_url or "local",
            "rank": len(entries) + 1,
        })
    return entries


def format_citations(bundle: PromptBundle) -> str:
    """Render citations as 'More Details: 1. [A], 2. [B].'; empty without
    any results."""
    entries = citation_entries(bundle)
    if not entries:
        return ""
    listed = ", ".join(f"{e['rank']}. [{e['label']}]" for e in entries)
    return f"More Details: {listed}."
