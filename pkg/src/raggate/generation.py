"""Pluggable text generation behind a single backend contract.

The stub backend is fully deterministic and answers
``STUB-ANSWER|<context line count>|<first 40 chars of the question>`` so the
whole pipeline can be asserted end to end without model weights. The HTTP
backend adapts any endpoint accepting ``POST {prompt, max_tokens,
temperature, stop}`` and answering ``{"text": ...}``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional

import httpx

from .errors import BackendTimeout, MalformedResponse, NonSuccessStatus

DEFAULT_MAX_TOKENS = 512
DEFAULT_TEMPERATURE = 0.0

# Markers of the shipped prompt templates, used by the stub to read back the
# context block and question without any model.
_CONTEXT_HEADERS = ("Context information:", "已知信息：")
_QUESTION_MARKERS = ("The question is: ", "问题是：")


@dataclass(frozen=True)
class GenerationRequest:
    prompt: str
    max_tokens: int = DEFAULT_MAX_TOKENS
    temperature: float = DEFAULT_TEMPERATURE
    stop: Optional[list[str]] = None

    def __post_init__(self) -> None:
        if self.max_tokens < 1:
            raise ValueError("max_tokens must be >= 1")
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")

    def to_json(self) -> dict:
        return {"prompt": self.prompt, "max_tokens": self.max_tokens,
                "temperature": self.temperature, "stop": self.stop}

    @classmethod
    def from_json(cls, obj: dict) -> "GenerationRequest":
        return cls(prompt=obj["prompt"], max_tokens=obj.get("max_tokens", DEFAULT_MAX_TOKENS),
                   temperature=obj.get("temperature", DEFAULT_TEMPERATURE),
                   stop=obj.get("stop"))


class GenerationBackend:
    """Contract: generate(request) -> response text."""

    def generate(self, request: GenerationRequest) -> str:
        raise NotImplementedError


def count_context_lines(prompt: str) -> int:
    """Number of context lines in a rendered prompt: the non-empty lines
    between the context header and the following blank line (0 when the
    no-context template was used)."""
    lines = prompt.splitlines()
    for i, line in enumerate(lines):
        if line.strip() in _CONTEXT_HEADERS:
            count = 0
            for context_line in lines[i + 1:]:
                if not context_line.strip():
                    break
                count += 1
            return count
    return 0


def extract_question(prompt: str) -> str:
    """The question substring of a rendered prompt, without the template's
    trailing period."""
    for marker in _QUESTION_MARKERS:
        pos = prompt.rfind(marker)
        if pos >= 0:
            question = prompt[pos + len(marker):].strip()
            return question.removesuffix(".").removesuffix("。")
    return ""


class StubBackend(GenerationBackend):
    """Deterministic test backend; output is a pure function of the prompt."""

    def generate(self, request: GenerationRequest) -> str:
        question = extract_question(request.prompt)
        return f"STUB-ANSWER|{count_context_lines(request.prompt)}|{question[:40]}"


def stub_backend() -> GenerationBackend:
    return StubBackend()


class HttpBackend(GenerationBackend):
    """JSON-over-HTTP adapter; retries a timed-out call once."""

    def __init__(self, endpoint: str, timeout: float = 30.0):
        self.endpoint = endpoint
        self.timeout = timeout

    def generate(self, request: GenerationRequest) -> str:
        payload = request.to_json()
        last_exc: Exception | None = None
        for _ in range(2):
            try:
                resp = httpx.post(self.endpoint, json=payload, timeout=self.timeout)
                break
            except httpx.TimeoutException as exc:
                last_exc = exc
        else:
            raise BackendTimeout(f"generation timed out after retry: {last_exc}")
        if resp.status_code != 200:
            raise NonSuccessStatus(resp.status_code)
        try:
            body = resp.json()
            return str(body["text"])
        except (json.JSONDecodeError, ValueError, KeyError, TypeError) as exc:
            raise MalformedResponse(f"bad generation response: {exc}") from exc


def http_backend(endpoint: str, timeout: float = 30.0) -> GenerationBackend:
    return HttpBackend(endpoint, timeout)
