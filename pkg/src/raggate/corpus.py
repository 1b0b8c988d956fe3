"""Document model, tokenization, and paragraph chunking.

Documents store a timestamped summary body (title + summary + topics). Bodies
are split into sentence-greedy chunks of at most ``chunk_limit`` tokens
(default 250), the unit of embedding and retrieval everywhere else in the
package.

Tokenizer rule (deterministic, language-agnostic):
  * text is lowercased;
  * each CJK character (Han ideographs, kana, hangul syllables) is its own
    token;
  * any other run of Unicode letters/digits is one token;
  * everything else is a separator.
"""

from __future__ import annotations

import hashlib
import json
from bisect import bisect_left
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Iterable, Iterator, Literal

from .errors import BadTimestamp, EmptyDocument, TooFewFields

TIMESTAMP_FORMAT = "%Y-%m-%d %H:%M:%S"
DEFAULT_CHUNK_LIMIT = 250

Origin = Literal["local", "web"]

# Sentence-final punctuation; a boundary only when followed by whitespace or
# end of text, so "7.5" or "6862.HK" never split.
_SENTENCE_END = "。！？.!?"

_CJK_RANGES = (
    (0x3040, 0x30FF),    # hiragana, katakana
    (0x3400, 0x4DBF),    # CJK extension A
    (0x4E00, 0x9FFF),    # CJK unified ideographs
    (0xAC00, 0xD7AF),    # hangul syllables
    (0xF900, 0xFAFF),    # CJK compatibility ideographs
    (0x20000, 0x2EBEF),  # CJK extensions B..F
)


def is_cjk_char(ch: str) -> bool:
    cp = ord(ch)
    return any(lo <= cp <= hi for lo, hi in _CJK_RANGES)


def parse_timestamp(value: str) -> datetime:
    """Parse ``YYYY-MM-DD HH:MM:SS`` or ISO-8601 into an aware UTC datetime."""
    text = value.strip()
    try:
        dt = datetime.strptime(text, TIMESTAMP_FORMAT)
        return dt.replace(tzinfo=timezone.utc)
    except ValueError:
        pass
    try:
        dt = datetime.fromisoformat(text.replace("Z", "+00:00"))
    except ValueError as exc:
        raise BadTimestamp(f"cannot parse timestamp: {value!r}") from exc
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return dt.astimezone(timezone.utc).replace(microsecond=0)


def format_timestamp(dt: datetime) -> str:
    """Render an aware datetime as ``YYYY-MM-DD HH:MM:SS`` (UTC)."""
    if dt.tzinfo is not None:
        dt = dt.astimezone(timezone.utc)
    return dt.strftime(TIMESTAMP_FORMAT)


@dataclass
class Document:
    """A source text with temporal metadata; ``summary`` is the stored body."""

    id: str
    published_at: datetime
    title: str
    summary: str
    topics: list[str] = field(default_factory=list)
    source: str = ""
    origin: Origin = "local"

    def __post_init__(self) -> None:
        if self.origin not in ("local", "web"):
            raise ValueError(f"origin must be 'local' or 'web', got {self.origin!r}")


@dataclass(frozen=True)
class Chunk:
    """A contiguous slice of a document body, at most ``chunk_limit`` tokens."""

    doc_id: str
    index_in_doc: int
    text: str
    token_count: int
    published_at: datetime

    @property
    def chunk_id(self) -> str:
        return f"{self.doc_id}#{self.index_in_doc}"


def tokenize(text: str) -> list[str]:
    """Split text into lowercase tokens (see module docstring for the rule)."""
    return [tok for tok, _, _ in _token_spans(text)]


def _token_spans(text: str) -> list[tuple[str, int, int]]:
    """Tokens with their (start, end) character offsets into ``text``."""
    spans: list[tuple[str, int, int]] = []
    run_start = -1
    for i, ch in enumerate(text):
        if is_cjk_char(ch):
            if run_start >= 0:
                spans.append((text[run_start:i].lower(), run_start, i))
                run_start = -1
            spans.append((ch.lower(), i, i + 1))
        elif ch.isalnum():
            if run_start < 0:
                run_start = i
        else:
            if run_start >= 0:
                spans.append((text[run_start:i].lower(), run_start, i))
                run_start = -1
    if run_start >= 0:
        spans.append((text[run_start:].lower(), run_start, len(text)))
    return spans


def _sentence_boundaries(text: str) -> list[int]:
    """Offsets of sentence-final punctuation followed by whitespace or end."""
    bounds = []
    last = len(text) - 1
    for i, ch in enumerate(text):
        if ch in _SENTENCE_END and (i == last or text[i + 1].isspace()):
            bounds.append(i)
    return bounds


def chunk_document(doc: Document, chunk_limit: int = DEFAULT_CHUNK_LIMIT) -> list[Chunk]:
    """Split a document body into chunks of at most ``chunk_limit`` tokens.

    Sentences are packed greedily into the current chunk until the next
    sentence would exceed the limit. A single sentence longer than the limit
    is hard-split at ``chunk_limit``-token boundaries; the remainder stays
    open for further sentences. Chunk texts are slices of the original body,
    so joining them preserves the document's token sequence exactly.
    """
    if chunk_limit < 1:
        raise ValueError("chunk_limit must be >= 1")
    body = doc.summary
    spans = _token_spans(body)
    if not spans:
        raise EmptyDocument(f"document {doc.id!r} has no tokens")

    bounds = _sentence_boundaries(body)
    # Group token spans into sentences: a token belongs to the sentence that
    # ends at the first boundary at-or-after its start offset.
    sentences: list[list[tuple[str, int, int]]] = []
    current_sid = -1
    for span in spans:
        sid = bisect_left(bounds, span[1])
        if sid != current_sid:
            sentences.append([])
            current_sid = sid
        sentences[-1].append(span)

    packed: list[list[tuple[str, int, int]]] = []
    current: list[tuple[str, int, int]] = []
    for sentence in sentences:
        if len(sentence) > chunk_limit:
            if current:
                packed.append(current)
            full, rest = divmod(len(sentence), chunk_limit)
            for k in range(full):
                packed.append(sentence[k * chunk_limit:(k + 1) * chunk_limit])
            current = sentence[full * chunk_limit:] if rest else []
        elif len(current) + len(sentence) > chunk_limit:
            packed.append(current)
            current = list(sentence)
        else:
            current.extend(sentence)
    if current:
        packed.append(current)

    chunks = []
    for idx, group in enumerate(packed):
        start, end = group[0][1], group[-1][2]
        chunks.append(Chunk(
            doc_id=doc.id,
            index_in_doc=idx,
            text=body[start:end],
            token_count=len(group),
            published_at=doc.published_at,
        ))
    return chunks


# -- legacy ';'-concatenated record format ---------------------------------

def _legacy_id(line: str) -> str:
    return "leg-" + hashlib.sha256(line.strip().encode("utf-8")).hexdigest()[:16]


def parse_legacy_record(line: str) -> Document:
    """Parse one ``timestamp;title:summary;topic;...`` record into a Document.

    The first field must parse as ``YYYY-MM-DD HH:MM:SS``. The second field
    splits at its first fullwidth or ASCII colon into title and summary; with
    no colon the whole field is the summary. Remaining fields are topics, the
    trailing "." of the last topic is stripped. The id is derived from the
    record content, so identical lines map to the same document.
    """
    fields = [f.strip() for f in line.split(";")]
    if len(fields) < 2:
        raise TooFewFields(f"expected >= 2 ';'-separated fields, got {len(fields)}")
    try:
        published_at = datetime.strptime(fields[0], TIMESTAMP_FORMAT).replace(tzinfo=timezone.utc)
    except ValueError as exc:
        raise BadTimestamp(f"bad timestamp field: {fields[0]!r}") from exc

    head = fields[1]
    colon = min((i for i in (head.find("："), head.find(":")) if i >= 0), default=-1)
    if colon >= 0:
        title, summary = head[:colon].strip(), head[colon + 1:].strip()
    else:
        title, summary = "", head

    topics = [t for t in fields[2:] if t]
    if topics:
        topics[-1] = topics[-1].removesuffix(".")
    return Document(
        id=_legacy_id(line),
        published_at=published_at,
        title=title,
        summary=summary,
        topics=topics,
    )


def serialize_legacy_record(doc: Document) -> str:
    """Inverse of :func:`parse_legacy_record` for ';'-free field values."""
    line = f"{format_timestamp(doc.published_at)};{doc.title}:{doc.summary}"
    if doc.topics:
        line += ";" + ";".join(doc.topics) + "."
    return line


# -- JSONL corpus format ----------------------------------------------------

def document_to_json(doc: Document) -> dict:
    return {
        "id": doc.id,
        "published_at": doc.published_at.astimezone(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ"),
        "title": doc.title,
        "summary": doc.summary,
        "topics": list(doc.topics),
        "source": doc.source,
        "origin": doc.origin,
    }


def document_from_json(obj: dict) -> Document:
    return Document(
        id=str(obj["id"]),
        published_at=parse_timestamp(str(obj["published_at"])),
        title=str(obj.get("title", "")),
        summary=str(obj["summary"]),
        topics=[str(t) for t in obj.get("topics", [])],
        source=str(obj.get("source", "")),
        origin=obj.get("origin", "local"),
    )


def read_corpus_jsonl(path: str) -> Iterator[Document]:
    """Yield Documents from a JSONL file; malformed lines raise ValueError
    carrying the 1-based line number."""
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                yield document_from_json(json.loads(line))
            except (json.JSONDecodeError, KeyError, BadTimestamp) as exc:
                raise ValueError(f"line {lineno}: {exc}") from exc


def read_corpus_legacy(path: str) -> Iterator[Document]:
    """Yield Documents from a legacy ';'-separated text file."""
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                yield parse_legacy_record(line.rstrip("\n"))
            except (BadTimestamp, TooFewFields) as exc:
                raise ValueError(f"line {lineno}: {exc}") from exc


def write_corpus_jsonl(path: str, docs: Iterable[Document]) -> int:
    count = 0
    with open(path, "w", encoding="utf-8") as fh:
        for doc in docs:
            fh.write(json.dumps(document_to_json(doc), ensure_ascii=False) + "\n")
            count += 1
    return count
