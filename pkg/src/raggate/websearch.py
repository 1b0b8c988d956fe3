"""Pluggable web search and page fetch.

Two implementations of the same client contract:

* :class:`FixtureSearchClient` serves canned results from a directory, for
  deterministic tests and offline demos. Layout::

      <dir>/queries.json   map of exact query string -> list of result objects
                           with keys url, title, snippet and optional
                           published_at ("YYYY-MM-DD HH:MM:SS")
      <dir>/pages/<sha256(url)[:16]>.txt   page body for fetch(url)

* :class:`HttpSearchClient` adapts any JSON-over-HTTP endpoint that answers
  ``GET <search_url>?q=<query>&n=<count>`` with a JSON array of objects with
  keys url, title, snippet (optional published_at). ``fetch`` GETs the url
  and strips HTML to text.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from datetime import datetime
from html.parser import HTMLParser
from pathlib import Path
from typing import Optional

import httpx

from .corpus import parse_timestamp
from .errors import (
    BackendTimeout,
    BadFixtureFormat,
    BadTimestamp,
    FetchFailed,
    MalformedResponse,
    NonSuccessStatus,
)


@dataclass(frozen=True)
class SearchResult:
    url: str
    title: str
    snippet: str
    rank: int
    published_at: Optional[datetime] = None


class SearchClient:
    """Contract: search(query, n) -> ranked results; fetch(url) -> (text, date?)."""

    def search(self, query: str, n: int) -> list[SearchResult]:
        raise NotImplementedError

    def fetch(self, url: str) -> tuple[str, Optional[datetime]]:
        raise NotImplementedError


def url_key(url: str) -> str:
    """Stable short key for a url; names fixture page files and web doc ids."""
    return hashlib.sha256(url.encode("utf-8")).hexdigest()[:16]


class FixtureSearchClient(SearchClient):
    """Deterministic client backed by a fixture directory; counts calls."""

    def __init__(self, fixture_dir: str):
        self.dir = Path(fixture_dir)
        self.search_calls = 0
        self.fetch_calls = 0
        queries_path = self.dir / "queries.json"
        try:
            raw = json.loads(queries_path.read_text(encoding="utf-8"))
        except FileNotFoundError as exc:
            raise BadFixtureFormat(f"missing {queries_path}") from exc
        except json.JSONDecodeError as exc:
            raise BadFixtureFormat(f"queries.json is not valid JSON: {exc}") from exc
        if not isinstance(raw, dict):
            raise BadFixtureFormat("queries.json must map query strings to result lists")
        self._queries: dict[str, list[SearchResult]] = {}
        for query, items in raw.items():
            if not isinstance(items, list):
                raise BadFixtureFormat(f"results for {query!r} must be a list")
            results = []
            for rank, item in enumerate(items, start=1):
                try:
                    published = item.get("published_at")
                    results.append(SearchResult(
                        url=item["url"],
                        title=item.get("title", ""),
                        snippet=item.get("snippet", ""),
                        rank=rank,
                        published_at=parse_timestamp(published) if published else None,
                    ))
                except (TypeError, KeyError, BadTimestamp) as exc:
                    raise BadFixtureFormat(f"bad result for {query!r}: {exc}") from exc
            self._queries[query] = results

    def search(self, query: str, n: int) -> list[SearchResult]:
        self.search_calls += 1
        return list(self._queries.get(query, []))[:n]

    def fetch(self, url: str) -> tuple[str, Optional[datetime]]:
        self.fetch_calls += 1
        page = self.dir / "pages" / f"{url_key(url)}.txt"
        if not page.exists():
            raise FetchFailed(f"no fixture page for {url}")
        return page.read_text(encoding="utf-8"), None


def build_fixture_dir(path: str | Path, queries: dict[str, list[dict]],
                      pages: dict[str, str]) -> Path:
    """Write a fixture directory in the documented layout.

    ``queries`` maps query strings to lists of result objects (url, title,
    snippet, optional published_at); ``pages`` maps urls to page bodies.
    """
    root = Path(path)
    (root / "pages").mkdir(parents=True, exist_ok=True)
    (root / "queries.json").write_text(
        json.dumps(queries, ensure_ascii=False, indent=2), encoding="utf-8")
    for url, body in pages.items():
        (root / "pages" / f"{url_key(url)}.txt").write_text(body, encoding="utf-8")
    return root


class _TextExtractor(HTMLParser):
    """Collects text; block-level tags become newlines, script/style dropped."""

    _BLOCK_TAGS = {"p", "div", "br", "li", "ul", "ol", "table", "tr", "section",
                   "article", "header", "footer", "h1", "h2", "h3", "h4", "h5", "h6"}

    def __init__(self) -> None:
        super().__init__(convert_charrefs=True)
        self.parts: list[str] = []
        self._skip_depth = 0

    def handle_starttag(self, tag, attrs):
        if tag in ("script", "style"):
            self._skip_depth += 1
        elif tag in self._BLOCK_TAGS:
            self.parts.append("\n")

    def handle_endtag(self, tag):
        if tag in ("script", "style"):
            self._skip_depth = max(0, self._skip_depth - 1)
        elif tag in self._BLOCK_TAGS:
            self.parts.append("\n")

    def handle_data(self, data):
        if not self._skip_depth:
            self.parts.append(data)


def html_to_text(html: str) -> str:
    """Strip tags to text: block tags separate lines, whitespace runs within a
    line collapse to one space, empty lines are dropped."""
    extractor = _TextExtractor()
    extractor.feed(html)
    extractor.close()
    lines = "".join(extractor.parts).split("\n")
    cleaned = [" ".join(line.split()) for line in lines]
    return "\n".join(line for line in cleaned if line)


class HttpSearchClient(SearchClient):
    """Generic JSON-over-HTTP search adapter (see module docstring)."""

    def __init__(self, search_url: str, fetch_timeout: float = 10.0):
        self.search_url = search_url
        self.fetch_timeout = fetch_timeout

    def search(self, query: str, n: int) -> list[SearchResult]:
        try:
            resp = httpx.get(self.search_url, params={"q": query, "n": n},
                             timeout=self.fetch_timeout)
        except httpx.TimeoutException as exc:
            raise BackendTimeout(f"search timed out: {exc}") from exc
        if resp.status_code != 200:
            raise NonSuccessStatus(resp.status_code)
        try:
            items = resp.json()
            if not isinstance(items, list):
                raise TypeError("expected a JSON array")
            results = []
            for rank, item in enumerate(items[:n], start=1):
                published = item.get("published_at")
                results.append(SearchResult(
                    url=item["url"],
                    title=item.get("title", ""),
                    snippet=item.get("snippet", ""),
                    rank=rank,
                    published_at=parse_timestamp(published) if published else None,
                ))
            return results
        except (ValueError, TypeError, KeyError, AttributeError, BadTimestamp) as exc:
            raise MalformedResponse(f"bad search response: {exc}") from exc

    def fetch(self, url: str) -> tuple[str, Optional[datetime]]:
        try:
            resp = httpx.get(url, timeout=self.fetch_timeout, follow_redirects=True)
        except httpx.HTTPError as exc:
            raise FetchFailed(f"fetch of {url} failed: {exc}") from exc
        if resp.status_code != 200:
            raise FetchFailed(f"fetch of {url} returned status {resp.status_code}")
        return html_to_text(resp.text), None
