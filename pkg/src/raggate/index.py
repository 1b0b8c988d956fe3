"""Local knowledge base: chunk storage and exact top-K similarity search.

A flat (exhaustive) index over float64 embeddings. Search is an exact scan,
so results are reproducible and serve as ground truth for any approximate
drop-in later. Ties are broken by ascending chunk id.

Concurrency: many readers or one writer. Mutations build a fresh immutable
state and swap it in atomically, so a search never observes a partially
applied batch.
"""

from __future__ import annotations

import json
import struct
import threading
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence

import numpy as np

from .corpus import Chunk, format_timestamp, parse_timestamp
from .errors import BadSnapshot, DimensionMismatch, DuplicateChunkId

_INDEX_MAGIC = b"RGIX"
_INDEX_VERSION = 1


class SimilarityMetric(Enum):
    COSINE = "cosine"
    DOT = "dot"
    EUCLIDEAN = "euclidean"

    @classmethod
    def parse(cls, name: str) -> "SimilarityMetric":
        try:
            return cls(name.lower())
        except ValueError:
            raise ValueError(f"unknown similarity metric: {name!r}") from None


def cosine(a: np.ndarray, b: np.ndarray) -> float:
    """Cosine similarity; 0.0 when either vector has zero norm."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise DimensionMismatch(f"shapes {a.shape} and {b.shape} differ")
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0.0 or nb == 0.0:
        return 0.0
    return float(a @ b / (na * nb))


def similarity(a: np.ndarray, b: np.ndarray, metric: SimilarityMetric) -> float:
    """Pairwise similarity under a metric; higher is better for all three."""
    if metric is SimilarityMetric.COSINE:
        return cosine(a, b)
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise DimensionMismatch(f"shapes {a.shape} and {b.shape} differ")
    if metric is SimilarityMetric.DOT:
        return float(a @ b)
    return -float(np.linalg.norm(a - b))


@dataclass(frozen=True)
class ScoredHit:
    chunk_id: str
    score: float
    rank: int


class _State:
    """Immutable snapshot of index contents."""

    __slots__ = ("matrix", "norms", "chunk_ids", "chunks", "positions", "doc_ids")

    def __init__(self, matrix: np.ndarray, chunk_ids: list[str], chunks: list[Chunk]):
        self.matrix = matrix
        self.norms = np.linalg.norm(matrix, axis=1) if len(matrix) else np.zeros(0)
        self.chunk_ids = chunk_ids
        self.chunks = chunks
        self.positions = {cid: i for i, cid in enumerate(chunk_ids)}
        self.doc_ids = {c.doc_id for c in chunks}


class VectorIndex:
    """Flat vector index over document chunks."""

    def __init__(self, dim: int):
        if dim < 1:
            raise ValueError("dim must be >= 1")
        self.dim = dim
        self.generation = 0
        self._write_lock = threading.Lock()
        self._state = _State(np.zeros((0, dim)), [], [])

    def __len__(self) -> int:
        return len(self._state.chunk_ids)

    @property
    def n_documents(self) -> int:
        return len(self._state.doc_ids)

    def has_document(self, doc_id: str) -> bool:
        return doc_id in self._state.doc_ids

    def has_chunk(self, chunk_id: str) -> bool:
        return chunk_id in self._state.positions

    def get_chunk(self, chunk_id: str) -> Chunk:
        return self._state.chunks[self._state.positions[chunk_id]]

    def iter_chunks(self) -> Iterable[Chunk]:
        return iter(self._state.chunks)

    def add_chunks(self, items: Sequence[tuple[Chunk, np.ndarray]]) -> int:
        """Add (chunk, embedding) pairs atomically; whole batch fails on any
        duplicate chunk id or dimension mismatch."""
        if not items:
            return 0
        with self._write_lock:
            state = self._state
            new_ids = []
            rows = []
            seen = set()
            for chunk, emb in items:
                emb = np.asarray(emb, dtype=np.float64)
                if emb.shape != (self.dim,):
                    raise DimensionMismatch(f"embedding shape {emb.shape}, expected ({self.dim},)")
                cid = chunk.chunk_id
                if cid in state.positions or cid in seen:
                    raise DuplicateChunkId(cid)
                seen.add(cid)
                new_ids.append(cid)
                rows.append(emb)
            matrix = np.vstack([state.matrix, np.array(rows)]) if len(state.matrix) else np.array(rows)
            self._state = _State(
                matrix,
                state.chunk_ids + new_ids,
                state.chunks + [chunk for chunk, _ in items],
            )
            self.generation += 1
            return len(items)

    def _scores(self, state: _State, q: np.ndarray, metric: SimilarityMetric) -> np.ndarray:
        if metric is SimilarityMetric.COSINE:
            qn = np.linalg.norm(q)
            if qn == 0.0:
                return np.zeros(len(state.chunk_ids))
            dots = state.matrix @ q
            out = np.zeros(len(dots))
            nonzero = state.norms > 0.0
            out[nonzero] = dots[nonzero] / (state.norms[nonzero] * qn)
            return out
        if metric is SimilarityMetric.DOT:
            return state.matrix @ q
        return -np.linalg.norm(state.matrix - q, axis=1)

    def search(self, q: np.ndarray, k: int,
               metric: SimilarityMetric = SimilarityMetric.COSINE) -> list[ScoredHit]:
        """Exact top-``k`` scan; ties broken by ascending chunk id."""
        if k < 1:
            raise ValueError("k must be >= 1")
        q = np.asarray(q, dtype=np.float64)
        if q.shape != (self.dim,):
            raise DimensionMismatch(f"query shape {q.shape}, expected ({self.dim},)")
        state = self._state
        n = len(state.chunk_ids)
        if n == 0:
            return []
        scores = self._scores(state, q, metric)
        if k >= n:
            candidates = range(n)
        else:
            # Every entry strictly above the k-th largest score must win;
            # entries tied with it are resolved by chunk id below.
            kth = np.partition(scores, n - k)[n - k]
            candidates = np.nonzero(scores >= kth)[0]
        order = sorted(candidates, key=lambda i: (-scores[i], state.chunk_ids[i]))[:k]
        return [ScoredHit(chunk_id=state.chunk_ids[i], score=float(scores[i]), rank=r)
                for r, i in enumerate(order, start=1)]

    # -- persistence --------------------------------------------------------
    #
    # Snapshot layout, little-endian:
    #   bytes 0..3    magic "RGIX"
    #   bytes 4..7    version (uint32, currently 1)
    #   bytes 8..11   dim (uint32)
    #   bytes 12..19  count (uint64)
    #   bytes 20..27  metadata byte length L (uint64)
    #   L bytes       UTF-8 JSON array of per-entry metadata objects with keys
    #                 doc_id, index_in_doc, text, token_count, published_at
    #   then count*dim float64, row-major, in entry order.

    def save(self, path: str) -> None:
        state = self._state
        meta = [{
            "doc_id": c.doc_id,
            "index_in_doc": c.index_in_doc,
            "text": c.text,
            "token_count": c.token_count,
            "published_at": format_timestamp(c.published_at),
        } for c in state.chunks]
        meta_bytes = json.dumps(meta, ensure_ascii=False).encode("utf-8")
        with open(path, "wb") as fh:
            fh.write(_INDEX_MAGIC)
            fh.write(struct.pack("<IIQQ", _INDEX_VERSION, self.dim,
                                 len(state.chunks), len(meta_bytes)))
            fh.write(meta_bytes)
            fh.write(np.ascontiguousarray(state.matrix, dtype="<f8").tobytes())

    @classmethod
    def load(cls, path: str) -> "VectorIndex":
        with open(path, "rb") as fh:
            magic = fh.read(4)
            if magic != _INDEX_MAGIC:
                raise BadSnapshot(f"bad index magic: {magic!r}")
            version, dim, count, meta_len = struct.unpack("<IIQQ", fh.read(24))
            if version != _INDEX_VERSION:
                raise BadSnapshot(f"unsupported index version: {version}")
            try:
                meta = json.loads(fh.read(meta_len).decode("utf-8"))
            except (UnicodeDecodeError, json.JSONDecodeError) as exc:
                raise BadSnapshot(f"corrupt metadata block: {exc}") from exc
            payload = fh.read(8 * count * dim)
            if len(payload) != 8 * count * dim or fh.read(1):
                raise BadSnapshot("embedding payload size mismatch")
        if len(meta) != count:
            raise BadSnapshot(f"metadata count {len(meta)} != header count {count}")
        matrix = np.frombuffer(payload, dtype="<f8").reshape(count, dim).copy() \
            if count else np.zeros((0, dim))
        chunks = [Chunk(
            doc_id=m["doc_id"],
            index_in_doc=int(m["index_in_doc"]),
            text=m["text"],
            token_count=int(m["token_count"]),
            published_at=parse_timestamp(m["published_at"]),
        ) for m in meta]
        ix = cls(dim)
        ix._state = _State(matrix, [c.chunk_id for c in chunks], chunks)
        return ix
