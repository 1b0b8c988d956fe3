"""Trainable dual encoders over hashed term-frequency features.

The key/query encoders are separate linear maps (d x F float64 matrices)
applied to L2-normalized hashed term counts. Training maximizes the
contrastive objective

    l = q . e0 - log sum_{i=0..I} exp(q . e_i)

for a positive paragraph e0 and I negatives, by per-example gradient ascent.
Scores use raw dot products during training; the retrieval similarity metric
is chosen independently at search time.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .corpus import tokenize
from .errors import BadSnapshot, DimensionMismatch, NonFiniteUpdate

DEFAULT_DIM = 64
DEFAULT_FEATURES = 2048
DEFAULT_SEED = 0

_MODEL_MAGIC = b"RGENC001"

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_U64 = 1 << 64


@lru_cache(maxsize=1 << 16)
def _fnv1a64(token: str) -> int:
    h = _FNV_OFFSET
    for byte in token.encode("utf-8"):
        h = ((h ^ byte) * _FNV_PRIME) % _U64
    return h


def featurize(tokens: Sequence[str], n_features: int = DEFAULT_FEATURES) -> np.ndarray:
    """Hashed term counts, L2-normalized; the zero vector for empty input."""
    if n_features < 1:
        raise ValueError("n_features must be >= 1")
    vec = np.zeros(n_features, dtype=np.float64)
    for tok in tokens:
        vec[_fnv1a64(tok) % n_features] += 1.0
    norm = np.linalg.norm(vec)
    if norm > 0.0:
        vec /= norm
    return vec


@dataclass
class EncoderPair:
    """The key and query encoders with their trainable parameters."""

    w_key: np.ndarray
    w_query: np.ndarray
    dim: int
    n_features: int
    seed: int

    @classmethod
    def initialize(cls, dim: int = DEFAULT_DIM, n_features: int = DEFAULT_FEATURES,
                   seed: int = DEFAULT_SEED) -> "EncoderPair":
        """Seeded uniform init in [-1/sqrt(F), 1/sqrt(F)], one independent
        stream per matrix."""
        streams = np.random.SeedSequence(seed).spawn(2)
        scale = 1.0 / np.sqrt(n_features)
        w_key = np.random.default_rng(streams[0]).uniform(-scale, scale, (dim, n_features))
        w_query = np.random.default_rng(streams[1]).uniform(-scale, scale, (dim, n_features))
        return cls(w_key=w_key, w_query=w_query, dim=dim, n_features=n_features, seed=seed)

    def encode_key(self, text: str) -> np.ndarray:
        return embed_key(self, featurize(tokenize(text), self.n_features))

    def encode_query(self, text: str) -> np.ndarray:
        return embed_query(self, featurize(tokenize(text), self.n_features))


def _check_features(enc: EncoderPair, fv: np.ndarray) -> np.ndarray:
    fv = np.asarray(fv, dtype=np.float64)
    if fv.shape != (enc.n_features,):
        raise DimensionMismatch(f"feature vector shape {fv.shape}, expected ({enc.n_features},)")
    return fv


def embed_key(enc: EncoderPair, fv: np.ndarray) -> np.ndarray:
    return enc.w_key @ _check_features(enc, fv)


def embed_query(enc: EncoderPair, fv: np.ndarray) -> np.ndarray:
    return enc.w_query @ _check_features(enc, fv)


@dataclass
class TrainingExample:
    query_text: str
    positive_text: str
    negative_texts: list[str] = field(default_factory=list)

    def __post_init__(self) -> None:
        if self.positive_text in self.negative_texts:
            raise ValueError("positive_text must not appear among negative_texts")


@dataclass
class TrainingReport:
    epoch_objectives: list[float]
    epochs: int
    learning_rate: float
    initial_objective: float


def objective(q: np.ndarray, e0: np.ndarray, negs: Sequence[np.ndarray]) -> float:
    """Contrastive objective; <= 0 always, exactly 0 with no negatives."""
    q = np.asarray(q, dtype=np.float64)
    embeddings = [np.asarray(e0, dtype=np.float64)] + [np.asarray(e, dtype=np.float64) for e in negs]
    for e in embeddings:
        if e.shape != q.shape:
            raise DimensionMismatch(f"embedding shape {e.shape}, expected {q.shape}")
    scores = np.array([q @ e for e in embeddings])
    # log-sum-exp with max shift for stability
    m = scores.max()
    return float(scores[0] - (m + np.log(np.exp(scores - m).sum())))


def _softmax(scores: np.ndarray) -> np.ndarray:
    shifted = np.exp(scores - scores.max())
    return shifted / shifted.sum()


def objective_gradient(enc: EncoderPair, example: TrainingExample) -> tuple[np.ndarray, np.ndarray]:
    """Analytic gradient of the objective w.r.t. (w_key, w_query).

    With scores s_i = q.e_i and p = softmax(s), dl/ds_i = [i==0] - p_i; the
    chain rule through both linear maps gives rank-1 outer products.
    """
    x_query = featurize(tokenize(example.query_text), enc.n_features)
    x_parts = [featurize(tokenize(t), enc.n_features)
               for t in [example.positive_text, *example.negative_texts]]
    q = enc.w_query @ x_query
    embeddings = [enc.w_key @ x for x in x_parts]
    scores = np.array([q @ e for e in embeddings])
    coeff = -_softmax(scores)
    coeff[0] += 1.0

    grad_w_query = np.outer(sum(c * e for c, e in zip(coeff, embeddings)), x_query)
    grad_w_key = np.outer(q, sum(c * x for c, x in zip(coeff, x_parts)))
    return grad_w_key, grad_w_query


def train(enc: EncoderPair, data: Sequence[TrainingExample], epochs: int = 5,
          lr: float = 0.1, seed: int = DEFAULT_SEED) -> TrainingReport:
    """Per-example gradient ascent with a seeded shuffle each epoch.

    Mutates ``enc`` in place. The reported objective per epoch is the mean
    over all examples evaluated after that epoch's updates.
    """
    if epochs < 1:
        raise ValueError("epochs must be >= 1")
    if lr <= 0:
        raise ValueError("lr must be > 0")
    if not data:
        raise ValueError("data must be non-empty")

    def mean_objective() -> float:
        total = 0.0
        for ex in data:
            q = enc.encode_query(ex.query_text)
            e0 = enc.encode_key(ex.positive_text)
            negs = [enc.encode_key(t) for t in ex.negative_texts]
            total += objective(q, e0, negs)
        return total / len(data)

    rng = np.random.default_rng(seed)
    initial = mean_objective()
    per_epoch = []
    for epoch in range(epochs):
        for idx in rng.permutation(len(data)):
            grad_key, grad_query = objective_gradient(enc, data[idx])
            enc.w_key += lr * grad_key
            enc.w_query += lr * grad_query
            if not (np.isfinite(enc.w_key).all() and np.isfinite(enc.w_query).all()):
                raise NonFiniteUpdate(epoch)
        per_epoch.append(mean_objective())
    return TrainingReport(epoch_objectives=per_epoch, epochs=epochs,
                          learning_rate=lr, initial_objective=initial)


# -- model persistence ------------------------------------------------------
#
# Binary container, little-endian:
#   bytes 0..7    magic "RGENC001"
#   bytes 8..11   dim (uint32)
#   bytes 12..15  n_features (uint32)
#   bytes 16..23  seed (int64)
#   then dim*n_features float64 for w_key, row-major,
#   then dim*n_features float64 for w_query, row-major.

def save_model(enc: EncoderPair, path: str) -> None:
    with open(path, "wb") as fh:
        fh.write(_MODEL_MAGIC)
        fh.write(struct.pack("<IIq", enc.dim, enc.n_features, enc.seed))
        fh.write(np.ascontiguousarray(enc.w_key, dtype="<f8").tobytes())
        fh.write(np.ascontiguousarray(enc.w_query, dtype="<f8").tobytes())


def load_model(path: str) -> EncoderPair:
    with open(path, "rb") as fh:
        magic = fh.read(8)
        if magic != _MODEL_MAGIC:
            raise BadSnapshot(f"bad model magic: {magic!r}")
        dim, n_features, seed = struct.unpack("<IIq", fh.read(16))
        n = dim * n_features
        w_key = np.frombuffer(fh.read(8 * n), dtype="<f8").reshape(dim, n_features).copy()
        w_query = np.frombuffer(fh.read(8 * n), dtype="<f8").reshape(dim, n_features).copy()
        if fh.read(1):
            raise BadSnapshot("trailing bytes after model payload")
    return EncoderPair(w_key=w_key, w_query=w_query, dim=dim, n_features=n_features, seed=seed)


# -- training data file (JSONL of TrainingExample) ---------------------------

def read_training_jsonl(path: str) -> list[TrainingExample]:
    examples = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                examples.append(TrainingExample(
                    query_text=str(obj["query_text"]),
                    positive_text=str(obj["positive_text"]),
                    negative_texts=[str(t) for t in obj.get("negative_texts", [])],
                ))
            except (json.JSONDecodeError, KeyError, ValueError) as exc:
                raise ValueError(f"line {lineno}: {exc}") from exc
    return examples


def write_training_jsonl(path: str, examples: Iterable[TrainingExample]) -> int:
    count = 0
    with open(path, "w", encoding="utf-8") as fh:
        for ex in examples:
            fh.write(json.dumps({
                "query_text": ex.query_text,
                "positive_text": ex.positive_text,
                "negative_texts": ex.negative_texts,
            }, ensure_ascii=False) + "\n")
            count += 1
    return count
