"""Seeded synthetic corpora for tests, benchmarks, and demos.

The separable dataset gives every chunk its own disjoint vocabulary and
derives queries by sampling tokens from their target chunk, so a query
shares tokens with exactly one chunk (up to feature-hash collisions). An
untrained encoder scores near chance on it while a trained one separates it,
which makes the trained-vs-untrained retrieval comparison reproducible from
a seed.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime, timedelta, timezone

import numpy as np

from .corpus import Document, chunk_document
from .encoder import TrainingExample
from .evaluation import Judgment


@dataclass
class SeparableDataset:
    documents: list[Document]
    judgments: list[Judgment]
    training: list[TrainingExample]
    holdout_pairs: list[tuple[str, str]]
    chunk_limit: int


def make_separable_dataset(seed: int = 0, n_docs: int = 200, sentences_per_doc: int = 5,
                           tokens_per_sentence: int = 12, query_tokens: int = 5,
                           train_queries_per_doc: int = 2, n_eval_queries: int = 100,
                           negatives: int = 5) -> SeparableDataset:
    """Build the corpus, training examples, and held-out judgments.

    Chunking with the returned ``chunk_limit`` maps each generated sentence
    to exactly one chunk (the limit sits between one and two sentence
    lengths).
    """
    rng = np.random.default_rng(seed)
    chunk_limit = tokens_per_sentence + tokens_per_sentence // 2
    base_date = datetime(2023, 1, 1, tzinfo=timezone.utc)

    documents = []
    chunk_texts: list[str] = []   # flat, parallel to chunk_ids
    chunk_ids: list[str] = []
    next_token = 0
    for n in range(n_docs):
        sentences = []
        for _ in range(sentences_per_doc):
            tokens = [f"w{next_token + t:06d}" for t in range(tokens_per_sentence)]
            next_token += tokens_per_sentence
            sentences.append(" ".join(tokens))
        doc = Document(
            id=f"doc{n:04d}",
            published_at=base_date + timedelta(days=n),
            title=f"synthetic document {n}",
            summary=". ".join(sentences) + ".",
            topics=["synthetic"],
            source="generator",
        )
        documents.append(doc)
        chunks = chunk_document(doc, chunk_limit)
        if len(chunks) != sentences_per_doc:
            raise AssertionError("generator invariant broken: one sentence per chunk")
        for chunk in chunks:
            chunk_texts.append(chunk.text)
            chunk_ids.append(chunk.chunk_id)

    n_chunks = len(chunk_ids)

    def sample_query(chunk_pos: int) -> str:
        tokens = chunk_texts[chunk_pos].rstrip(".").split()
        picked = rng.choice(len(tokens), size=min(query_tokens, len(tokens)), replace=False)
        return " ".join(tokens[i] for i in sorted(picked))

    def sample_negatives(chunk_pos: int) -> list[str]:
        negs = []
        while len(negs) < negatives:
            j = int(rng.integers(n_chunks))
            if j != chunk_pos:
                negs.append(chunk_texts[j])
        return negs

    training = []
    for n in range(n_docs):
        for _ in range(train_queries_per_doc):
            pos = n * sentences_per_doc + int(rng.integers(sentences_per_doc))
            training.append(TrainingExample(
                query_text=sample_query(pos),
                positive_text=chunk_texts[pos],
                negative_texts=sample_negatives(pos),
            ))

    judgments = []
    holdout_pairs = []
    eval_positions = rng.choice(n_chunks, size=min(n_eval_queries, n_chunks), replace=False)
    for qi, pos in enumerate(sorted(int(p) for p in eval_positions)):
        query = sample_query(pos)
        judgments.append(Judgment(
            query_id=f"q{qi:04d}",
            query_text=query,
            relevant_chunk_ids=frozenset({chunk_ids[pos]}),
        ))
        holdout_pairs.append((query, chunk_texts[pos]))

    return SeparableDataset(documents=documents, judgments=judgments, training=training,
                            holdout_pairs=holdout_pairs, chunk_limit=chunk_limit)
