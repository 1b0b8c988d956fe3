import math
import threading
from datetime import datetime, timezone

import numpy as np
import pytest

from raggate.corpus import Chunk
from raggate.errors import DimensionMismatch, DuplicateChunkId, BadSnapshot
from raggate.index import SimilarityMetric, VectorIndex, cosine, similarity

DATE = datetime(2023, 1, 1, tzinfo=timezone.utc)


def make_chunk(doc_id: str, idx: int = 0, text: str = "t") -> Chunk:
    return Chunk(doc_id=doc_id, index_in_doc=idx, text=text, token_count=1, published_at=DATE)


def filled_index(vectors: np.ndarray) -> VectorIndex:
    ix = VectorIndex(vectors.shape[1])
    items = [(make_chunk(f"d{i:05d}"), vectors[i]) for i in range(len(vectors))]
    ix.add_chunks(items)
    return ix


# -- independent brute-force oracle (pure python) ----------------------------

def oracle_score(a, b, metric: SimilarityMetric) -> float:
    dot = math.fsum(x * y for x, y in zip(a, b))
    if metric is SimilarityMetric.DOT:
        return dot
    if metric is SimilarityMetric.EUCLIDEAN:
        return -math.sqrt(math.fsum((x - y) ** 2 for x, y in zip(a, b)))
    na = math.sqrt(math.fsum(x * x for x in a))
    nb = math.sqrt(math.fsum(y * y for y in b))
    if na == 0.0 or nb == 0.0:
        return 0.0
    return dot / (na * nb)


def oracle_search(vectors, chunk_ids, q, k, metric):
    scored = [(oracle_score(vectors[i], q, metric), chunk_ids[i]) for i in range(len(vectors))]
    scored.sort(key=lambda t: (-t[0], t[1]))
    return scored[:k]


class TestCosine:
    def test_self_similarity_is_one(self):
        v = np.array([1.0, 2.0, 3.0])
        assert cosine(v, v) == pytest.approx(1.0, abs=1e-12)

    def test_orthogonal_is_zero(self):
        assert cosine(np.array([1.0, 0.0]), np.array([0.0, 1.0])) == 0.0

    def test_hand_computed_value(self):
        a = np.array([1.0, 2.0, 2.0])
        b = np.array([2.0, 1.0, 2.0])
        assert cosine(a, b) == pytest.approx(8 / 9, abs=1e-12)

    def test_zero_norm_scores_zero(self):
        assert cosine(np.zeros(3), np.ones(3)) == 0.0

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            cosine(np.zeros(2), np.zeros(3))


class TestAddChunks:
    def test_add_grows_index(self):
        ix = VectorIndex(2)
        added = ix.add_chunks([(make_chunk(f"d{i}"), np.ones(2) * i) for i in range(3)])
        assert added == 3
        assert len(ix) == 3

    def test_duplicate_rejected_atomically(self):
        ix = VectorIndex(2)
        ix.add_chunks([(make_chunk("a"), np.ones(2))])
        generation = ix.generation
        with pytest.raises(DuplicateChunkId):
            ix.add_chunks([(make_chunk("b"), np.ones(2)), (make_chunk("a"), np.ones(2))])
        assert len(ix) == 1
        assert not ix.has_chunk("b#0")
        assert ix.generation == generation

    def test_dimension_checked(self):
        ix = VectorIndex(2)
        with pytest.raises(DimensionMismatch):
            ix.add_chunks([(make_chunk("a"), np.ones(3))])

    def test_added_chunk_is_rank_one_for_itself(self):
        ix = VectorIndex(4)
        emb = np.array([0.3, -0.2, 0.9, 0.1])
        ix.add_chunks([(make_chunk("a"), emb)])
        hits = ix.search(emb, 1)
        assert hits[0].chunk_id == "a#0"
        assert hits[0].score == pytest.approx(1.0, abs=1e-12)

    def test_generation_bumps_per_batch(self):
        ix = VectorIndex(2)
        ix.add_chunks([(make_chunk("a"), np.ones(2))])
        ix.add_chunks([(make_chunk("b"), np.ones(2))])
        assert ix.generation == 2


class TestSearch:
    def test_empty_index_returns_empty(self):
        assert VectorIndex(3).search(np.ones(3), 5) == []

    def test_k_larger_than_size_clamps(self):
        rng = np.random.default_rng(0)
        ix = filled_index(rng.normal(size=(4, 3)))
        hits = ix.search(rng.normal(size=3), 10)
        assert len(hits) == 4
        assert [h.rank for h in hits] == [1, 2, 3, 4]

    def test_scores_non_increasing(self):
        rng = np.random.default_rng(1)
        ix = filled_index(rng.normal(size=(50, 8)))
        hits = ix.search(rng.normal(size=8), 10)
        assert all(a.score >= b.score for a, b in zip(hits, hits[1:]))

    def test_k_must_be_positive(self):
        with pytest.raises(ValueError):
            VectorIndex(2).search(np.ones(2), 0)

    @pytest.mark.parametrize("metric", list(SimilarityMetric))
    def test_matches_brute_force_oracle(self, metric):
        rng = np.random.default_rng(7)
        vectors = rng.uniform(-1, 1, size=(300, 16))
        # duplicate some rows to force exact ties, exercising the id tie-break
        vectors[250:] = vectors[:50]
        ix = filled_index(vectors)
        ids = [f"d{i:05d}#0" for i in range(300)]
        for trial in range(10):
            q = rng.uniform(-1, 1, size=16)
            for k in (1, 5, 17):
                hits = ix.search(q, k, metric)
                expected = oracle_search(vectors, ids, q, k, metric)
                assert [h.chunk_id for h in hits] == [cid for _, cid in expected]
                for hit, (score, _) in zip(hits, expected):
                    assert hit.score == pytest.approx(score, abs=1e-12)

    def test_cosine_scale_invariance_and_dot_scaling(self):
        rng = np.random.default_rng(3)
        vectors = rng.normal(size=(20, 6))
        q = rng.normal(size=6)
        lam = 3.7
        base = filled_index(vectors)
        scaled_vectors = vectors.copy()
        scaled_vectors[4] *= lam
        scaled = filled_index(scaled_vectors)

        cos_base = base.search(q, 20, SimilarityMetric.COSINE)
        cos_scaled = scaled.search(q, 20, SimilarityMetric.COSINE)
        assert [h.chunk_id for h in cos_base] == [h.chunk_id for h in cos_scaled]
        for a, b in zip(cos_base, cos_scaled):
            assert a.score == pytest.approx(b.score, abs=1e-12)

        dot_base = {h.chunk_id: h.score for h in base.search(q, 20, SimilarityMetric.DOT)}
        dot_scaled = {h.chunk_id: h.score for h in scaled.search(q, 20, SimilarityMetric.DOT)}
        assert dot_scaled["d00004#0"] == pytest.approx(lam * dot_base["d00004#0"], rel=1e-12)

    def test_zero_norm_entry_scores_zero_under_cosine(self):
        ix = VectorIndex(3)
        ix.add_chunks([(make_chunk("z"), np.zeros(3)), (make_chunk("v"), np.ones(3))])
        hits = ix.search(np.ones(3), 2, SimilarityMetric.COSINE)
        assert {h.chunk_id: pytest.approx(h.score) for h in hits}["z#0"] == 0.0


class TestSimilarityHelper:
    def test_euclidean_is_negated_distance(self):
        a, b = np.array([0.0, 0.0]), np.array([3.0, 4.0])
        assert similarity(a, b, SimilarityMetric.EUCLIDEAN) == pytest.approx(-5.0)

    def test_metric_parse(self):
        assert SimilarityMetric.parse("Cosine") is SimilarityMetric.COSINE
        with pytest.raises(ValueError):
            SimilarityMetric.parse("manhattan")


class TestPersistence:
    def test_round_trip_preserves_search_results(self, tmp_path):
        rng = np.random.default_rng(11)
        ix = filled_index(rng.normal(size=(40, 8)))
        path = tmp_path / "kb.idx"
        ix.save(str(path))
        loaded = VectorIndex.load(str(path))
        assert len(loaded) == len(ix)
        for _ in range(5):
            q = rng.normal(size=8)
            for metric in SimilarityMetric:
                assert loaded.search(q, 7, metric) == ix.search(q, 7, metric)

    def test_metadata_survives(self, tmp_path):
        ix = VectorIndex(2)
        chunk = Chunk(doc_id="doc", index_in_doc=3, text="海底捞 body", token_count=4,
                      published_at=DATE)
        ix.add_chunks([(chunk, np.ones(2))])
        ix.save(str(tmp_path / "kb.idx"))
        loaded = VectorIndex.load(str(tmp_path / "kb.idx"))
        assert loaded.get_chunk("doc#3") == chunk
        assert loaded.has_document("doc")

    def test_empty_index_round_trips(self, tmp_path):
        ix = VectorIndex(5)
        ix.save(str(tmp_path / "kb.idx"))
        loaded = VectorIndex.load(str(tmp_path / "kb.idx"))
        assert len(loaded) == 0 and loaded.dim == 5

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "junk.idx"
        path.write_bytes(b"garbage")
        with pytest.raises(BadSnapshot):
            VectorIndex.load(str(path))


class TestConcurrency:
    def test_readers_never_observe_partial_batches(self):
        ix = VectorIndex(4)
        rng = np.random.default_rng(5)
        batch_size = 7
        stop = threading.Event()
        violations = []

        def reader():
            while not stop.is_set():
                size = len(ix)
                if size % batch_size != 0:
                    violations.append(size)

        threads = [threading.Thread(target=reader) for _ in range(4)]
        for t in threads:
            t.start()
        for b in range(30):
            items = [(make_chunk(f"b{b}", i), rng.normal(size=4)) for i in range(batch_size)]
            ix.add_chunks(items)
        stop.set()
        for t in threads:
            t.join()
        assert violations == []
        assert len(ix) == 30 * batch_size
