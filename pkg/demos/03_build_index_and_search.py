"""Building the local knowledge base and searching it under each metric.

The index is a flat, exact top-K scanner over chunk embeddings; cosine, dot
product, and (negated) euclidean distance are interchangeable at query time.
With cosine, rescaling a stored vector changes nothing; with dot product it
scales the score — the reason the calibration and gate default to cosine.
"""

from datetime import datetime, timezone

from raggate.corpus import Document, chunk_document
from raggate.encoder import EncoderPair
from raggate.index import SimilarityMetric, VectorIndex

enc = EncoderPair.initialize(seed=0)
enc.w_query = enc.w_key.copy()  # shared maps: token overlap drives similarity
ix = VectorIndex(enc.dim)

BODIES = {
    "byd": "BYD sold 1,255,637 NEVs in the first half. Europe expansion continues.",
    "ecb": "ECB maintains pace of rate hikes. Inflation outlook remains uncertain.",
    "haidilao": "海底捞发布2022年度业绩。 2H22净利率7.5%。",
}
for doc_id, body in BODIES.items():
    doc = Document(id=doc_id, published_at=datetime(2023, 4, 3, tzinfo=timezone.utc),
                   title=doc_id, summary=body)
    ix.add_chunks([(c, enc.encode_key(c.text)) for c in chunk_document(doc)])

print(f"indexed {len(ix)} chunks from {ix.n_documents} documents\n")

query = "how many NEVs did BYD sell in the first half"
q = enc.encode_query(query)
for metric in SimilarityMetric:
    hits = ix.search(q, k=3, metric=metric)
    print(f"{metric.value:>9}: " + ", ".join(f"{h.chunk_id} ({h.score:+.3f})" for h in hits))

# snapshots round-trip byte-exactly
ix.save("/tmp/raggate_demo.idx")
restored = VectorIndex.load("/tmp/raggate_demo.idx")
assert restored.search(q, 3) == ix.search(q, 3)
print("\nsnapshot saved and restored; search results identical")
