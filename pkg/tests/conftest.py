import os

# Pin BLAS pools before numpy loads so timing-sensitive tests measure
# single-threaded behaviour.
os.environ.setdefault("OPENBLAS_NUM_THREADS", "1")
os.environ.setdefault("OMP_NUM_THREADS", "1")
os.environ.setdefault("MKL_NUM_THREADS", "1")

from datetime import datetime, timezone

import pytest

from raggate.corpus import Document
from raggate.encoder import EncoderPair


def make_doc(doc_id: str, summary: str, *, title: str = "", topics=None,
             source: str = "", origin: str = "local",
             published_at: datetime | None = None) -> Document:
    return Document(
        id=doc_id,
        published_at=published_at or datetime(2023, 4, 3, tzinfo=timezone.utc),
        title=title,
        summary=summary,
        topics=topics or [],
        source=source,
        origin=origin,
    )


@pytest.fixture
def shared_encoder() -> EncoderPair:
    """Encoder whose key and query maps coincide, so identical texts embed
    identically and cosine self-similarity is exactly 1. Convenient for
    deterministic gate/service scenarios without training."""
    enc = EncoderPair.initialize(dim=32, n_features=512, seed=5)
    enc.w_query = enc.w_key.copy()
    return enc
