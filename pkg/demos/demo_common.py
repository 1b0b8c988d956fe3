"""Shared helpers for the demo scripts."""

from datetime import datetime, timezone

from raggate.corpus import Document


def make_demo_doc(doc_id: str, body: str, title: str = "") -> Document:
    return Document(
        id=doc_id,
        published_at=datetime(2023, 4, 3, tzinfo=timezone.utc),
        title=title or doc_id,
        summary=body,
    )
