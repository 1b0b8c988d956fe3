"""Record real /v1 responses into frontend test fixtures.

Runs the service in-process against the deterministic fixture scenario (stub
backend, fixture web client) and captures the exact JSON the frontend tests
mock. Rerun after changing any /v1 schema:

    python scripts/record_frontend_fixtures.py
"""

import json
import tempfile
from pathlib import Path

from fastapi.testclient import TestClient

from raggate.corpus import Document, chunk_document, parse_timestamp
from raggate.encoder import EncoderPair
from raggate.engine import EngineState
from raggate.gate import GateConfig
from raggate.generation import stub_backend
from raggate.index import SimilarityMetric, VectorIndex
from raggate.prompting import PromptConfig
from raggate.service import create_app
from raggate.websearch import FixtureSearchClient, build_fixture_dir

OUT_DIR = Path(__file__).resolve().parent.parent / "frontend" / "tests" / "fixtures"

KB_BODY = "quarterly alpha revenue grew strongly. margins expanded."
MISS_QUERY = "what is the gamma factor outlook"
GAMMA_URL = "https://news.example.com/gamma"
SAVE_URL = "https://docs.example/long"


def build_client() -> TestClient:
    enc = EncoderPair.initialize(dim=32, n_features=512, seed=5)
    enc.w_query = enc.w_key.copy()
    fixture_dir = build_fixture_dir(
        tempfile.mkdtemp(prefix="raggate_frontend_fixture_"),
        queries={MISS_QUERY: [
            {"url": GAMMA_URL, "title": "Gamma outlook", "snippet": "gamma",
             "published_at": "2023-05-01 00:00:00"},
        ]},
        pages={GAMMA_URL: MISS_QUERY, SAVE_URL: "a. " * 600},
    )
    ix = VectorIndex(enc.dim)
    doc = Document(id="kb1", published_at=parse_timestamp("2023-04-03 00:00:00"),
                   title="alpha report", summary=KB_BODY)
    ix.add_chunks([(c, enc.encode_key(c.text)) for c in chunk_document(doc)])
    state = EngineState(
        encoder=enc,
        index=ix,
        gate_config=GateConfig(k=5, threshold=0.8, metric=SimilarityMetric.COSINE,
                               auto_update=False),
        prompt_config=PromptConfig(j=3),
        backend=stub_backend(),
        web_client=FixtureSearchClient(str(fixture_dir)),
    )
    return TestClient(create_app(state))


def dump(name: str, payload) -> None:
    OUT_DIR.mkdir(parents=True, exist_ok=True)
    (OUT_DIR / name).write_text(json.dumps(payload, indent=2, ensure_ascii=False) + "\n",
                                encoding="utf-8")
    print(f"wrote {name}")


def main() -> None:
    http = build_client()
    date = "2023-07-01 00:00:00"

    dump("chat_local.json", http.post("/v1/chat", json={
        "question": KB_BODY, "question_date": date}).json())
    dump("chat_web.json", http.post("/v1/chat", json={
        "question": MISS_QUERY, "question_date": date}).json())

    # record the search before save_web mutates the index: saved pages get
    # fetch-time dates, which would make re-recorded fixtures unstable
    dump("kb_search.json", http.get("/v1/kb/search",
                                    params={"q": KB_BODY, "k": 5}).json())
    dump("config.json", http.get("/v1/config").json())

    dump("save_web_first.json", http.post("/v1/kb/save_web",
                                          json={"url": SAVE_URL}).json())
    dump("save_web_repeat.json", http.post("/v1/kb/save_web",
                                           json={"url": SAVE_URL}).json())


if __name__ == "__main__":
    main()
