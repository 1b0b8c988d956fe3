"""The efficiency gate: local search, web fallback, and KB auto-update.

Three runs against the same knowledge base show the policy:
  1. a question the KB answers well -> the web client is never touched;
  2. a question it cannot answer -> one web search, results merged, and the
     qualifying web document is folded into the KB;
  3. the same question again -> now answered locally, zero web calls.
"""

import tempfile
from datetime import datetime, timezone

from raggate.corpus import chunk_document
from raggate.encoder import EncoderPair
from raggate.gate import GateConfig, retrieve
from raggate.index import VectorIndex
from raggate.websearch import FixtureSearchClient, build_fixture_dir

from demo_common import make_demo_doc

enc = EncoderPair.initialize(seed=5)
enc.w_query = enc.w_key.copy()  # identical maps: exact text matches score 1.0

KB_BODY = "quarterly alpha revenue grew strongly. margins expanded."
WEB_QUERY = "what is the gamma factor outlook"
URL = "https://news.example.com/gamma"

fixture = build_fixture_dir(
    tempfile.mkdtemp(prefix="raggate_webfixture_"),
    queries={WEB_QUERY: [{"url": URL, "title": "Gamma outlook", "snippet": "gamma",
                          "published_at": "2023-05-01 00:00:00"}]},
    pages={URL: WEB_QUERY},
)
client = FixtureSearchClient(str(fixture))

ix = VectorIndex(enc.dim)
doc = make_demo_doc("kb1", KB_BODY)
ix.add_chunks([(c, enc.encode_key(c.text)) for c in chunk_document(doc)])

cfg = GateConfig(k=5, threshold=0.8)
date = datetime(2023, 7, 1, tzinfo=timezone.utc)


def show(question):
    results, trace = retrieve(question, date, cfg, enc, ix, client)
    print(f"question: {question!r}")
    print(f"  local max score: {trace.local_max_score}")
    print(f"  web searched: {trace.web_search_performed} (calls so far: {client.search_calls})")
    print(f"  documents auto-added: {trace.kb_documents_added}")
    for p in results[:3]:
        print(f"    [{p.provenance}] {p.score:+.3f} {p.chunk.text[:50]!r}")
    print()


print(f"threshold c = {cfg.threshold}\n")
show(KB_BODY)       # 1: skip the web
show(WEB_QUERY)     # 2: fall back to the web, auto-update
show(WEB_QUERY)     # 3: now local
print(f"total web searches across all three runs: {client.search_calls}")
