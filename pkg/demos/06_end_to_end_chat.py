"""The full pipeline: retrieve, rank, prompt with temporal grounding, generate.

The prompt places the top-J paragraphs (one dated line each) above the
instruction block, states the question date, and the remaining paragraphs
become the citation list. The deterministic stub backend echoes how many
context lines it received, which is enough to watch the plumbing work.
"""

from datetime import datetime, timezone

from raggate.corpus import chunk_document
from raggate.encoder import EncoderPair
from raggate.engine import EngineState, answer_question
from raggate.gate import GateConfig
from raggate.generation import stub_backend
from raggate.index import VectorIndex
from raggate.prompting import PromptConfig

from demo_common import make_demo_doc

enc = EncoderPair.initialize(seed=5)
enc.w_query = enc.w_key.copy()

ix = VectorIndex(enc.dim)
BODIES = {
    "byd-h1": "BYD sold 1,255,637 NEVs in the first half of 2023.",
    "byd-target": "BYD targets at least three million vehicle sales for 2023.",
    "byd-europe": "BYD entered a deal with European rental company SIXT.",
    "unrelated": "ECB maintains pace of rate hikes.",
}
for doc_id, body in BODIES.items():
    doc = make_demo_doc(doc_id, body)
    ix.add_chunks([(c, enc.encode_key(c.text)) for c in chunk_document(doc)])

state = EngineState(
    encoder=enc,
    index=ix,
    gate_config=GateConfig(k=4, threshold=0.3, use_web=False),
    prompt_config=PromptConfig(j=3),
    backend=stub_backend(),
)

result = answer_question(state, "How many EVs did BYD sell in the first half of 2023?",
                         datetime(2023, 7, 1, tzinfo=timezone.utc))

print("== prompt sent to the generation backend ==")
print(result.prompt_text)
print("== answer ==")
print(result.answer)
print("\n== citations ==")
print(result.citations_text or "(none)")
print("\n== retrieved ==")
for entry in result.retrieved:
    print(f"  {entry['score']:+.3f} [{entry['provenance']}] {entry['chunk_id']}")
