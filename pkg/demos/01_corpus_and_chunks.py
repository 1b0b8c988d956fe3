"""Parsing financial document records and chunking them for retrieval.

Documents arrive either as JSONL or in a legacy one-line format that
concatenates release time, title, summary, and topic tags with semicolons.
Bodies are split into chunks of at most 250 tokens, the retrieval unit.
"""

from raggate.corpus import chunk_document, parse_legacy_record, tokenize

LEGACY_LINES = [
    "2023-04-03 00:00:00;海底捞(6862.HK)：2H22净利率7.5%，门店重启稳步推进;港股;个股;公司定期报告评述.",
    "2023-02-07 00:00:00; Feb 2023 ECB monetary policy meeting commentary: "
    "ECB maintains pace of rate hikes without reinforcing;macro;oversea;finance.",
]

print("== Legacy record parsing ==")
for line in LEGACY_LINES:
    doc = parse_legacy_record(line)
    print(f"  {doc.published_at:%Y-%m-%d}  title={doc.title!r}")
    print(f"      summary={doc.summary!r}")
    print(f"      topics={doc.topics}")

print("\n== Tokenization ==")
for text in ["BYD sold 1,255,637 NEVs", "海底捞发布业绩"]:
    print(f"  {text!r} -> {tokenize(text)}")

print("\n== Chunking ==")
doc = parse_legacy_record(LEGACY_LINES[1])
# tiny limit so the effect is visible on a short document
for chunk in chunk_document(doc, chunk_limit=5):
    print(f"  chunk {chunk.index_in_doc}: {chunk.token_count:>2} tokens  {chunk.text!r}")

# the chunk texts reconstruct the document's token stream exactly
chunks = chunk_document(doc, chunk_limit=5)
assert tokenize(" ".join(c.text for c in chunks)) == tokenize(doc.summary)
print("\nreconstruction invariant holds: no token lost or duplicated")
