import json
from datetime import datetime, timezone

import pytest
from hypothesis import given, strategies as st

from raggate.corpus import (
    Document,
    chunk_document,
    document_from_json,
    document_to_json,
    format_timestamp,
    parse_legacy_record,
    parse_timestamp,
    read_corpus_jsonl,
    serialize_legacy_record,
    tokenize,
    write_corpus_jsonl,
)
from raggate.errors import BadTimestamp, EmptyDocument, TooFewFields

from conftest import make_doc


class TestTokenize:
    def test_empty(self):
        assert tokenize("") == []

    def test_mixed_letters_digits_separators(self):
        assert tokenize("BYD sold 1,255,637 NEVs") == ["byd", "sold", "1", "255", "637", "nevs"]

    def test_cjk_chars_are_single_tokens(self):
        assert tokenize("海底捞发布业绩") == ["海", "底", "捞", "发", "布", "业", "绩"]

    def test_cjk_mixed_with_latin(self):
        assert tokenize("海底捞(6862.HK)：2H22净利率7.5%") == \
            ["海", "底", "捞", "6862", "hk", "2h22", "净", "利", "率", "7", "5"]

    @given(st.text(max_size=200))
    def test_deterministic(self, text):
        assert tokenize(text) == tokenize(text)

    @given(st.text(max_size=200))
    def test_join_is_tokenization_fixpoint(self, text):
        tokens = tokenize(text)
        assert tokenize(" ".join(tokens)) == tokens


# Text strategy mixing latin words, CJK runs, digits and sentence punctuation.
_words = st.lists(
    st.one_of(
        st.text(alphabet="abcdefg", min_size=1, max_size=6),
        st.text(alphabet="海底捞发布业绩股票基金", min_size=1, max_size=3),
        st.integers(min_value=0, max_value=9999).map(str),
    ),
    min_size=1, max_size=60,
)
_bodies = _words.map(lambda ws: " ".join(ws))


def _sentencify(words: list[str], breaks: list[bool]) -> str:
    parts = []
    for word, brk in zip(words, breaks):
        parts.append(word + (". " if brk else " "))
    return "".join(parts).strip()


class TestChunkDocument:
    def test_many_short_sentences_pack_greedily(self):
        doc = make_doc("d1", "a. " * 600)
        chunks = chunk_document(doc, 250)
        assert [c.token_count for c in chunks] == [250, 250, 100]
        assert [c.index_in_doc for c in chunks] == [0, 1, 2]

    def test_under_limit_single_chunk(self):
        doc = make_doc("d2", " ".join(f"w{i}" for i in range(10)) + ".")
        chunks = chunk_document(doc, 250)
        assert len(chunks) == 1
        assert chunks[0].token_count == 10

    def test_oversized_sentence_hard_split(self):
        doc = make_doc("d3", " ".join(["a"] * 600) + ".")
        chunks = chunk_document(doc, 250)
        assert [c.token_count for c in chunks] == [250, 250, 100]

    def test_empty_body_rejected(self):
        with pytest.raises(EmptyDocument):
            chunk_document(make_doc("d4", " ... !!! "), 250)

    def test_chunks_carry_document_metadata(self):
        doc = make_doc("d5", "alpha beta. gamma delta.")
        (chunk,) = chunk_document(doc, 250)
        assert chunk.doc_id == "d5"
        assert chunk.published_at == doc.published_at
        assert chunk.chunk_id == "d5#0"

    def test_fullwidth_boundary_needs_trailing_space_or_end(self):
        # The boundary rule requires whitespace/end after the punctuation, so
        # an unspaced Chinese period does not split: the 9 tokens form one
        # sentence and hard-split as 6+3. With a boundary they would pack 5+4.
        doc = make_doc("d6", "净利率上升。门店重启")
        assert [c.token_count for c in chunk_document(doc, 6)] == [6, 3]
        # With a trailing space the same punctuation does split.
        spaced = make_doc("d7", "净利率上升。 门店重启")
        assert [c.token_count for c in chunk_document(spaced, 6)] == [5, 4]

    @given(words=_words, seed=st.integers(0, 2**16), limit=st.integers(1, 40))
    def test_reconstruction_and_bound(self, words, seed, limit):
        import random
        breaks = [random.Random(seed + i).random() < 0.3 for i in range(len(words))]
        body = _sentencify(words, breaks)
        doc = make_doc("dp", body)
        try:
            chunks = chunk_document(doc, limit)
        except EmptyDocument:
            assert tokenize(body) == []
            return
        # bound
        assert all(c.token_count <= limit for c in chunks)
        assert all(c.token_count >= 1 for c in chunks)
        # consecutive ordinals
        assert [c.index_in_doc for c in chunks] == list(range(len(chunks)))
        # reconstruction: joined chunk texts tokenize to the body's tokens
        joined = " ".join(c.text for c in chunks)
        assert tokenize(joined) == tokenize(body)
        # token_count is honest
        assert [c.token_count for c in chunks] == [len(tokenize(c.text)) for c in chunks]

    def test_determinism(self):
        doc = make_doc("dd", "one two three. four five. six seven eight nine.")
        a = chunk_document(doc, 5)
        b = chunk_document(doc, 5)
        assert a == b


class TestParseLegacyRecord:
    def test_english_example(self):
        line = ("2023-02-07 00:00:00; Feb 223 ECB monetary policy meeting commentary: "
                "ECB maintains pace of rate hikes...;macro;oversea;finance")
        doc = parse_legacy_record(line)
        assert doc.published_at == datetime(2023, 2, 7, tzinfo=timezone.utc)
        assert doc.title == "Feb 223 ECB monetary policy meeting commentary"
        assert doc.summary == "ECB maintains pace of rate hikes..."
        assert doc.topics == ["macro", "oversea", "finance"]

    def test_chinese_example_with_fullwidth_colon(self):
        line = "2023-04-03 00:00:00;海底捞(6862.HK)：2H22净利率7.5%;港股;个股"
        doc = parse_legacy_record(line)
        assert doc.title == "海底捞(6862.HK)"
        assert doc.summary == "2H22净利率7.5%"
        assert doc.topics == ["港股", "个股"]

    def test_trailing_period_stripped_from_last_topic(self):
        line = "2023-02-07 00:00:00;t: s;macro;europe."
        assert parse_legacy_record(line).topics == ["macro", "europe"]

    def test_bad_timestamp(self):
        with pytest.raises(BadTimestamp):
            parse_legacy_record("not-a-date;title: body")

    def test_too_few_fields(self):
        with pytest.raises(TooFewFields):
            parse_legacy_record("2023-02-07 00:00:00")

    def test_no_colon_becomes_summary_only(self):
        doc = parse_legacy_record("2023-02-07 00:00:00;just a summary;x")
        assert doc.title == ""
        assert doc.summary == "just a summary"

    def test_identical_lines_get_identical_ids(self):
        line = "2023-02-07 00:00:00;t: s"
        assert parse_legacy_record(line).id == parse_legacy_record(line).id

    @given(
        title=st.text(alphabet="abc DEF123", max_size=20).filter(lambda s: ":" not in s and s.strip() == s),
        summary=st.text(alphabet="xyz 789", min_size=1, max_size=30).filter(lambda s: s.strip() == s),
        topics=st.lists(st.text(alphabet="mnop", min_size=1, max_size=8), max_size=4),
    )
    def test_round_trip_on_clean_fields(self, title, summary, topics):
        doc = Document(
            id="orig",
            published_at=datetime(2023, 4, 3, 10, 30, 0, tzinfo=timezone.utc),
            title=title,
            summary=summary,
            topics=topics,
        )
        parsed = parse_legacy_record(serialize_legacy_record(doc))
        assert parsed.published_at == doc.published_at
        assert parsed.title == doc.title
        assert parsed.summary == doc.summary
        assert parsed.topics == doc.topics


class TestTimestamps:
    def test_round_trip(self):
        ts = "2023-04-03 10:30:00"
        assert format_timestamp(parse_timestamp(ts)) == ts

    def test_iso_z_suffix(self):
        assert parse_timestamp("2023-04-03T10:30:00Z") == \
            datetime(2023, 4, 3, 10, 30, tzinfo=timezone.utc)

    def test_bad_value(self):
        with pytest.raises(BadTimestamp):
            parse_timestamp("04/03/2023")


class TestJsonlCorpus:
    def test_round_trip(self, tmp_path):
        docs = [
            make_doc("a", "first body.", title="A", topics=["t1"], source="src"),
            make_doc("b", "第二个文档。", title="乙", origin="web"),
        ]
        path = tmp_path / "corpus.jsonl"
        assert write_corpus_jsonl(str(path), docs) == 2
        loaded = list(read_corpus_jsonl(str(path)))
        assert loaded == docs

    def test_malformed_line_reports_line_number(self, tmp_path):
        path = tmp_path / "bad.jsonl"
        good = json.dumps(document_to_json(make_doc("a", "body.")))
        path.write_text(good + "\n{nope\n", encoding="utf-8")
        with pytest.raises(ValueError, match="line 2"):
            list(read_corpus_jsonl(str(path)))

    def test_document_json_shape(self):
        obj = document_to_json(make_doc("a", "body.", title="T"))
        assert set(obj) == {"id", "published_at", "title", "summary", "topics", "source", "origin"}
        assert document_from_json(obj) == make_doc("a", "body.", title="T")

    def test_origin_validation(self):
        with pytest.raises(ValueError):
            make_doc("a", "body.", origin="other")
