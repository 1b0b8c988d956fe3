"""Fixture cases behind the golden prompt files.

The goldens under tests/data/golden/ were rendered from these cases once and
checked in; tests re-render and must match byte for byte.
"""

from datetime import datetime, timezone

from raggate.corpus import Chunk
from raggate.gate import RetrievedParagraph
from raggate.prompting import PromptConfig


def paragraph(doc_id, idx, text, score, provenance="local", url=None, date=None):
    published = date or datetime(2023, 4, 3, tzinfo=timezone.utc)
    chunk = Chunk(doc_id=doc_id, index_in_doc=idx, text=text,
                  token_count=len(text.split()), published_at=published)
    return RetrievedParagraph(chunk=chunk, score=score, provenance=provenance,
                              source_url=url, published_at=published)


def case_english():
    ranked = [
        paragraph("ev1", 0, "BYD sold 1,255,637 NEVs in the first half of 2023", 0.95,
                  "web", "https://www.thedriven.io/byd",
                  datetime(2023, 7, 3, tzinfo=timezone.utc)),
        paragraph("kb9", 0, "BYD targets at least three million vehicle sales for 2023",
                  0.91, "local", None, datetime(2023, 4, 3, tzinfo=timezone.utc)),
        paragraph("ev2", 1, "BYD entered a deal with European rental company SIXT", 0.80,
                  "web", "https://insideevs.com/byd-sixt",
                  datetime(2023, 6, 10, tzinfo=timezone.utc)),
        paragraph("kb2", 0, "NEV market share keeps expanding in China", 0.60),
        paragraph("kb3", 0, "battery supply contracts were renegotiated", 0.41),
    ]
    question = "How many EVs did BYD sell in Q1 2023?"
    question_date = datetime(2023, 7, 1, tzinfo=timezone.utc)
    return ranked, question, question_date, PromptConfig(j=3)


def case_chinese():
    ranked = [
        paragraph("hk1", 0, "海底捞发布2022年度业绩，2H22净利率7.5%", 0.9, "local", None,
                  datetime(2023, 4, 3, tzinfo=timezone.utc)),
        paragraph("hk2", 0, "门店重启稳步推进，客流回暖", 0.7, "web",
                  "https://stcn.com/haidilao", datetime(2023, 4, 5, tzinfo=timezone.utc)),
    ]
    question = "海底捞2022年下半年的净利率是多少？"
    question_date = datetime(2023, 7, 1, tzinfo=timezone.utc)
    return ranked, question, question_date, PromptConfig(j=3)
