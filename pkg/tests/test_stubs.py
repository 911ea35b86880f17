from __future__ import annotations

from litrag.models import Chunk
from litrag.providers import TASK_MERGE, TASK_RELEVANCE
from litrag.stubs import (
    ConstantChoiceProvider,
    FixtureCompoundProvider,
    HashEmbedder,
    OfflineTextProvider,
    RandomChoiceProvider,
)

from helpers import COMPOUND_TABLE


class TestOfflineTextProvider:
    def test_clean_is_identity(self):
        from litrag.ingest import clean_chunk

        chunk = Chunk.build("d#0001", "d", ["H"], "line one\nline two")
        cleaned = clean_chunk(chunk, OfflineTextProvider())
        assert cleaned.text == chunk.text

    def test_merge_proposes_nothing(self):
        assert OfflineTextProvider().complete(f"Task: {TASK_MERGE}\nwhatever") == ""

    def test_relevance_is_conservative(self):
        assert OfflineTextProvider().complete(f"Task: {TASK_RELEVANCE}\nQuestion: x") == "no"

    def test_questions_are_two_deterministic_lines(self):
        from litrag.enrichment import generate_questions

        chunk = Chunk.build("d#0001", "d", ["Receptor pharmacology"], "body")
        questions = generate_questions(chunk, OfflineTextProvider())
        assert len(questions) == 2
        assert "Receptor pharmacology" in questions[0].text
        again = generate_questions(chunk, OfflineTextProvider())
        assert [q.text for q in questions] == [q.text for q in again]

    def test_unknown_task_yields_empty(self):
        assert OfflineTextProvider().complete("free-form prompt") == ""


class TestChoiceProviders:
    def test_constant(self):
        assert ConstantChoiceProvider("c").complete("anything") == "C"

    def test_random_is_seed_deterministic(self):
        a = [RandomChoiceProvider(seed=3).complete("p") for _ in range(10)]
        b = [RandomChoiceProvider(seed=3).complete("p") for _ in range(10)]
        assert a == b
        assert set(a) <= set("ABCD")


class TestFixtureCompoundProvider:
    def test_case_insensitive_name_match(self):
        client = FixtureCompoundProvider.from_file(COMPOUND_TABLE)
        assert [r.name for r in client.lookup("tell me about MENTHOL today")] == ["Menthol"]

    def test_multiple_matches(self):
        client = FixtureCompoundProvider.from_file(COMPOUND_TABLE)
        names = {r.name for r in client.lookup("paclitaxel vs docetaxel trials")}
        assert names == {"Paclitaxel", "Docetaxel"}


class TestHashEmbedderEdges:
    def test_dimension_one(self):
        vec = HashEmbedder(1).embed(["x"])[0]
        assert vec in ([1.0], [-1.0])

    def test_empty_string_embeds(self):
        vec = HashEmbedder(8).embed([""])[0]
        assert len(vec) == 8
