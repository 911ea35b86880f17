from __future__ import annotations

import random

import pytest

from litrag.errors import AnswerGenerationError, ProviderError
from litrag.models import Citation, Hit, QARequest, SearchParams
from litrag.providers import TASK_ANSWER, TASK_RELEVANCE
from litrag.qa import (
    PipelineDeps,
    answer_query,
    assess_relevance,
    build_citations,
    build_prompt,
    lookup_compounds,
)
from litrag.store import ChunkIndexEntry, DocEntry, KnowledgeStore
from litrag.stubs import FixtureCompoundProvider, HashEmbedder

from helpers import COMPOUND_TABLE, RoutingTextProvider, metadata_for

DIM = 64


def hash_vec(text: str):
    return HashEmbedder(DIM).embed([text])[0]


def build_controlled_store() -> KnowledgeStore:
    """Three documents with vectors derived from known texts, so retrieval
    outcomes are computable by hand under the deterministic embedder."""
    store = KnowledgeStore(dimension=DIM)
    target = "What is the target of paclitaxel?"
    store.upsert(
        DocEntry("docA", hash_vec("abstract A"), "review", metadata_for("docA", "review")),
        [
            ChunkIndexEntry(
                chunk_id="docA#0001",
                doc_id="docA",
                chunk_vector=hash_vec(target),
                text="Paclitaxel binds beta tubulin and stabilizes microtubules.",
                heading_path=["Mechanism"],
            )
        ],
    )
    store.upsert(
        DocEntry("docB", hash_vec("abstract B"), "research", metadata_for("docB")),
        [
            ChunkIndexEntry(
                chunk_id="docB#0001",
                doc_id="docB",
                chunk_vector=hash_vec("unrelated content"),
                question_vectors=[("docB#0001/q1", hash_vec(target))],
                text="A trial of taxane schedules.",
                heading_path=["Outcomes"],
            )
        ],
    )
    store.upsert(
        DocEntry("docC", hash_vec("abstract C"), "research", metadata_for("docC")),
        [
            ChunkIndexEntry(
                chunk_id="docC#0001",
                doc_id="docC",
                chunk_vector=hash_vec("completely different topic"),
                text="Noise document.",
                heading_path=["Noise"],
            )
        ],
    )
    return store


def make_deps(store=None, handlers=None, compounds=True) -> PipelineDeps:
    provider = RoutingTextProvider(handlers or {TASK_RELEVANCE: "no", TASK_ANSWER: "An answer."})
    return PipelineDeps(
        store=store or KnowledgeStore(dimension=DIM),
        text_provider=provider,
        embedding_provider=HashEmbedder(DIM),
        compound_provider=FixtureCompoundProvider.from_file(COMPOUND_TABLE) if compounds else None,
    )


class TestAssessRelevance:
    def test_yes(self):
        assert assess_relevance("q", RoutingTextProvider({TASK_RELEVANCE: "yes"})) is True

    def test_yes_with_prose(self):
        assert assess_relevance("q", RoutingTextProvider({TASK_RELEVANCE: "Yes, it is."})) is True

    def test_unparseable_is_false(self):
        assert assess_relevance("q", RoutingTextProvider({TASK_RELEVANCE: "maybe"})) is False

    def test_provider_failure_is_false_with_warning(self):
        class Failing:
            def complete(self, prompt, system=None):
                raise ProviderError("timeout", retryable=True)

        warnings: list[str] = []
        assert assess_relevance("q", Failing(), warnings) is False
        assert warnings


class TestLookupCompounds:
    def test_paclitaxel_record_from_fixture_table(self):
        client = FixtureCompoundProvider.from_file(COMPOUND_TABLE)
        records = lookup_compounds("what is the target of paclitaxel?", client)
        assert [r.name for r in records] == ["Paclitaxel"]
        assert records[0].smiles.startswith("CC1=C2C(C(=O)C3(")
        assert records[0].detail_url

    def test_no_match_is_empty(self):
        client = FixtureCompoundProvider.from_file(COMPOUND_TABLE)
        assert lookup_compounds("a question about nothing chemical", client) == []

    def test_client_failure_warns_and_continues(self):
        class Unreachable:
            def lookup(self, query):
                raise ProviderError("connection refused", retryable=True)

        warnings: list[str] = []
        assert lookup_compounds("paclitaxel", Unreachable(), warnings=warnings) == []
        assert warnings

    def test_result_cap(self):
        records = [
            dict(name=f"Compound {i}", smiles="C", url=None) for i in range(15)
        ]
        from litrag.models import MoleculeRecord

        client = FixtureCompoundProvider([MoleculeRecord(**r) for r in records])
        hits = lookup_compounds("compound " + " ".join(f"compound {i}" for i in range(15)), client)
        assert len(hits) <= 10


class TestBuildPrompt:
    def hit(self, chunk_id, doc_id, score):
        return Hit(chunk_id=chunk_id, doc_id=doc_id, score=score,
                   matched_kind="chunk", matched_id=chunk_id)

    def citation(self, ref, doc_id):
        return Citation(ref_index=ref, doc_id=doc_id, formatted=f"Someone. Journal {doc_id}.")

    def test_no_hits_includes_disclaimer(self):
        prompt = build_prompt("why?", [], {}, [])
        assert "no direct support" in prompt
        assert prompt.rstrip().endswith("Question: why?")

    def test_blocks_in_hit_order_then_instructions_then_query(self):
        hits = [self.hit("a#1", "a", 0.9), self.hit("b#1", "b", 0.8)]
        texts = {"a#1": "text a", "b#1": "text b"}
        citations = [self.citation(1, "a"), self.citation(2, "b")]
        prompt = build_prompt("the query", hits, texts, citations)
        block_a = prompt.index("[ref 1] Someone. Journal a. :: text a")
        block_b = prompt.index("[ref 2] Someone. Journal b. :: text b")
        instructions = prompt.index("Cite supporting references")
        query_pos = prompt.index("Question: the query")
        assert block_a < block_b < instructions < query_pos

    def test_same_document_hits_share_a_ref_number(self):
        hits = [self.hit("a#1", "a", 0.9), self.hit("a#2", "a", 0.8)]
        texts = {"a#1": "one", "a#2": "two"}
        citations = [self.citation(1, "a")]
        prompt = build_prompt("q", hits, texts, citations)
        assert "[ref 1] Someone. Journal a. :: one" in prompt
        assert "[ref 1] Someone. Journal a. :: two" in prompt
        assert "[ref 2]" not in prompt

    def test_budget_keeps_only_top_block(self):
        hits = [self.hit("a#1", "a", 0.9), self.hit("b#1", "b", 0.8)]
        texts = {"a#1": "x" * 300, "b#1": "y" * 300}
        citations = [self.citation(1, "a"), self.citation(2, "b")]
        prompt = build_prompt("q", hits, texts, citations, budget=500)
        assert "x" * 300 in prompt
        assert "y" * 300 not in prompt


class TestAnswerQuery:
    def test_self_retrieval_doc_is_ref_one(self):
        store = build_controlled_store()
        deps = make_deps(store)
        response = answer_query(QARequest(query="What is the target of paclitaxel?"), deps)
        assert [h.chunk_id for h in response.trace] == ["docA#0001", "docB#0001"]
        assert response.trace[0].matched_kind == "chunk"
        assert response.trace[1].matched_kind == "question"
        assert [c.doc_id for c in response.citations] == ["docA", "docB"]
        assert [c.ref_index for c in response.citations] == [1, 2]

    def test_event_order_with_molecules(self):
        store = build_controlled_store()
        deps = make_deps(
            store,
            handlers={TASK_RELEVANCE: "yes", TASK_ANSWER: "See [ref 1]."},
        )
        response = answer_query(QARequest(query="What is the target of paclitaxel?"), deps)
        assert [e.type for e in response.events] == ["molecules", "citations", "answer"]
        assert response.molecules[0].name == "Paclitaxel"

    def test_event_order_without_molecules(self):
        deps = make_deps(build_controlled_store())
        response = answer_query(QARequest(query="What is the target of paclitaxel?"), deps)
        assert [e.type for e in response.events] == ["citations", "answer"]

    def test_empty_store_answers_with_zero_citations(self):
        deps = make_deps(handlers={TASK_RELEVANCE: "no", TASK_ANSWER: "No direct support."})
        response = answer_query(QARequest(query="anything"), deps)
        assert response.citations == []
        assert response.answer_text == "No direct support."
        assert [e.type for e in response.events] == ["citations", "answer"]

    def test_session_id_is_echoed(self):
        deps = make_deps()
        response = answer_query(QARequest(query="anything", session_id="s-9"), deps)
        assert response.session_id == "s-9"

    def test_relevance_failure_still_answers(self):
        def failing_relevance(prompt):
            raise ProviderError("relevance timeout", retryable=True)

        deps = make_deps(
            build_controlled_store(),
            handlers={TASK_RELEVANCE: failing_relevance, TASK_ANSWER: "Still answered."},
        )
        response = answer_query(QARequest(query="What is the target of paclitaxel?"), deps)
        assert response.answer_text == "Still answered."
        assert response.molecules == []
        assert response.warnings

    def test_answer_failure_carries_citations(self):
        def failing_answer(prompt):
            raise ProviderError("answer model down", retryable=True)

        deps = make_deps(
            build_controlled_store(),
            handlers={TASK_RELEVANCE: "yes", TASK_ANSWER: failing_answer},
        )
        with pytest.raises(AnswerGenerationError) as excinfo:
            answer_query(QARequest(query="What is the target of paclitaxel?"), deps)
        assert [c.doc_id for c in excinfo.value.citations] == ["docA", "docB"]
        assert excinfo.value.molecules

    def test_query_bounds_validated(self):
        with pytest.raises(ValueError):
            QARequest(query="")
        with pytest.raises(ValueError):
            QARequest(query="x" * 8001)

    def test_attribution_soundness_randomized(self):
        rng = random.Random(404)
        store = build_controlled_store()
        texts = [
            "What is the target of paclitaxel?",
            "unrelated content",
            "completely different topic",
            "no match at all",
        ]
        for _ in range(20):
            deps = make_deps(store)
            params = SearchParams(min_score=rng.choice([-1.0, 0.0, 0.7]))
            request = QARequest(query=rng.choice(texts), params=params)
            response = answer_query(request, deps)
            trace_docs = {h.doc_id for h in response.trace}
            assert {c.doc_id for c in response.citations} <= trace_docs
            assert len({c.doc_id for c in response.citations}) == len(response.citations)
            assert [c.ref_index for c in response.citations] == list(
                range(1, len(response.citations) + 1)
            )


class TestCitationNumbering:
    def test_first_hit_order(self):
        store = build_controlled_store()
        hits = [
            Hit(chunk_id="docB#0001", doc_id="docB", score=0.9,
                matched_kind="chunk", matched_id="docB#0001"),
            Hit(chunk_id="docA#0001", doc_id="docA", score=0.8,
                matched_kind="chunk", matched_id="docA#0001"),
            Hit(chunk_id="docB#0002", doc_id="docB", score=0.7,
                matched_kind="chunk", matched_id="docB#0002"),
        ]
        citations = build_citations(hits, store)
        assert [(c.ref_index, c.doc_id) for c in citations] == [(1, "docB"), (2, "docA")]
