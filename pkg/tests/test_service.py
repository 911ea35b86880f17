from __future__ import annotations

import json
import os

import pytest
from fastapi.testclient import TestClient

from litrag.config import ServiceConfig
from litrag.errors import ProviderError
from litrag.models import QARequest, SearchParams
from litrag.providers import TASK_ANSWER, TASK_OVERVIEW, TASK_RELEVANCE, TASK_SYNTHESIS
from litrag.qa import PipelineDeps, answer_query
from litrag.service import create_app
from litrag.store import KnowledgeStore
from litrag.stubs import FixtureCompoundProvider, HashEmbedder

from helpers import COMPOUND_TABLE, CORPUS_MANIFEST, GOLDEN_DIR, RoutingTextProvider

DIM = 64

GOLDEN_QA_REQUEST = {
    "query": "What is the target of paclitaxel?",
    "params": {"summary_limit": 400, "chunk_limit": 5, "min_score": 0.0},
    "session_id": "golden-session",
}
GOLDEN_RESEARCH_REQUEST = {
    "topic": "paclitaxel in the clinic",
    "max_subquestions": 2,
}
GOLDEN_OVERVIEW = (
    "Paclitaxel anchors taxane therapy.\n"
    "SUB-QUESTIONS:\n"
    "What does the passage on Mechanism of action describe?\n"
    "Which findings are reported under Outcomes?"
)


def scripted_providers() -> RoutingTextProvider:
    return RoutingTextProvider(
        {
            TASK_RELEVANCE: "yes",
            TASK_ANSWER: "Paclitaxel stabilizes microtubules; see [ref 1].",
            TASK_OVERVIEW: GOLDEN_OVERVIEW,
            TASK_SYNTHESIS: "Combined: mechanism and trial outcomes, per [ref 1] and [ref 2].",
        }
    )


@pytest.fixture()
def service_deps(corpus_store) -> PipelineDeps:
    return PipelineDeps(
        store=corpus_store,
        text_provider=scripted_providers(),
        embedding_provider=HashEmbedder(DIM),
        compound_provider=FixtureCompoundProvider.from_file(COMPOUND_TABLE),
    )


@pytest.fixture()
def client(service_deps, tmp_path) -> TestClient:
    config = ServiceConfig(dimension=DIM, store_path=str(tmp_path / "store.bin"))
    app = create_app(config, service_deps)
    return TestClient(app, raise_server_exceptions=False)


def check_golden(name: str, payload: dict) -> None:
    path = GOLDEN_DIR / name
    if os.environ.get("REGEN_GOLDEN") == "1":
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    assert path.exists(), f"golden file {path} missing; run with REGEN_GOLDEN=1 once"
    assert payload == json.loads(path.read_text(encoding="utf-8"))


class TestHealth:
    def test_fresh_store_counts_are_zero(self, tmp_path):
        config = ServiceConfig(dimension=8, store_path=str(tmp_path / "s.bin"))
        deps = PipelineDeps(
            store=KnowledgeStore(dimension=8),
            text_provider=scripted_providers(),
            embedding_provider=HashEmbedder(8),
        )
        client = TestClient(create_app(config, deps))
        body = client.get("/api/health").json()
        assert body["status"] == "ok"
        assert body["store"] == {"docs": 0, "chunks": 0, "questions": 0}
        assert body["providers"]["compound"] is False

    def test_counts_equal_store_contents(self, client, corpus_store):
        stats = corpus_store.stats()
        body = client.get("/api/health").json()
        assert body["store"] == {
            "docs": stats.docs,
            "chunks": stats.chunks,
            "questions": stats.questions,
        }
        assert body["dimension"] == DIM


class TestQAEndpoint:
    def test_empty_query_is_bad_request(self, client):
        response = client.post("/api/qa", json={"query": ""})
        assert response.status_code == 400
        body = response.json()
        assert body["error"]["code"] == "bad_request"
        assert body["error"]["request_id"]

    def test_event_order_and_echoed_session(self, client):
        response = client.post("/api/qa", json=GOLDEN_QA_REQUEST)
        assert response.status_code == 200
        body = response.json()
        assert [e["type"] for e in body["events"]] == ["molecules", "citations", "answer"]
        assert body["session_id"] == "golden-session"

    def test_golden_response_body(self, client):
        response = client.post("/api/qa", json=GOLDEN_QA_REQUEST)
        assert response.status_code == 200
        check_golden("qa_response.json", response.json())

    def test_api_matches_in_process_pipeline(self, client, corpus_store):
        body = client.post("/api/qa", json=GOLDEN_QA_REQUEST).json()
        deps = PipelineDeps(
            store=corpus_store,
            text_provider=scripted_providers(),
            embedding_provider=HashEmbedder(DIM),
            compound_provider=FixtureCompoundProvider.from_file(COMPOUND_TABLE),
        )
        local = answer_query(QARequest(**GOLDEN_QA_REQUEST), deps)
        assert body == local.model_dump(mode="json")

    def test_answer_provider_failure_keeps_partial(self, corpus_store, tmp_path):
        def failing_answer(prompt):
            raise ProviderError("llm down", retryable=True)

        provider = RoutingTextProvider({TASK_RELEVANCE: "yes", TASK_ANSWER: failing_answer})
        deps = PipelineDeps(
            store=corpus_store,
            text_provider=provider,
            embedding_provider=HashEmbedder(DIM),
            compound_provider=FixtureCompoundProvider.from_file(COMPOUND_TABLE),
        )
        config = ServiceConfig(dimension=DIM, store_path=str(tmp_path / "s.bin"))
        client = TestClient(create_app(config, deps), raise_server_exceptions=False)
        response = client.post("/api/qa", json=GOLDEN_QA_REQUEST)
        assert response.status_code == 502
        body = response.json()
        assert body["error"]["code"] == "provider_unavailable"
        assert body["partial"]["citations"]
        assert body["partial"]["molecules"][0]["name"] == "Paclitaxel"


class TestResearchEndpoint:
    def test_golden_report_body(self, client):
        response = client.post("/api/research", json=GOLDEN_RESEARCH_REQUEST)
        assert response.status_code == 200
        body = response.json()
        assert [s["question"] for s in body["sub_answers"]] == [
            "What does the passage on Mechanism of action describe?",
            "Which findings are reported under Outcomes?",
        ]
        check_golden("research_report.json", body)

    def test_bibliography_has_unique_docs(self, client):
        body = client.post("/api/research", json=GOLDEN_RESEARCH_REQUEST).json()
        doc_ids = [c["doc_id"] for c in body["bibliography"]]
        assert len(doc_ids) == len(set(doc_ids))
        assert [c["ref_index"] for c in body["bibliography"]] == list(
            range(1, len(doc_ids) + 1)
        )


class TestDocumentsEndpoint:
    def test_metadata_and_citation(self, client):
        body = client.get("/api/documents/d001").json()
        assert body["doc_id"] == "d001"
        assert body["metadata"]["doc_type"] == "review"
        assert body["citation"].startswith("Alvarez M, Chen R, Okafor T, et al.")

    def test_unknown_document_is_404(self, client):
        response = client.get("/api/documents/nope")
        assert response.status_code == 404
        assert response.json()["error"]["code"] == "bad_request"


class TestIngestEndpoint:
    def test_manifest_ingest_reports_counts_and_persists(self, tmp_path):
        store_path = tmp_path / "ingested.bin"
        config = ServiceConfig(dimension=32, store_path=str(store_path))
        from litrag.stubs import OfflineTextProvider

        deps = PipelineDeps(
            store=KnowledgeStore(dimension=32),
            text_provider=OfflineTextProvider(),
            embedding_provider=HashEmbedder(32),
        )
        client = TestClient(create_app(config, deps))
        response = client.post("/api/ingest", json={"manifest_path": str(CORPUS_MANIFEST)})
        assert response.status_code == 200
        body = response.json()
        assert body["status"] == "completed"
        assert body["documents"] == 10
        assert body["chunks"] == 52
        assert body["questions"] == 104
        assert store_path.exists()
        loaded = KnowledgeStore.load(store_path)
        assert loaded.stats().docs == 10

    def test_missing_source_is_bad_request(self, client):
        response = client.post("/api/ingest", json={})
        assert response.status_code == 400
        assert response.json()["error"]["code"] == "bad_request"

    def test_bad_manifest_path_is_bad_request(self, tmp_path):
        config = ServiceConfig(dimension=8, store_path=str(tmp_path / "x.bin"))
        deps = PipelineDeps(
            store=KnowledgeStore(dimension=8),
            text_provider=scripted_providers(),
            embedding_provider=HashEmbedder(8),
        )
        client = TestClient(create_app(config, deps), raise_server_exceptions=False)
        response = client.post("/api/ingest", json={"manifest_path": "/nonexistent.json"})
        assert response.status_code == 400
        assert response.json()["error"]["code"] == "bad_request"


class TestRequestTagging:
    def test_every_response_carries_a_request_id_header(self, client):
        response = client.get("/api/health")
        assert response.headers.get("X-Request-ID")


class TestUiMount:
    def test_ui_dir_serves_index_when_present(self, tmp_path, service_deps):
        ui = tmp_path / "ui"
        ui.mkdir()
        (ui / "index.html").write_text("<html><body>chat</body></html>", encoding="utf-8")
        config = ServiceConfig(
            dimension=DIM, store_path=str(tmp_path / "s.bin"), ui_dir=str(ui)
        )
        client = TestClient(create_app(config, service_deps))
        assert client.get("/").status_code == 200
        assert client.get("/api/health").status_code == 200

    def test_missing_index_fails_startup(self, tmp_path, service_deps):
        from litrag.errors import ConfigurationError

        config = ServiceConfig(
            dimension=DIM, store_path=str(tmp_path / "s.bin"), ui_dir=str(tmp_path)
        )
        with pytest.raises(ConfigurationError):
            create_app(config, service_deps)
