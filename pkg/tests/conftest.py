from __future__ import annotations

import pytest

from litrag.ingest import ingest_corpus
from litrag.qa import PipelineDeps
from litrag.store import KnowledgeStore
from litrag.stubs import FixtureCompoundProvider, HashEmbedder, OfflineTextProvider

from helpers import COMPOUND_TABLE, CORPUS_MANIFEST

FIXTURE_DIMENSION = 64


@pytest.fixture(scope="session")
def corpus_store() -> KnowledgeStore:
    """Fixture corpus ingested with deterministic offline providers.

    Session-scoped and shared: tests must treat it as read-only.
    """
    store = KnowledgeStore(dimension=FIXTURE_DIMENSION)
    ingest_corpus(
        CORPUS_MANIFEST,
        store,
        OfflineTextProvider(),
        HashEmbedder(FIXTURE_DIMENSION),
    )
    return store


@pytest.fixture()
def corpus_deps(corpus_store) -> PipelineDeps:
    return PipelineDeps(
        store=corpus_store,
        text_provider=OfflineTextProvider(),
        embedding_provider=HashEmbedder(FIXTURE_DIMENSION),
        compound_provider=FixtureCompoundProvider.from_file(COMPOUND_TABLE),
    )
