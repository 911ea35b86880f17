"""Shared test utilities: scripted providers, independent reference
implementations, and random-corpus builders.

The reference implementations here deliberately avoid the library code
paths they check: pure-Python fsum arithmetic instead of numpy, and a
from-scratch rewrite of the deterministic embedder recipe.
"""

from __future__ import annotations

import math
import random
from pathlib import Path
from typing import Callable

from litrag.models import DocumentMetadata, SearchParams
from litrag.providers import task_of
from litrag.store import ChunkIndexEntry, DocEntry, KnowledgeStore

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"
CORPUS_MANIFEST = FIXTURES / "corpus" / "manifest.json"
COMPOUND_TABLE = FIXTURES / "compounds.json"
SAMPLE_TESTSET = FIXTURES / "testset" / "sample_mcq.jsonl"
GOLDEN_DIR = Path(__file__).resolve().parent / "golden"

# Hand-counted section totals for the fixture corpus (empty-body sections
# excluded), frozen from a manual read of the markdown files.
FIXTURE_CHUNK_COUNTS = {
    "d001": 8,
    "d002": 6,
    "d003": 5,
    "d004": 4,
    "d005": 8,
    "d006": 4,
    "d007": 3,
    "d008": 3,
    "d009": 8,
    "d010": 3,
}
FIXTURE_TOTAL_CHUNKS = 52
FIXTURE_REVIEW_IDS = {"d001", "d005", "d009"}


class RoutingTextProvider:
    """Scripted text provider keyed on the pipeline's task markers.

    Handlers are fixed strings or callables taking the full prompt. Every
    call is recorded for fan-out assertions.
    """

    def __init__(self, handlers: dict[str, str | Callable[[str], str]], default: str = ""):
        self.handlers = handlers
        self.default = default
        self.calls: list[tuple[str, str]] = []

    def available(self) -> bool:
        return True

    def complete(self, prompt: str, system: str | None = None) -> str:
        task = task_of(prompt)
        self.calls.append((task, prompt))
        handler = self.handlers.get(task, self.default)
        return handler(prompt) if callable(handler) else handler

    def count(self, task: str | None = None) -> int:
        if task is None:
            return len(self.calls)
        return sum(1 for t, _ in self.calls if t == task)


class StemMappedProvider:
    """Answers multiple-choice prompts by looking the stem up in a mapping."""

    def __init__(self, mapping: dict[str, str], default: str = "A"):
        self.mapping = mapping
        self.default = default

    def available(self) -> bool:
        return True

    def complete(self, prompt: str, system: str | None = None) -> str:
        for stem, letter in self.mapping.items():
            if stem in prompt:
                return letter
        return self.default


def random_merge_plan(rng: random.Random, chunks):
    """Random valid merge plan: disjoint contiguous runs in document order."""
    from litrag.models import MergePlan

    ids = [c.chunk_id for c in chunks]
    groups = []
    i = 0
    while i < len(ids) - 1:
        if rng.random() < 0.4:
            size = min(rng.randint(2, 4), len(ids) - i)
            groups.append(ids[i : i + size])
            i += size
        else:
            i += 1
    return MergePlan(groups=groups)


# ----------------------------------------------------------------------
# Independent reimplementation of the deterministic embedder recipe
# ----------------------------------------------------------------------

_TWO64 = 2**64


def ref_fnv1a64(data: bytes) -> int:
    value = 14695981039346656037
    for byte in data:
        value = ((value ^ byte) * 1099511628211) % _TWO64
    return value


def ref_splitmix_outputs(seed: int, count: int) -> list[int]:
    outputs = []
    state = seed
    for _ in range(count):
        state = (state + 0x9E3779B97F4A7C15) % _TWO64
        mixed = state
        mixed = ((mixed ^ (mixed >> 30)) * 0xBF58476D1CE4E5B9) % _TWO64
        mixed = ((mixed ^ (mixed >> 27)) * 0x94D049BB133111EB) % _TWO64
        mixed = mixed ^ (mixed >> 31)
        outputs.append(mixed)
    return outputs


def ref_hash_embedding(text: str, dimension: int) -> list[float]:
    raw = [
        z / (_TWO64 - 1) * 2.0 - 1.0
        for z in ref_splitmix_outputs(ref_fnv1a64(text.encode("utf-8")), dimension)
    ]
    norm = math.sqrt(math.fsum(v * v for v in raw))
    return [v / norm for v in raw]


# ----------------------------------------------------------------------
# Exhaustive-scan reference for the two-stage retrieval rule
# ----------------------------------------------------------------------


def ref_cosine(a, b) -> float:
    dot = math.fsum(x * y for x, y in zip(a, b))
    na = math.sqrt(math.fsum(x * x for x in a))
    nb = math.sqrt(math.fsum(y * y for y in b))
    return dot / (na * nb)


def ref_search_summary(docs, query, limit, doc_type_filter=None):
    scored = [
        (doc_id, ref_cosine(vec, query))
        for doc_id, doc_type, vec in docs
        if doc_type_filter is None or doc_type == doc_type_filter
    ]
    scored.sort(key=lambda item: (-item[1], item[0]))
    return scored[:limit]


def ref_search_chunks(chunks, query, allowed, limit, min_score):
    hits = []
    for chunk_id, doc_id, chunk_vec, question_vecs in chunks:
        if doc_id not in allowed:
            continue
        best_score = ref_cosine(chunk_vec, query)
        best_kind, best_id = "chunk", chunk_id
        for qid, vec in question_vecs:
            score = ref_cosine(vec, query)
            if score > best_score:
                best_score, best_kind, best_id = score, "question", qid
        if best_score > min_score:
            hits.append((chunk_id, doc_id, best_score, best_kind, best_id))
    hits.sort(key=lambda hit: (-hit[2], hit[0]))
    return hits[:limit]


def ref_hierarchical(docs, chunks, query, params: SearchParams):
    summary = ref_search_summary(docs, query, params.summary_limit, params.doc_type_filter)
    allowed = {doc_id for doc_id, _ in summary}
    return ref_search_chunks(chunks, query, allowed, params.chunk_limit, params.min_score)


def store_contents(store: KnowledgeStore):
    """Pull the store's exact stored vectors for the reference scan."""
    docs, chunks = [], []
    for doc, entries in store.entries():
        docs.append((doc.doc_id, doc.doc_type, [float(x) for x in doc.abstract_vector]))
        for entry in entries:
            chunks.append(
                (
                    entry.chunk_id,
                    entry.doc_id,
                    [float(x) for x in entry.chunk_vector],
                    [(qid, [float(x) for x in vec]) for qid, vec in entry.question_vectors],
                )
            )
    return docs, chunks


# ----------------------------------------------------------------------
# Random corpus builders
# ----------------------------------------------------------------------


def random_unit_vector(rng: random.Random, dimension: int) -> list[float]:
    vec = [rng.gauss(0.0, 1.0) for _ in range(dimension)]
    norm = math.sqrt(math.fsum(v * v for v in vec))
    return [v / norm for v in vec]


def metadata_for(doc_id: str, doc_type: str = "research") -> DocumentMetadata:
    return DocumentMetadata(
        doc_id=doc_id,
        title=f"Study {doc_id}",
        authors=[f"Author {doc_id.upper()}"],
        journal="Synthetic Journal",
        year=2020,
        doc_type=doc_type,
    )


def build_random_store(
    seed: int,
    dimension: int = 8,
    n_docs: int = 20,
    max_chunks_per_doc: int = 5,
    max_questions: int = 4,
    review_fraction: float = 0.3,
) -> KnowledgeStore:
    """Random corpus of unit vectors; small dimension keeps cosine values
    spread widely so score thresholds actually bite."""
    rng = random.Random(seed)
    store = KnowledgeStore(dimension=dimension)
    for d in range(n_docs):
        doc_id = f"doc{d:04d}"
        doc_type = "review" if rng.random() < review_fraction else "research"
        chunks = []
        for c in range(rng.randint(1, max_chunks_per_doc)):
            chunk_id = f"{doc_id}#{c + 1:04d}"
            questions = [
                (f"{chunk_id}/q{q + 1}", random_unit_vector(rng, dimension))
                for q in range(rng.randint(0, max_questions))
            ]
            chunks.append(
                ChunkIndexEntry(
                    chunk_id=chunk_id,
                    doc_id=doc_id,
                    chunk_vector=random_unit_vector(rng, dimension),
                    question_vectors=questions,
                    text=f"chunk text {chunk_id}",
                    heading_path=["Section"],
                )
            )
        store.upsert(
            DocEntry(
                doc_id=doc_id,
                abstract_vector=random_unit_vector(rng, dimension),
                doc_type=doc_type,
                metadata=metadata_for(doc_id, doc_type),
            ),
            chunks,
        )
    return store
