"""Literature-grounded retrieval-augmented question answering.

A Markdown corpus is segmented into heading-scoped chunks, enriched with
hypothetical questions, and embedded into a two-layer vector index
(abstract summaries, then chunks). Queries retrieve hierarchically and are
answered with per-document citations; a research mode decomposes topics
into sub-questions; a benchmark harness scores models on multiple-choice
test sets with and without retrieval.
"""

from .config import ServiceConfig, build_deps, load_config, open_store
from .enrichment import embed_texts, generate_questions
from .evaluation import (
    ModelSpec,
    load_testset,
    parse_choice,
    refine_testset,
    run_trials,
    score,
)
from .ingest import (
    apply_merges,
    format_citation,
    ingest_corpus,
    parse_markdown,
    propose_merges,
    segment_document,
)
from .models import (
    Chunk,
    Citation,
    DocumentMetadata,
    Hit,
    MCQuestion,
    MergePlan,
    QARequest,
    QAResponse,
    RawDocument,
    ResearchReport,
    ResearchRequest,
    SearchParams,
    TrialResult,
)
from .qa import PipelineDeps, answer_query, build_prompt
from .research import generate_subquestions, retrieve_review_context, run_research
from .store import ChunkIndexEntry, DocEntry, KnowledgeStore, cosine

__version__ = "0.1.0"

__all__ = [
    "Chunk",
    "ChunkIndexEntry",
    "Citation",
    "DocEntry",
    "DocumentMetadata",
    "Hit",
    "KnowledgeStore",
    "MCQuestion",
    "MergePlan",
    "ModelSpec",
    "PipelineDeps",
    "QARequest",
    "QAResponse",
    "RawDocument",
    "ResearchReport",
    "ResearchRequest",
    "SearchParams",
    "ServiceConfig",
    "TrialResult",
    "answer_query",
    "apply_merges",
    "build_deps",
    "build_prompt",
    "cosine",
    "embed_texts",
    "format_citation",
    "generate_questions",
    "generate_subquestions",
    "ingest_corpus",
    "load_config",
    "load_testset",
    "open_store",
    "parse_choice",
    "parse_markdown",
    "propose_merges",
    "refine_testset",
    "retrieve_review_context",
    "run_research",
    "run_trials",
    "score",
    "segment_document",
    "__version__",
]
