"""Expert question answering.

Pipeline per request: relevance check, compound lookup for relevant
queries, query embedding, hierarchical retrieval, per-document citations in
first-hit order, source-grounded prompt, answer generation. Responses are
staged envelopes: molecule records first (when any), then citations, then
the answer — metadata is displayable before the answer exists.

Degradation contract: a failing relevance or compound stage never blocks
the answer; a failing answer stage never loses the citations already
computed.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .enrichment import embed_texts
from .errors import AnswerGenerationError, ProviderError
from .ingest import format_citation
from .models import (
    AnswerEvent,
    Citation,
    CitationsEvent,
    Hit,
    MoleculeRecord,
    MoleculesEvent,
    QAEvent,
    QARequest,
    QAResponse,
)
from .providers import (
    TASK_ANSWER,
    TASK_RELEVANCE,
    CompoundProvider,
    EmbeddingProvider,
    TextProvider,
    task_header,
)
from .store import KnowledgeStore

logger = logging.getLogger(__name__)

DEFAULT_PROMPT_BUDGET = 24000
DEFAULT_COMPOUND_LIMIT = 10

NO_CONTEXT_INSTRUCTION = (
    "No reference material was retrieved for this question. State explicitly "
    "that the knowledge base provides no direct support, then answer briefly."
)
CITE_INSTRUCTION = (
    "Answer the question using the numbered references above. Cite supporting "
    "references inline by number, like [ref 1]. Synthesize in your own words; "
    "do not quote reference text verbatim."
)


@dataclass
class PipelineDeps:
    """Everything a request pipeline needs, bundled for injection."""

    store: KnowledgeStore
    text_provider: TextProvider
    embedding_provider: EmbeddingProvider
    compound_provider: CompoundProvider | None = None
    prompt_budget: int = DEFAULT_PROMPT_BUDGET
    compound_limit: int = DEFAULT_COMPOUND_LIMIT
    research_parallelism: int = 2
    max_subquestions: int = 5


def assess_relevance(query: str, text_llm: TextProvider, warnings: list[str] | None = None) -> bool:
    """Ask whether the query concerns specific chemical compounds.

    Anything other than a clear "yes" is treated as not relevant, so an
    unparseable verdict can never trigger a spurious compound lookup.
    """
    prompt = (
        f"{task_header(TASK_RELEVANCE)}\n"
        "Does the question below ask about specific chemical compounds or "
        "molecules? Answer yes or no.\n"
        f"Question: {query}"
    )
    try:
        verdict = text_llm.complete(prompt)
    except ProviderError as exc:
        _warn(warnings, f"relevance check failed ({exc}); compound lookup skipped")
        return False
    return verdict.strip().lower().startswith("yes")


def lookup_compounds(
    query: str,
    compound_client: CompoundProvider | None,
    limit: int = DEFAULT_COMPOUND_LIMIT,
    warnings: list[str] | None = None,
) -> list[MoleculeRecord]:
    """Fetch molecule records for the query; failures never block the answer."""
    if compound_client is None:
        return []
    try:
        records = compound_client.lookup(query)
    except ProviderError as exc:
        _warn(warnings, f"compound lookup failed ({exc})")
        return []
    return records[:limit]


def build_citations(hits: list[Hit], store: KnowledgeStore) -> list[Citation]:
    """One citation per document, numbered by first appearance in hit order."""
    citations: list[Citation] = []
    seen: dict[str, int] = {}
    for hit in hits:
        if hit.doc_id in seen:
            continue
        metadata = store.document_metadata(hit.doc_id)
        if metadata is None:
            continue
        url = metadata.source_url or (f"https://doi.org/{metadata.doi}" if metadata.doi else None)
        seen[hit.doc_id] = len(citations) + 1
        citations.append(
            Citation(
                ref_index=len(citations) + 1,
                doc_id=hit.doc_id,
                formatted=format_citation(metadata),
                url=url,
            )
        )
    return citations


def format_reference_blocks(
    hits: list[Hit],
    chunk_texts: dict[str, str],
    citations: list[Citation],
    budget: int,
    overhead: int = 0,
) -> list[str]:
    """Reference blocks "[ref k] <citation> :: <chunk text>" in hit order.

    Blocks are added while the running total (plus ``overhead`` for the
    fixed prompt scaffold) stays within ``budget``; since hits arrive in
    score order, the lowest-scored hits drop first.
    """
    ref_by_doc = {c.doc_id: c for c in citations}
    blocks: list[str] = []
    total = overhead
    for hit in hits:
        citation = ref_by_doc.get(hit.doc_id)
        if citation is None:
            continue
        block = f"[ref {citation.ref_index}] {citation.formatted} :: {chunk_texts[hit.chunk_id]}"
        if blocks and total + len(block) + 1 > budget:
            break
        blocks.append(block)
        total += len(block) + 1
    return blocks


def build_prompt(
    query: str,
    hits: list[Hit],
    chunk_texts: dict[str, str],
    citations: list[Citation],
    budget: int = DEFAULT_PROMPT_BUDGET,
) -> str:
    """Assemble the answer prompt: reference blocks, citing instructions,
    then the query."""
    lines = [task_header(TASK_ANSWER)]
    overhead = len(lines[0]) + len(CITE_INSTRUCTION) + len(NO_CONTEXT_INSTRUCTION) + len(query) + 64
    blocks = format_reference_blocks(hits, chunk_texts, citations, budget, overhead)
    lines.extend(blocks)
    lines.append(CITE_INSTRUCTION if blocks else NO_CONTEXT_INSTRUCTION)
    lines.append(f"Question: {query}")
    return "\n".join(lines)


def embed_query(text: str, deps: PipelineDeps) -> np.ndarray:
    return embed_texts([text], deps.embedding_provider, deps.store.dimension)[0]


def answer_query(request: QARequest, deps: PipelineDeps) -> QAResponse:
    """Run the full expert Q&A pipeline for one request."""
    warnings: list[str] = []

    molecules: list[MoleculeRecord] = []
    if assess_relevance(request.query, deps.text_provider, warnings):
        molecules = lookup_compounds(
            request.query, deps.compound_provider, deps.compound_limit, warnings
        )

    qvec = embed_query(request.query, deps)
    hits = deps.store.hierarchical_search(qvec, request.params)
    citations = build_citations(hits, deps.store)
    chunk_texts = {hit.chunk_id: deps.store.chunk_text(hit.chunk_id) for hit in hits}
    prompt = build_prompt(request.query, hits, chunk_texts, citations, deps.prompt_budget)

    try:
        answer_text = deps.text_provider.complete(prompt)
    except ProviderError as exc:
        raise AnswerGenerationError(
            f"answer generation failed: {exc}",
            citations=citations,
            molecules=molecules,
            trace=hits,
            warnings=warnings,
        ) from exc

    events: list[QAEvent] = []
    if molecules:
        events.append(MoleculesEvent(molecules=molecules))
    events.append(CitationsEvent(citations=citations))
    events.append(AnswerEvent(text=answer_text))
    return QAResponse(
        events=events,
        answer_text=answer_text,
        citations=citations,
        molecules=molecules,
        trace=hits,
        warnings=warnings,
        session_id=request.session_id,
    )


def _warn(warnings: list[str] | None, message: str) -> None:
    logger.warning(message)
    if warnings is not None:
        warnings.append(message)
