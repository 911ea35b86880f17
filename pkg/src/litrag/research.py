"""Research mode: review-grounded decomposition of a topic.

Stage one retrieves context exclusively from review documents and spends a
single completion on an overview plus focused sub-questions. Stage two
answers each sub-question through the full expert Q&A pipeline, optionally
in parallel. Stage three synthesizes the sub-answers, citing a
consolidated bibliography renumbered by first appearance.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor

from .errors import LitragError, ProviderError, ResearchError
from .models import (
    Citation,
    Hit,
    QARequest,
    ResearchReport,
    ResearchRequest,
    SearchParams,
    SubAnswer,
)
from .providers import (
    TASK_OVERVIEW,
    TASK_SUBQUESTIONS,
    TASK_SYNTHESIS,
    TextProvider,
    task_header,
)
from .qa import PipelineDeps, answer_query, build_citations, embed_query, format_reference_blocks

logger = logging.getLogger(__name__)

SUBQUESTION_MARKER = "SUB-QUESTIONS:"


def retrieve_review_context(
    topic: str,
    deps: PipelineDeps,
    params: SearchParams | None = None,
) -> tuple[list[Hit], list[Citation]]:
    """Hierarchical retrieval restricted to review documents.

    Research papers never enter the candidate set: the document-type filter
    applies at the summary layer.
    """
    params = params or SearchParams()
    review_params = params.model_copy(update={"doc_type_filter": "review"})
    qvec = embed_query(topic, deps)
    hits = deps.store.hierarchical_search(qvec, review_params)
    return hits, build_citations(hits, deps.store)


def _parse_questions(completion: str, max_n: int) -> list[str]:
    """Line-wise question parsing: strip, drop blanks, dedup, truncate."""
    questions: list[str] = []
    seen: set[str] = set()
    for line in completion.splitlines():
        text = line.strip()
        if not text or text in seen:
            continue
        seen.add(text)
        questions.append(text)
        if len(questions) == max_n:
            break
    return questions


def generate_subquestions(
    topic: str,
    context_text: str,
    text_llm: TextProvider,
    max_n: int = 5,
    warnings: list[str] | None = None,
) -> list[str]:
    """Generate up to ``max_n`` sub-questions for a topic.

    Falls back to the topic itself when the provider fails or yields
    nothing parseable — the flow degrades to plain expert Q&A rather than
    dead-ending.
    """
    if max_n < 1:
        raise ValueError("max_n must be >= 1")
    prompt = (
        f"{task_header(TASK_SUBQUESTIONS)}\n"
        f"Based on the context below, write up to {max_n} focused sub-questions "
        "that together cover the topic. One per line, no numbering.\n"
        "--- CONTEXT ---\n"
        f"{context_text}\n"
        "--- END CONTEXT ---\n"
        f"Topic: {topic}"
    )
    try:
        completion = text_llm.complete(prompt)
    except ProviderError as exc:
        _warn(warnings, f"sub-question generation failed ({exc}); using the topic directly")
        return [topic]
    questions = _parse_questions(completion, max_n)
    if not questions:
        _warn(warnings, "sub-question generation yielded nothing; using the topic directly")
        return [topic]
    return questions


def _stage_one(
    topic: str,
    hits: list[Hit],
    citations: list[Citation],
    deps: PipelineDeps,
    max_n: int,
    warnings: list[str],
) -> tuple[str, list[str]]:
    """One completion produces both the overview and the sub-questions,
    keeping the provider fan-out at two calls beyond the expert answers."""
    chunk_texts = {hit.chunk_id: deps.store.chunk_text(hit.chunk_id) for hit in hits}
    blocks = format_reference_blocks(hits, chunk_texts, citations, deps.prompt_budget)
    material = "\n".join(blocks) if blocks else "(no review material retrieved)"
    prompt = (
        f"{task_header(TASK_OVERVIEW)}\n"
        "Using the review material below, write a short overview of the topic. "
        f"Then write a line exactly '{SUBQUESTION_MARKER}' followed by up to "
        f"{max_n} focused sub-questions, one per line.\n"
        "--- REVIEW MATERIAL ---\n"
        f"{material}\n"
        "--- END MATERIAL ---\n"
        f"Topic: {topic}"
    )
    try:
        completion = deps.text_provider.complete(prompt)
    except ProviderError as exc:
        _warn(warnings, f"overview generation failed ({exc}); using the topic directly")
        return "", [topic]
    overview, marker, tail = completion.partition(SUBQUESTION_MARKER)
    questions = _parse_questions(tail, max_n) if marker else []
    if not questions:
        _warn(warnings, "overview produced no sub-questions; using the topic directly")
        questions = [topic]
    return overview.strip(), questions


def _synthesis_prompt(
    topic: str,
    overview: str,
    sub_answers: list[SubAnswer],
    bibliography: list[Citation],
) -> str:
    """Each sub-answer is presented with its citation numbers remapped to
    the consolidated bibliography so the synthesis can cite consistently."""
    consolidated = {c.doc_id: c.ref_index for c in bibliography}
    lines = [
        task_header(TASK_SYNTHESIS),
        "Combine the sub-answers below into one coherent report. Cite sources "
        "by bibliography number, like [ref 2].",
        f"Topic: {topic}",
    ]
    if overview:
        lines.append(f"Overview: {overview}")
    for i, sub in enumerate(sub_answers, start=1):
        refs = sorted({consolidated[c.doc_id] for c in sub.response.citations})
        ref_note = ", ".join(f"[ref {r}]" for r in refs) or "(no sources)"
        lines.append(f"Sub-question {i}: {sub.question}")
        lines.append(f"Answer (sources {ref_note}): {sub.response.answer_text}")
    lines.append("Bibliography:")
    for citation in bibliography:
        lines.append(f"[ref {citation.ref_index}] {citation.formatted}")
    return "\n".join(lines)


def _consolidate(sub_answers: list[SubAnswer]) -> list[Citation]:
    """Deduplicate sub-answer citations by document, renumbered 1..m in
    first-appearance order across the sub-answers."""
    bibliography: list[Citation] = []
    seen: set[str] = set()
    for sub in sub_answers:
        for citation in sub.response.citations:
            if citation.doc_id in seen:
                continue
            seen.add(citation.doc_id)
            bibliography.append(
                citation.model_copy(update={"ref_index": len(bibliography) + 1})
            )
    return bibliography


def run_research(request: ResearchRequest, deps: PipelineDeps) -> ResearchReport:
    """Run the full research flow for one topic."""
    warnings: list[str] = []
    hits, overview_citations = retrieve_review_context(request.topic, deps, request.params)
    overview, questions = _stage_one(
        request.topic, hits, overview_citations, deps, request.max_subquestions, warnings
    )

    def answer_one(question: str) -> SubAnswer:
        response = answer_query(
            QARequest(query=question, params=request.params), deps
        )
        return SubAnswer(question=question, response=response)

    sub_answers: list[SubAnswer] = []
    parallelism = max(1, deps.research_parallelism)
    with ThreadPoolExecutor(max_workers=parallelism) as pool:
        futures = [pool.submit(answer_one, q) for q in questions]
        for question, future in zip(questions, futures):
            try:
                sub_answers.append(future.result())
            except LitragError as exc:
                _warn(warnings, f"sub-question failed and was skipped: {question!r} ({exc})")
    if not sub_answers:
        raise ResearchError(f"all {len(questions)} sub-questions failed for {request.topic!r}")

    bibliography = _consolidate(sub_answers)
    try:
        synthesis = deps.text_provider.complete(
            _synthesis_prompt(request.topic, overview, sub_answers, bibliography)
        )
    except ProviderError as exc:
        _warn(warnings, f"synthesis failed ({exc}); report carries sub-answers only")
        synthesis = ""

    return ResearchReport(
        topic=request.topic,
        overview=overview,
        overview_citations=overview_citations,
        sub_answers=sub_answers,
        synthesis=synthesis,
        bibliography=bibliography,
        warnings=warnings,
    )


def _warn(warnings: list[str] | None, message: str) -> None:
    logger.warning(message)
    if warnings is not None:
        warnings.append(message)
