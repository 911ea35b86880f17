"""Chunk enrichment: hypothetical questions and vector embeddings.

Every chunk is offered to the text provider to generate up to four
questions it could answer; the questions are embedded beside the chunk so
question-shaped queries can reach statement-shaped knowledge.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Literal, Sequence

import numpy as np

from .errors import EmbeddingDimensionError, ProviderError
from .models import Chunk, HypotheticalQuestion, RawDocument
from .providers import TASK_QUESTIONS, EmbeddingProvider, TextProvider, task_header

logger = logging.getLogger(__name__)

DEFAULT_MAX_QUESTIONS = 4

# Texts longer than this are cut before embedding; only the head is embedded.
EMBED_CHAR_LIMIT = 8000


def _question_prompt(chunk: Chunk, max_q: int) -> str:
    heading = " > ".join(chunk.heading_path) or "(none)"
    return (
        f"{task_header(TASK_QUESTIONS)}\n"
        f"Write up to {max_q} questions that the passage below can answer. "
        "One question per line, no numbering.\n"
        f"Heading: {heading}\n"
        "--- PASSAGE ---\n"
        f"{chunk.text}\n"
        "--- END PASSAGE ---"
    )


def generate_questions(
    chunk: Chunk,
    text_llm: TextProvider,
    max_q: int = DEFAULT_MAX_QUESTIONS,
    warnings: list[str] | None = None,
) -> list[HypotheticalQuestion]:
    """Generate hypothetical questions for one chunk.

    Provider output is parsed one question per line; blank lines drop,
    surplus lines truncate to ``max_q``. Failure degrades to an empty list
    (the chunk stays retrievable through its own vector).
    """
    if max_q < 1:
        raise ValueError("max_q must be >= 1")
    try:
        completion = text_llm.complete(_question_prompt(chunk, max_q))
    except ProviderError as exc:
        _warn(warnings, f"question generation failed for {chunk.chunk_id} ({exc})")
        return []
    lines = [line.strip() for line in completion.splitlines() if line.strip()]
    if not lines:
        _warn(warnings, f"question generation returned nothing for {chunk.chunk_id}")
        return []
    return [
        HypotheticalQuestion(
            question_id=f"{chunk.chunk_id}/q{i}",
            chunk_id=chunk.chunk_id,
            text=line,
        )
        for i, line in enumerate(lines[:max_q], start=1)
    ]


def embed_texts(
    texts: Sequence[str],
    embedder: EmbeddingProvider,
    dimension: int | None = None,
) -> list[np.ndarray]:
    """Embed texts into unit-normalized float64 vectors, order-preserving.

    Raises EmbeddingDimensionError when the provider's vector length does
    not match ``dimension`` (or is inconsistent across the batch).
    """
    expected = dimension if dimension is not None else getattr(embedder, "dimension", None)
    clipped = [text[:EMBED_CHAR_LIMIT] for text in texts]
    raw = embedder.embed(clipped)
    if len(raw) != len(clipped):
        raise ProviderError(
            f"embedding provider returned {len(raw)} vectors for {len(clipped)} texts"
        )
    vectors = []
    for values in raw:
        vec = np.asarray(values, dtype=np.float64)
        if vec.ndim != 1:
            raise EmbeddingDimensionError("embedding provider returned a non-flat vector")
        if expected is not None and vec.shape[0] != expected:
            raise EmbeddingDimensionError(
                f"embedding dimension {vec.shape[0]} does not match configured {expected}"
            )
        norm = float(np.linalg.norm(vec))
        if norm == 0.0:
            raise ProviderError("embedding provider returned a zero vector")
        vectors.append(vec / norm)
    return vectors


@dataclass(frozen=True)
class EmbeddingRecord:
    """A vector bound to an abstract, chunk, or hypothetical question."""

    vector: np.ndarray
    kind: Literal["abstract", "chunk", "question"]
    target_id: str
    doc_id: str


def embed_document(
    doc: RawDocument,
    chunks: Sequence[Chunk],
    questions: Sequence[HypotheticalQuestion],
    embedder: EmbeddingProvider,
    dimension: int | None = None,
) -> list[EmbeddingRecord]:
    """Embed one document's abstract, chunks, and questions in a single batch."""
    doc_id = doc.metadata.doc_id
    texts = [doc.abstract] + [c.text for c in chunks] + [q.text for q in questions]
    vectors = embed_texts(texts, embedder, dimension)

    records = [EmbeddingRecord(vectors[0], "abstract", doc_id, doc_id)]
    offset = 1
    for chunk, vec in zip(chunks, vectors[offset : offset + len(chunks)]):
        records.append(EmbeddingRecord(vec, "chunk", chunk.chunk_id, chunk.doc_id))
    offset += len(chunks)
    for question, vec in zip(questions, vectors[offset:]):
        records.append(EmbeddingRecord(vec, "question", question.question_id, doc_id))
    return records


def _warn(warnings: list[str] | None, message: str) -> None:
    logger.warning(message)
    if warnings is not None:
        warnings.append(message)
