"""Domain models.

Everything that crosses the API boundary is a pydantic model so the service
layer can validate and serialize it without translation. Vector payloads
stay out of these models; they live as numpy arrays inside the store.
"""

from __future__ import annotations

from typing import Annotated, Literal, Optional, Union

from pydantic import BaseModel, Field, field_validator, model_validator

DocType = Literal["research", "review"]

DEFAULT_SUMMARY_LIMIT = 400
DEFAULT_CHUNK_LIMIT = 20
DEFAULT_MIN_SCORE = 0.7
DEFAULT_DIMENSION = 2048
DEFAULT_MAX_QUESTIONS = 4
DEFAULT_EVAL_TRIALS = 5


class DocumentMetadata(BaseModel):
    """Bibliographic record kept for every document so answers can cite it."""

    doc_id: str = Field(min_length=1)
    title: str = ""
    authors: list[str] = Field(default_factory=list)
    journal: str = ""
    doi: str = ""
    year: Optional[int] = Field(default=None, ge=1800, le=2100)
    doc_type: DocType = "research"
    source_url: Optional[str] = None
    # Optional citation detail; omitted parts collapse in the formatted string.
    volume: str = ""
    issue: str = ""
    pages: str = ""


class RawDocument(BaseModel):
    """One corpus document: sidecar metadata, abstract, and Markdown body."""

    metadata: DocumentMetadata
    abstract: str
    body_markdown: str = ""

    @field_validator("abstract")
    @classmethod
    def _abstract_non_empty(cls, v: str) -> str:
        if not v.strip():
            raise ValueError("abstract must be non-empty; it seeds the summary index")
        return v


class Chunk(BaseModel):
    """Heading-scoped text segment; the retrieval unit."""

    chunk_id: str
    doc_id: str
    heading_path: list[str] = Field(default_factory=list, max_length=3)
    level: int = Field(ge=0, le=3)
    text: str
    char_count: int

    @model_validator(mode="after")
    def _consistent(self) -> "Chunk":
        if self.char_count != len(self.text):
            raise ValueError("char_count must equal len(text)")
        if self.level != len(self.heading_path):
            raise ValueError("level must equal heading_path length")
        return self

    @classmethod
    def build(cls, chunk_id: str, doc_id: str, heading_path: list[str], text: str) -> "Chunk":
        return cls(
            chunk_id=chunk_id,
            doc_id=doc_id,
            heading_path=list(heading_path),
            level=len(heading_path),
            text=text,
            char_count=len(text),
        )

    def with_text(self, text: str) -> "Chunk":
        """Copy with replaced text and recomputed char_count."""
        return Chunk.build(self.chunk_id, self.doc_id, self.heading_path, text)


class MergePlan(BaseModel):
    """Groups of chunk ids to merge, each in document order.

    Structural invariants (disjoint groups, same document, >= 2 members,
    ascending document order) are checked against a concrete chunk list by
    :func:`litrag.ingest.validate_merge_plan`.
    """

    groups: list[list[str]] = Field(default_factory=list)

    def is_empty(self) -> bool:
        return not self.groups


class HypotheticalQuestion(BaseModel):
    """LLM-generated question a chunk can answer; indexed beside the chunk."""

    question_id: str
    chunk_id: str
    text: str = Field(min_length=1)


class SearchParams(BaseModel):
    """Two-stage retrieval parameters."""

    summary_limit: int = Field(default=DEFAULT_SUMMARY_LIMIT, ge=1)
    chunk_limit: int = Field(default=DEFAULT_CHUNK_LIMIT, ge=1)
    min_score: float = Field(default=DEFAULT_MIN_SCORE, ge=-1.0, le=1.0)
    doc_type_filter: Optional[DocType] = None


class Hit(BaseModel):
    """Scored retrieval result. The score aggregates a chunk's own vector and
    its question vectors by maximum; ``matched_*`` identify the winner."""

    chunk_id: str
    doc_id: str
    score: float
    matched_kind: Literal["chunk", "question"]
    matched_id: str


class MoleculeRecord(BaseModel):
    name: str
    smiles: str = Field(min_length=1)
    detail_url: Optional[str] = None


class Citation(BaseModel):
    ref_index: int = Field(ge=1)
    doc_id: str
    formatted: str
    url: Optional[str] = None


class MoleculesEvent(BaseModel):
    type: Literal["molecules"] = "molecules"
    molecules: list[MoleculeRecord]


class CitationsEvent(BaseModel):
    type: Literal["citations"] = "citations"
    citations: list[Citation]


class AnswerEvent(BaseModel):
    type: Literal["answer"] = "answer"
    text: str


QAEvent = Annotated[
    Union[MoleculesEvent, CitationsEvent, AnswerEvent],
    Field(discriminator="type"),
]


class QARequest(BaseModel):
    query: str = Field(min_length=1, max_length=8000)
    params: SearchParams = Field(default_factory=SearchParams)
    session_id: Optional[str] = None


class QAResponse(BaseModel):
    """Staged answer envelope.

    ``events`` preserves the display order the client must follow:
    molecules (when any), then citations, then the answer.
    """

    events: list[QAEvent]
    answer_text: str
    citations: list[Citation]
    molecules: list[MoleculeRecord]
    trace: list[Hit]
    warnings: list[str] = Field(default_factory=list)
    session_id: Optional[str] = None


class ResearchRequest(BaseModel):
    topic: str = Field(min_length=1)
    max_subquestions: int = Field(default=5, ge=1, le=10)
    params: SearchParams = Field(default_factory=SearchParams)


class SubAnswer(BaseModel):
    question: str
    response: QAResponse


class ResearchReport(BaseModel):
    topic: str
    overview: str
    overview_citations: list[Citation] = Field(default_factory=list)
    sub_answers: list[SubAnswer]
    synthesis: str
    bibliography: list[Citation]
    warnings: list[str] = Field(default_factory=list)


class MCQuestion(BaseModel):
    """Four-option benchmark item with a single correct answer."""

    qid: str = Field(min_length=1)
    stem: str = Field(min_length=1)
    options: list[str] = Field(min_length=4, max_length=4)
    correct: int = Field(ge=0, le=3)
    discipline: str = "general"
    source_ref: Optional[str] = None


class TrialResult(BaseModel):
    """One model answer to one question on one run.

    Carries the question's correct index and discipline so a persisted
    trial log can be refined and scored without the test set file.
    """

    qid: str
    model_id: str
    run_index: int = Field(ge=1)
    chosen: Optional[int] = Field(default=None, ge=0, le=3)
    parse_failed: bool = False
    correct_index: int = Field(ge=0, le=3)
    discipline: str = "general"

    @model_validator(mode="after")
    def _chosen_iff_parsed(self) -> "TrialResult":
        if self.parse_failed and self.chosen is not None:
            raise ValueError("parse_failed trials must not carry a chosen index")
        if not self.parse_failed and self.chosen is None:
            raise ValueError("successful trials must carry a chosen index")
        return self

    @property
    def is_correct(self) -> bool:
        return not self.parse_failed and self.chosen == self.correct_index


class EvalReport(BaseModel):
    refined_qids: list[str]
    model_accuracy: dict[str, float]
    trial_counts: dict[str, int]
    correct_counts: dict[str, int]
    discipline_accuracy: dict[str, dict[str, float]]

    @field_validator("model_accuracy")
    @classmethod
    def _unit_interval(cls, v: dict[str, float]) -> dict[str, float]:
        for model, acc in v.items():
            if not 0.0 <= acc <= 1.0:
                raise ValueError(f"accuracy for {model} outside [0, 1]")
        return v


class IngestReport(BaseModel):
    documents: int = 0
    chunks: int = 0
    questions: int = 0
    skipped_doc_ids: list[str] = Field(default_factory=list)
    warnings: list[str] = Field(default_factory=list)
