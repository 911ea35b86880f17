"""Request/response models specific to the HTTP API.

The domain models double as wire schemas; this module adds the envelopes
that exist only at the service boundary.
"""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, Field, model_validator

from ..models import Citation, DocumentMetadata, MoleculeRecord

ErrorCode = Literal["bad_request", "provider_unavailable", "store_unavailable", "internal"]


class ApiError(BaseModel):
    code: ErrorCode
    message: str
    request_id: str


class PartialResult(BaseModel):
    """What survived a failed answer stage: retrieval work is never lost."""

    citations: list[Citation] = Field(default_factory=list)
    molecules: list[MoleculeRecord] = Field(default_factory=list)


class ErrorEnvelope(BaseModel):
    error: ApiError
    partial: Optional[PartialResult] = None


class IngestDocumentRef(BaseModel):
    markdown_path: str
    sidecar_path: str


class IngestRequest(BaseModel):
    manifest_path: Optional[str] = None
    documents: Optional[list[IngestDocumentRef]] = None

    @model_validator(mode="after")
    def _one_source(self) -> "IngestRequest":
        if self.manifest_path is None and not self.documents:
            raise ValueError("provide manifest_path or a documents list")
        return self


class IngestStatus(BaseModel):
    status: Literal["completed"] = "completed"
    documents: int
    chunks: int
    questions: int
    skipped_doc_ids: list[str] = Field(default_factory=list)
    warnings: list[str] = Field(default_factory=list)


class DocumentInfo(BaseModel):
    doc_id: str
    metadata: DocumentMetadata
    citation: str


class StoreCounts(BaseModel):
    docs: int
    chunks: int
    questions: int


class HealthResponse(BaseModel):
    status: Literal["ok"] = "ok"
    dimension: int
    store: StoreCounts
    providers: dict[str, bool]
