"""FastAPI service exposing the platform.

Endpoints:
  POST /api/qa              expert question answering
  POST /api/research        research decomposition
  POST /api/ingest          ingest markdown+sidecar documents
  GET  /api/documents/{id}  document metadata and citation string
  GET  /api/health          store counts and provider reachability

Requests are stateless; ``session_id`` is echoed, never stored. Every
non-success response carries exactly one error object with a request id.
"""

from __future__ import annotations

import logging
import threading
import uuid
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse

from ..config import ServiceConfig, build_deps, open_store
from ..errors import (
    AnswerGenerationError,
    ConfigurationError,
    LitragError,
    ProviderError,
    StoreError,
    ValidationError,
)
from ..ingest import ManifestEntry, format_citation, ingest_entries, load_manifest
from ..models import QARequest, QAResponse, ResearchReport, ResearchRequest
from ..qa import PipelineDeps, answer_query
from ..research import run_research
from .schemas import (
    ApiError,
    DocumentInfo,
    ErrorEnvelope,
    HealthResponse,
    IngestRequest,
    IngestStatus,
    PartialResult,
    StoreCounts,
)

logger = logging.getLogger(__name__)


def _request_id(request: Request) -> str:
    return getattr(request.state, "request_id", "unknown")


def _error_response(
    request: Request,
    status_code: int,
    code: str,
    message: str,
    partial: PartialResult | None = None,
) -> JSONResponse:
    envelope = ErrorEnvelope(
        error=ApiError(code=code, message=message, request_id=_request_id(request)),
        partial=partial,
    )
    return JSONResponse(status_code=status_code, content=envelope.model_dump(exclude_none=True))


def create_app(config: ServiceConfig | None = None, deps: PipelineDeps | None = None) -> FastAPI:
    """Build the service. ``deps`` overrides config-driven wiring in tests."""
    config = config or ServiceConfig()
    if deps is None:
        deps = build_deps(config, open_store(config))

    app = FastAPI(title="litrag", version="0.1.0")
    app.state.config = config
    app.state.deps = deps
    app.state.ingest_lock = threading.Lock()

    @app.middleware("http")
    async def tag_request(request: Request, call_next):
        request.state.request_id = uuid.uuid4().hex
        response = await call_next(request)
        response.headers["X-Request-ID"] = request.state.request_id
        return response

    @app.exception_handler(RequestValidationError)
    async def bad_request_handler(request: Request, exc: RequestValidationError):
        return _error_response(request, 400, "bad_request", str(exc.errors()[:3]))

    @app.exception_handler(ValidationError)
    async def domain_validation_handler(request: Request, exc: ValidationError):
        return _error_response(request, 400, "bad_request", str(exc))

    @app.exception_handler(AnswerGenerationError)
    async def answer_failure_handler(request: Request, exc: AnswerGenerationError):
        partial = PartialResult(citations=exc.citations, molecules=exc.molecules)
        return _error_response(request, 502, "provider_unavailable", str(exc), partial)

    @app.exception_handler(ProviderError)
    async def provider_handler(request: Request, exc: ProviderError):
        return _error_response(request, 502, "provider_unavailable", str(exc))

    @app.exception_handler(StoreError)
    async def store_handler(request: Request, exc: StoreError):
        return _error_response(request, 503, "store_unavailable", str(exc))

    @app.exception_handler(LitragError)
    async def internal_domain_handler(request: Request, exc: LitragError):
        return _error_response(request, 500, "internal", str(exc))

    @app.exception_handler(Exception)
    async def internal_handler(request: Request, exc: Exception):
        logger.exception("unhandled error", exc_info=exc)
        return _error_response(request, 500, "internal", "internal error")

    @app.post("/api/qa", response_model=QAResponse)
    def qa_endpoint(body: QARequest) -> QAResponse:
        return answer_query(body, app.state.deps)

    @app.post("/api/research", response_model=ResearchReport)
    def research_endpoint(body: ResearchRequest) -> ResearchReport:
        return run_research(body, app.state.deps)

    @app.post("/api/ingest", response_model=IngestStatus)
    def ingest_endpoint(body: IngestRequest) -> IngestStatus:
        if body.manifest_path is not None:
            entries = load_manifest(body.manifest_path)
        else:
            entries = [
                ManifestEntry(Path(ref.markdown_path), Path(ref.sidecar_path))
                for ref in body.documents or []
            ]
        cfg: ServiceConfig = app.state.config
        active: PipelineDeps = app.state.deps
        with app.state.ingest_lock:
            report = ingest_entries(
                entries,
                active.store,
                active.text_provider,
                active.embedding_provider,
                min_chunk_chars=cfg.min_chunk_chars,
                max_questions=cfg.max_questions,
                clean=cfg.clean_chunks,
                relevance_screen=cfg.relevance_screen,
                screen_topic=cfg.screen_topic,
            )
            active.store.persist(cfg.store_path)
        return IngestStatus(
            documents=report.documents,
            chunks=report.chunks,
            questions=report.questions,
            skipped_doc_ids=report.skipped_doc_ids,
            warnings=report.warnings,
        )

    @app.get("/api/documents/{doc_id}", response_model=DocumentInfo)
    def document_endpoint(doc_id: str, request: Request):
        metadata = app.state.deps.store.document_metadata(doc_id)
        if metadata is None:
            return _error_response(request, 404, "bad_request", f"unknown document {doc_id}")
        return DocumentInfo(doc_id=doc_id, metadata=metadata, citation=format_citation(metadata))

    @app.get("/api/health", response_model=HealthResponse)
    def health_endpoint() -> HealthResponse:
        active: PipelineDeps = app.state.deps
        stats = active.store.stats()
        providers = {
            "text": _available(active.text_provider),
            "embedding": _available(active.embedding_provider),
            "compound": _available(active.compound_provider),
        }
        return HealthResponse(
            dimension=active.store.dimension,
            store=StoreCounts(docs=stats.docs, chunks=stats.chunks, questions=stats.questions),
            providers=providers,
        )

    if config.ui_dir:
        ui_root = Path(config.ui_dir)
        if not (ui_root / "index.html").exists():
            raise ConfigurationError(f"ui_dir {ui_root} has no index.html (build it first)")
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=ui_root, html=True), name="ui")

    return app


def _available(provider: object) -> bool:
    if provider is None:
        return False
    probe = getattr(provider, "available", None)
    if callable(probe):
        try:
            return bool(probe())
        except Exception:  # reachability probe must never break health
            return False
    return True
