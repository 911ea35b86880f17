"""Service configuration and provider wiring.

Configuration is a JSON file. Credentials never live in it: provider
entries name the environment variable holding the key. The retrieval
defaults (summary limit 400, chunk limit 20, minimum score 0.7, dimension
2048, four questions per chunk, five evaluation trials) are defined here
and asserted by the test suite.
"""

from __future__ import annotations

import json
from pathlib import Path

from pydantic import BaseModel, Field, model_validator

from .errors import ConfigurationError
from .models import (
    DEFAULT_DIMENSION,
    DEFAULT_EVAL_TRIALS,
    DEFAULT_MAX_QUESTIONS,
    SearchParams,
)
from .providers import (
    HttpCompoundProvider,
    HttpEmbeddingProvider,
    HttpTextProvider,
)
from .qa import DEFAULT_COMPOUND_LIMIT, DEFAULT_PROMPT_BUDGET, PipelineDeps
from .store import KnowledgeStore
from .stubs import FixtureCompoundProvider, HashEmbedder, OfflineTextProvider


class ProviderSpec(BaseModel):
    """One provider entry: a kind plus kind-specific settings."""

    kind: str
    endpoint: str = ""
    model: str = ""
    api_key_env: str = ""
    path: str = ""


class ServiceConfig(BaseModel):
    store_path: str = "knowledge_store.bin"
    dimension: int = Field(default=DEFAULT_DIMENSION, ge=1)
    search: SearchParams = Field(default_factory=SearchParams)
    max_questions: int = Field(default=DEFAULT_MAX_QUESTIONS, ge=1)
    eval_trials: int = Field(default=DEFAULT_EVAL_TRIALS, ge=1)
    prompt_budget: int = Field(default=DEFAULT_PROMPT_BUDGET, ge=1)
    compound_limit: int = Field(default=DEFAULT_COMPOUND_LIMIT, ge=1)
    min_chunk_chars: int = Field(default=200, ge=0)
    max_subquestions: int = Field(default=5, ge=1, le=10)
    research_parallelism: int = Field(default=2, ge=1)
    clean_chunks: bool = True
    relevance_screen: bool = False
    screen_topic: str = ""
    host: str = "127.0.0.1"
    port: int = 8077
    # Optional directory with a built chat client (index.html + dist/);
    # served at / when set. The API works identically without it.
    ui_dir: str = ""
    text_provider: ProviderSpec = Field(default_factory=lambda: ProviderSpec(kind="offline"))
    embedding_provider: ProviderSpec = Field(default_factory=lambda: ProviderSpec(kind="hash"))
    compound_provider: ProviderSpec = Field(default_factory=lambda: ProviderSpec(kind="none"))

    @model_validator(mode="after")
    def _consistent(self) -> "ServiceConfig":
        # SearchParams validates its own invariants; nothing extra yet.
        return self


def load_config(path: str | Path | None) -> ServiceConfig:
    """Read a config file, or return defaults when no path is given."""
    if path is None:
        return ServiceConfig()
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc}") from exc
    try:
        return ServiceConfig(**data)
    except ValueError as exc:
        raise ConfigurationError(f"config {path} is invalid: {exc}") from exc


def build_text_provider(spec: ProviderSpec):
    if spec.kind == "offline":
        return OfflineTextProvider()
    if spec.kind == "http":
        if not spec.endpoint:
            raise ConfigurationError("http text provider needs an endpoint")
        return HttpTextProvider(spec.endpoint, spec.model, spec.api_key_env)
    raise ConfigurationError(f"unknown text provider kind {spec.kind!r}")


def build_embedding_provider(spec: ProviderSpec, dimension: int):
    if spec.kind == "hash":
        return HashEmbedder(dimension)
    if spec.kind == "http":
        if not spec.endpoint:
            raise ConfigurationError("http embedding provider needs an endpoint")
        return HttpEmbeddingProvider(spec.endpoint, spec.model, dimension, spec.api_key_env)
    raise ConfigurationError(f"unknown embedding provider kind {spec.kind!r}")


def build_compound_provider(spec: ProviderSpec):
    if spec.kind == "none":
        return None
    if spec.kind == "fixture":
        if not spec.path:
            raise ConfigurationError("fixture compound provider needs a table path")
        return FixtureCompoundProvider.from_file(spec.path)
    if spec.kind == "http":
        if not spec.endpoint:
            raise ConfigurationError("http compound provider needs an endpoint")
        return HttpCompoundProvider(spec.endpoint, spec.api_key_env)
    raise ConfigurationError(f"unknown compound provider kind {spec.kind!r}")


def open_store(config: ServiceConfig) -> KnowledgeStore:
    """Load the configured store file, or start empty when absent.

    The configured dimension must match a loaded store exactly.
    """
    path = Path(config.store_path)
    if path.exists():
        store = KnowledgeStore.load(path)
        if store.dimension != config.dimension:
            raise ConfigurationError(
                f"store {path} has dimension {store.dimension}, config says {config.dimension}"
            )
        return store
    return KnowledgeStore(
        dimension=config.dimension,
        max_questions_per_chunk=config.max_questions,
    )


def build_deps(config: ServiceConfig, store: KnowledgeStore) -> PipelineDeps:
    return PipelineDeps(
        store=store,
        text_provider=build_text_provider(config.text_provider),
        embedding_provider=build_embedding_provider(config.embedding_provider, config.dimension),
        compound_provider=build_compound_provider(config.compound_provider),
        prompt_budget=config.prompt_budget,
        compound_limit=config.compound_limit,
        research_parallelism=config.research_parallelism,
        max_subquestions=config.max_subquestions,
    )
