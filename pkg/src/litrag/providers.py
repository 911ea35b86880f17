"""Provider contracts and HTTP-backed implementations.

Three pluggable dependencies drive the pipeline:

* ``TextProvider``   — prompt in, completion out.
* ``EmbeddingProvider`` — list of texts in, equal-length numeric vectors out.
* ``CompoundProvider``  — free-text query in, molecule records out.

HTTP providers speak the widespread chat-completions / embeddings JSON
convention and read their credential from an environment variable named in
the config, never from config values.
"""

from __future__ import annotations

import os
from typing import Protocol, Sequence, runtime_checkable

import httpx

from .errors import ProviderError, ProviderUnavailableError
from .models import MoleculeRecord

# First line of every pipeline prompt names its task, which lets offline
# stub providers dispatch deterministically and keeps prompts auditable.
TASK_CLEAN = "clean-section"
TASK_MERGE = "propose-merges"
TASK_QUESTIONS = "hypothetical-questions"
TASK_RELEVANCE = "relevance-check"
TASK_SCREEN = "screen-abstract"
TASK_ANSWER = "answer"
TASK_SUBQUESTIONS = "sub-questions"
TASK_OVERVIEW = "research-overview"
TASK_SYNTHESIS = "research-synthesis"


def task_header(task: str) -> str:
    return f"Task: {task}"


def task_of(prompt: str) -> str:
    """Extract the task marker from a pipeline prompt ("" when absent)."""
    first = prompt.split("\n", 1)[0].strip()
    if first.startswith("Task:"):
        return first[len("Task:"):].strip()
    return ""


@runtime_checkable
class TextProvider(Protocol):
    def complete(self, prompt: str, system: str | None = None) -> str:
        """Return a completion for ``prompt``. Raises ProviderError on failure."""
        ...


@runtime_checkable
class EmbeddingProvider(Protocol):
    dimension: int

    def embed(self, texts: Sequence[str]) -> list[list[float]]:
        """Return one vector per input text, order-preserving."""
        ...


@runtime_checkable
class CompoundProvider(Protocol):
    def lookup(self, query: str) -> list[MoleculeRecord]:
        """Return molecule records pertinent to the query (possibly empty)."""
        ...


def _bearer_headers(api_key_env: str) -> dict[str, str]:
    headers = {"Content-Type": "application/json"}
    key = os.environ.get(api_key_env, "") if api_key_env else ""
    if key:
        headers["Authorization"] = f"Bearer {key}"
    return headers


class HttpTextProvider:
    """Chat-completions client (``POST {endpoint}/chat/completions``)."""

    def __init__(
        self,
        endpoint: str,
        model: str,
        api_key_env: str = "",
        timeout: float = 60.0,
        transport: httpx.BaseTransport | None = None,
    ):
        self.endpoint = endpoint.rstrip("/")
        self.model = model
        self.api_key_env = api_key_env
        self._client = httpx.Client(timeout=timeout, transport=transport)

    def available(self) -> bool:
        return bool(self.endpoint)

    def complete(self, prompt: str, system: str | None = None) -> str:
        messages = []
        if system:
            messages.append({"role": "system", "content": system})
        messages.append({"role": "user", "content": prompt})
        payload = {"model": self.model, "messages": messages}
        try:
            resp = self._client.post(
                f"{self.endpoint}/chat/completions",
                json=payload,
                headers=_bearer_headers(self.api_key_env),
            )
            resp.raise_for_status()
            body = resp.json()
            return body["choices"][0]["message"]["content"]
        except httpx.HTTPError as exc:
            raise ProviderUnavailableError(f"text provider request failed: {exc}") from exc
        except (KeyError, IndexError, TypeError, ValueError) as exc:
            raise ProviderError(f"text provider returned a malformed response: {exc}") from exc


class HttpEmbeddingProvider:
    """Embeddings client (``POST {endpoint}/embeddings``)."""

    def __init__(
        self,
        endpoint: str,
        model: str,
        dimension: int,
        api_key_env: str = "",
        timeout: float = 60.0,
        transport: httpx.BaseTransport | None = None,
    ):
        self.endpoint = endpoint.rstrip("/")
        self.model = model
        self.dimension = dimension
        self.api_key_env = api_key_env
        self._client = httpx.Client(timeout=timeout, transport=transport)

    def available(self) -> bool:
        return bool(self.endpoint)

    def embed(self, texts: Sequence[str]) -> list[list[float]]:
        payload = {"model": self.model, "input": list(texts)}
        try:
            resp = self._client.post(
                f"{self.endpoint}/embeddings",
                json=payload,
                headers=_bearer_headers(self.api_key_env),
            )
            resp.raise_for_status()
            body = resp.json()
            rows = sorted(body["data"], key=lambda item: item.get("index", 0))
            return [list(map(float, row["embedding"])) for row in rows]
        except httpx.HTTPError as exc:
            raise ProviderUnavailableError(f"embedding provider request failed: {exc}") from exc
        except (KeyError, IndexError, TypeError, ValueError) as exc:
            raise ProviderError(f"embedding provider returned a malformed response: {exc}") from exc


class HttpCompoundProvider:
    """Compound lookup client (``GET {endpoint}?query=...``)."""

    def __init__(
        self,
        endpoint: str,
        api_key_env: str = "",
        timeout: float = 30.0,
        transport: httpx.BaseTransport | None = None,
    ):
        self.endpoint = endpoint
        self.api_key_env = api_key_env
        self._client = httpx.Client(timeout=timeout, transport=transport)

    def available(self) -> bool:
        return bool(self.endpoint)

    def lookup(self, query: str) -> list[MoleculeRecord]:
        try:
            resp = self._client.get(
                self.endpoint,
                params={"query": query},
                headers=_bearer_headers(self.api_key_env),
            )
            resp.raise_for_status()
            rows = resp.json()
            return [
                MoleculeRecord(
                    name=row["name"],
                    smiles=row["smiles"],
                    detail_url=row.get("url") or row.get("detail_url"),
                )
                for row in rows
            ]
        except httpx.HTTPError as exc:
            raise ProviderUnavailableError(f"compound provider request failed: {exc}") from exc
        except (KeyError, TypeError, ValueError) as exc:
            raise ProviderError(f"compound provider returned a malformed response: {exc}") from exc
