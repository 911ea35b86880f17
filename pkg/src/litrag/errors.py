"""Exception hierarchy shared across the package.

Degradable stages (relevance check, compound lookup, question generation)
catch ``ProviderError`` and continue with a warning; everything else
propagates to the service layer, which maps it onto an API error code.
"""

from __future__ import annotations

from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from .models import Citation, Hit, MoleculeRecord


class LitragError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(LitragError):
    """Input data violates a documented contract (bad manifest, bad merge
    plan, malformed test set record, ...)."""


class CitationError(LitragError):
    """Citation cannot be formatted (no authors and no title)."""


class ConfigurationError(LitragError):
    """Configuration is inconsistent (unknown provider kind, dimension
    mismatch between config and store, ...)."""


class ProviderError(LitragError):
    """A provider call failed.

    ``retryable`` marks transport-level failures that a client may retry;
    contract violations (e.g. wrong embedding dimension) are not retryable.
    """

    def __init__(self, message: str, *, retryable: bool = False):
        super().__init__(message)
        self.retryable = retryable


class ProviderUnavailableError(ProviderError):
    """Transport failure talking to a provider endpoint."""

    def __init__(self, message: str):
        super().__init__(message, retryable=True)


class EmbeddingDimensionError(ConfigurationError):
    """Provider returned vectors of a different length than configured."""


class StoreError(LitragError):
    """Base class for knowledge-store failures."""


class DimensionMismatchError(StoreError):
    """A vector does not match the store dimension."""


class StoreLoadError(StoreError):
    """Base class for errors loading a persisted store file."""


class CorruptStoreError(StoreLoadError):
    """File is truncated, has a bad magic value, or inconsistent sections."""


class StoreChecksumError(StoreLoadError):
    """Stored checksum does not match the file contents."""


class StoreVersionError(StoreLoadError):
    """File was written with an unsupported format version."""


class AnswerGenerationError(LitragError):
    """The answer provider failed after retrieval already succeeded.

    Carries the partial result so clients can still display citations and
    molecule records.
    """

    def __init__(
        self,
        message: str,
        *,
        citations: "list[Citation] | None" = None,
        molecules: "list[MoleculeRecord] | None" = None,
        trace: "list[Hit] | None" = None,
        warnings: list[str] | None = None,
    ):
        super().__init__(message)
        self.citations = citations or []
        self.molecules = molecules or []
        self.trace = trace or []
        self.warnings = warnings or []


class ResearchError(LitragError):
    """Research run could not produce any sub-answer."""
