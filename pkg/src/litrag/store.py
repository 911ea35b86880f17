"""Two-layer vector index over a literature corpus.

Layer one (the summary layer) holds one abstract vector per document and
identifies candidate documents. Layer two holds chunk vectors plus their
hypothetical-question vectors and returns scored chunks within those
candidates. All vectors are unit-normalized at insertion, stored as
float32, and scored in float64.

Retrieval is an exhaustive scan over contiguous matrices: exact by
construction, and the baseline any approximate structure would have to
match. Writers commit under a lock; readers hold an immutable snapshot,
so a search never observes a half-upserted document.

On-disk format: fixed header (magic, version, dimension, counts, section
lengths, CRC-32 of both sections), a UTF-8 JSON metadata section, then the
packed little-endian float32 vector section.
"""

from __future__ import annotations

import json
import logging
import struct
import threading
import zlib
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import (
    CorruptStoreError,
    DimensionMismatchError,
    StoreChecksumError,
    StoreError,
    StoreVersionError,
    ValidationError,
)
from .models import (
    DEFAULT_DIMENSION,
    DEFAULT_MAX_QUESTIONS,
    DocType,
    DocumentMetadata,
    Hit,
    SearchParams,
)

logger = logging.getLogger(__name__)

MAGIC = b"LRKB"
FORMAT_VERSION = 1
_HEADER_FMT = "<4sIIIIIQQI"
_HEADER_SIZE = struct.calcsize(_HEADER_FMT)


def cosine(a: Sequence[float] | np.ndarray, b: Sequence[float] | np.ndarray) -> float:
    """Cosine similarity in float64. Equals the dot product for unit vectors."""
    va = np.asarray(a, dtype=np.float64)
    vb = np.asarray(b, dtype=np.float64)
    if va.shape != vb.shape or va.ndim != 1:
        raise DimensionMismatchError(f"cosine over shapes {va.shape} and {vb.shape}")
    na = float(np.linalg.norm(va))
    nb = float(np.linalg.norm(vb))
    if na == 0.0 or nb == 0.0:
        raise ValueError("cosine is undefined for zero vectors")
    return float(va @ vb / (na * nb))


@dataclass
class DocEntry:
    """Summary-layer record: one per document."""

    doc_id: str
    abstract_vector: np.ndarray
    doc_type: DocType
    metadata: DocumentMetadata


@dataclass
class ChunkIndexEntry:
    """Sub-chunk-layer record: a chunk vector plus its question vectors.

    Carries the chunk text and heading path so retrieval hits can be
    resolved to prompt context without a second storage system.
    """

    chunk_id: str
    doc_id: str
    chunk_vector: np.ndarray
    question_vectors: list[tuple[str, np.ndarray]] = field(default_factory=list)
    text: str = ""
    heading_path: list[str] = field(default_factory=list)


@dataclass(frozen=True)
class StoreStats:
    docs: int
    chunks: int
    questions: int


@dataclass(frozen=True)
class _Snapshot:
    doc_ids: list[str]
    doc_types: list[str]
    doc_matrix: np.ndarray  # (docs, dim) float64
    doc_norms: np.ndarray
    chunk_ids: list[str]
    chunk_doc_ids: list[str]
    row_matrix: np.ndarray  # (rows, dim) float64
    row_norms: np.ndarray
    row_kind: list[str]
    row_match_id: list[str]
    chunk_row_start: list[int]
    chunk_row_end: list[int]


class KnowledgeStore:
    """Persistent hierarchical vector index plus chunk/metadata storage."""

    def __init__(
        self,
        dimension: int = DEFAULT_DIMENSION,
        max_questions_per_chunk: int = DEFAULT_MAX_QUESTIONS,
    ):
        if dimension < 1:
            raise ValueError("dimension must be >= 1")
        self.dimension = dimension
        self.max_questions_per_chunk = max_questions_per_chunk
        self._docs: dict[str, tuple[DocEntry, list[ChunkIndexEntry]]] = {}
        self._chunk_lookup: dict[str, ChunkIndexEntry] = {}
        self._lock = threading.Lock()
        self._snapshot: _Snapshot | None = None
        self._dirty = True

    # ------------------------------------------------------------------
    # Mutation
    # ------------------------------------------------------------------

    def upsert(self, doc: DocEntry, chunks: Iterable[ChunkIndexEntry]) -> None:
        """Insert or atomically replace one document and its chunks.

        Everything is validated and normalized before the commit, so a bad
        vector leaves the store untouched.
        """
        chunk_list = list(chunks)
        for entry in chunk_list:
            if entry.doc_id != doc.doc_id:
                raise ValidationError(
                    f"chunk {entry.chunk_id} belongs to {entry.doc_id}, not {doc.doc_id}"
                )
            if len(entry.question_vectors) > self.max_questions_per_chunk:
                raise ValidationError(
                    f"chunk {entry.chunk_id} carries {len(entry.question_vectors)} question "
                    f"vectors; the store caps at {self.max_questions_per_chunk}"
                )

        stored_doc = DocEntry(
            doc_id=doc.doc_id,
            abstract_vector=self._prepare(doc.abstract_vector),
            doc_type=doc.doc_type,
            metadata=doc.metadata,
        )
        stored_chunks = [
            ChunkIndexEntry(
                chunk_id=entry.chunk_id,
                doc_id=entry.doc_id,
                chunk_vector=self._prepare(entry.chunk_vector),
                question_vectors=[(qid, self._prepare(vec)) for qid, vec in entry.question_vectors],
                text=entry.text,
                heading_path=list(entry.heading_path),
            )
            for entry in chunk_list
        ]
        self._commit(stored_doc, stored_chunks)

    def _prepare(self, vector: Sequence[float] | np.ndarray) -> np.ndarray:
        """Validate dimension and return a unit-normalized float32 copy."""
        vec = np.asarray(vector, dtype=np.float64)
        if vec.ndim != 1 or vec.shape[0] != self.dimension:
            raise DimensionMismatchError(
                f"vector of shape {vec.shape} does not match store dimension {self.dimension}"
            )
        norm = float(np.linalg.norm(vec))
        if norm == 0.0:
            raise DimensionMismatchError("zero vectors cannot be indexed")
        return (vec / norm).astype(np.float32)

    def _commit(self, doc: DocEntry, chunks: list[ChunkIndexEntry]) -> None:
        with self._lock:
            previous = self._docs.get(doc.doc_id)
            if previous is not None:
                for old in previous[1]:
                    self._chunk_lookup.pop(old.chunk_id, None)
            self._docs[doc.doc_id] = (doc, chunks)
            for entry in chunks:
                self._chunk_lookup[entry.chunk_id] = entry
            self._dirty = True

    def _adopt(self, records: list[tuple[DocEntry, list[ChunkIndexEntry]]]) -> None:
        """Install already-normalized records (used by :meth:`load`)."""
        with self._lock:
            for doc, chunks in records:
                self._docs[doc.doc_id] = (doc, chunks)
                for entry in chunks:
                    self._chunk_lookup[entry.chunk_id] = entry
            self._dirty = True

    # ------------------------------------------------------------------
    # Lookup
    # ------------------------------------------------------------------

    def stats(self) -> StoreStats:
        with self._lock:
            chunks = sum(len(c) for _, c in self._docs.values())
            questions = sum(
                len(entry.question_vectors) for _, cs in self._docs.values() for entry in cs
            )
            return StoreStats(docs=len(self._docs), chunks=chunks, questions=questions)

    def has_doc(self, doc_id: str) -> bool:
        return doc_id in self._docs

    def document_metadata(self, doc_id: str) -> DocumentMetadata | None:
        record = self._docs.get(doc_id)
        return record[0].metadata if record else None

    def chunk_text(self, chunk_id: str) -> str:
        entry = self._chunk_lookup.get(chunk_id)
        if entry is None:
            raise StoreError(f"unknown chunk id {chunk_id}")
        return entry.text

    def entries(self) -> Iterator[tuple[DocEntry, list[ChunkIndexEntry]]]:
        """Iterate (document, chunks) in insertion order. Treat as read-only."""
        with self._lock:
            records = list(self._docs.values())
        yield from records

    # ------------------------------------------------------------------
    # Search
    # ------------------------------------------------------------------

    def search_summary(
        self,
        qvec: Sequence[float] | np.ndarray,
        limit: int,
        doc_type_filter: DocType | None = None,
    ) -> list[tuple[str, float]]:
        """Stage one: score every document abstract against the query.

        Descending score, ties by ascending doc id, at most ``limit`` rows.
        """
        if limit < 1:
            raise ValidationError("limit must be >= 1")
        snap = self._get_snapshot()
        query, qnorm = self._query_vector(qvec)
        if not snap.doc_ids:
            return []
        scores = snap.doc_matrix @ query / (snap.doc_norms * qnorm)
        ranked = [
            (doc_id, float(score))
            for doc_id, doc_type, score in zip(snap.doc_ids, snap.doc_types, scores)
            if doc_type_filter is None or doc_type == doc_type_filter
        ]
        ranked.sort(key=lambda item: (-item[1], item[0]))
        return ranked[:limit]

    def search_chunks(
        self,
        qvec: Sequence[float] | np.ndarray,
        allowed_docs: Iterable[str],
        limit: int,
        min_score: float,
    ) -> list[Hit]:
        """Stage two: best score per chunk across its own vector and its
        question vectors, strictly above ``min_score``, within the allowed
        documents. Descending score, ties by ascending chunk id."""
        if limit < 1:
            raise ValidationError("limit must be >= 1")
        snap = self._get_snapshot()
        query, qnorm = self._query_vector(qvec)
        if not snap.chunk_ids:
            return []
        allowed = set(allowed_docs)
        scores = snap.row_matrix @ query / (snap.row_norms * qnorm)

        hits = []
        for idx, chunk_id in enumerate(snap.chunk_ids):
            doc_id = snap.chunk_doc_ids[idx]
            if doc_id not in allowed:
                continue
            start, end = snap.chunk_row_start[idx], snap.chunk_row_end[idx]
            window = scores[start:end]
            best = int(np.argmax(window))  # first maximum: chunk row wins exact ties
            best_score = float(window[best])
            if best_score <= min_score:
                continue
            hits.append(
                Hit(
                    chunk_id=chunk_id,
                    doc_id=doc_id,
                    score=best_score,
                    matched_kind=snap.row_kind[start + best],
                    matched_id=snap.row_match_id[start + best],
                )
            )
        hits.sort(key=lambda h: (-h.score, h.chunk_id))
        return hits[:limit]

    def hierarchical_search(
        self,
        qvec: Sequence[float] | np.ndarray,
        params: SearchParams | None = None,
    ) -> list[Hit]:
        """Summary layer first, then chunks within the surviving documents."""
        params = params or SearchParams()
        summary = self.search_summary(qvec, params.summary_limit, params.doc_type_filter)
        allowed = {doc_id for doc_id, _ in summary}
        return self.search_chunks(qvec, allowed, params.chunk_limit, params.min_score)

    def _query_vector(self, qvec: Sequence[float] | np.ndarray) -> tuple[np.ndarray, float]:
        query = np.asarray(qvec, dtype=np.float64)
        if query.ndim != 1 or query.shape[0] != self.dimension:
            raise DimensionMismatchError(
                f"query of shape {query.shape} does not match store dimension {self.dimension}"
            )
        qnorm = float(np.linalg.norm(query))
        if qnorm == 0.0:
            raise DimensionMismatchError("query vector has zero norm")
        return query, qnorm

    def _get_snapshot(self) -> _Snapshot:
        snap = self._snapshot
        if snap is not None and not self._dirty:
            return snap
        with self._lock:
            if self._dirty or self._snapshot is None:
                self._snapshot = self._build_snapshot()
                self._dirty = False
            return self._snapshot

    def _build_snapshot(self) -> _Snapshot:
        doc_ids: list[str] = []
        doc_types: list[str] = []
        doc_rows: list[np.ndarray] = []
        chunk_ids: list[str] = []
        chunk_doc_ids: list[str] = []
        rows: list[np.ndarray] = []
        row_kind: list[str] = []
        row_match_id: list[str] = []
        starts: list[int] = []
        ends: list[int] = []

        for doc, chunks in self._docs.values():
            doc_ids.append(doc.doc_id)
            doc_types.append(doc.doc_type)
            doc_rows.append(doc.abstract_vector)
            for entry in chunks:
                chunk_ids.append(entry.chunk_id)
                chunk_doc_ids.append(entry.doc_id)
                starts.append(len(rows))
                rows.append(entry.chunk_vector)
                row_kind.append("chunk")
                row_match_id.append(entry.chunk_id)
                for qid, vec in entry.question_vectors:
                    rows.append(vec)
                    row_kind.append("question")
                    row_match_id.append(qid)
                ends.append(len(rows))

        dim = self.dimension
        doc_matrix = (
            np.vstack(doc_rows).astype(np.float64) if doc_rows else np.zeros((0, dim))
        )
        row_matrix = np.vstack(rows).astype(np.float64) if rows else np.zeros((0, dim))
        return _Snapshot(
            doc_ids=doc_ids,
            doc_types=doc_types,
            doc_matrix=doc_matrix,
            doc_norms=np.linalg.norm(doc_matrix, axis=1) if doc_rows else np.ones(0),
            chunk_ids=chunk_ids,
            chunk_doc_ids=chunk_doc_ids,
            row_matrix=row_matrix,
            row_norms=np.linalg.norm(row_matrix, axis=1) if rows else np.ones(0),
            row_kind=row_kind,
            row_match_id=row_match_id,
            chunk_row_start=starts,
            chunk_row_end=ends,
        )

    # ------------------------------------------------------------------
    # Persistence
    # ------------------------------------------------------------------

    def persist(self, path: str | Path) -> None:
        """Write the store to disk; the write is staged then renamed."""
        target = Path(path)
        with self._lock:
            records = list(self._docs.values())

        meta_docs = []
        vectors: list[np.ndarray] = []

        def push(vec: np.ndarray) -> int:
            vectors.append(vec)
            return len(vectors) - 1

        n_chunks = 0
        n_questions = 0
        for doc, chunks in records:
            doc_meta = {
                "doc_id": doc.doc_id,
                "doc_type": doc.doc_type,
                "metadata": doc.metadata.model_dump(),
                "abstract_row": push(doc.abstract_vector),
                "chunks": [],
            }
            for entry in chunks:
                n_chunks += 1
                chunk_meta = {
                    "chunk_id": entry.chunk_id,
                    "heading_path": entry.heading_path,
                    "text": entry.text,
                    "row": push(entry.chunk_vector),
                    "questions": [],
                }
                for qid, vec in entry.question_vectors:
                    n_questions += 1
                    chunk_meta["questions"].append({"question_id": qid, "row": push(vec)})
                doc_meta["chunks"].append(chunk_meta)
            meta_docs.append(doc_meta)

        meta_bytes = json.dumps({"docs": meta_docs}, ensure_ascii=False).encode("utf-8")
        if vectors:
            vec_bytes = np.vstack(vectors).astype("<f4").tobytes()
        else:
            vec_bytes = b""
        checksum = zlib.crc32(meta_bytes + vec_bytes) & 0xFFFFFFFF
        header = struct.pack(
            _HEADER_FMT,
            MAGIC,
            FORMAT_VERSION,
            self.dimension,
            len(records),
            n_chunks,
            n_questions,
            len(meta_bytes),
            len(vec_bytes),
            checksum,
        )
        tmp = target.with_suffix(target.suffix + ".tmp")
        tmp.write_bytes(header + meta_bytes + vec_bytes)
        tmp.replace(target)
        logger.info(
            "persisted store to %s (%d docs, %d chunks, %d questions)",
            target,
            len(records),
            n_chunks,
            n_questions,
        )

    @classmethod
    def load(cls, path: str | Path) -> "KnowledgeStore":
        """Load a persisted store. Raises typed errors for version, checksum,
        and structural failures."""
        data = Path(path).read_bytes()
        if len(data) < _HEADER_SIZE:
            raise CorruptStoreError(f"{path}: file too short for a store header")
        magic, version, dimension, n_docs, n_chunks, n_questions, meta_len, vec_len, checksum = (
            struct.unpack(_HEADER_FMT, data[:_HEADER_SIZE])
        )
        if magic != MAGIC:
            raise CorruptStoreError(f"{path}: bad magic {magic!r}")
        if version != FORMAT_VERSION:
            raise StoreVersionError(
                f"{path}: format version {version} unsupported (expected {FORMAT_VERSION})"
            )
        body = data[_HEADER_SIZE:]
        if len(body) != meta_len + vec_len:
            raise CorruptStoreError(
                f"{path}: expected {meta_len + vec_len} section bytes, found {len(body)}"
            )
        meta_bytes = body[:meta_len]
        vec_bytes = body[meta_len:]
        if zlib.crc32(meta_bytes + vec_bytes) & 0xFFFFFFFF != checksum:
            raise StoreChecksumError(f"{path}: checksum mismatch")
        if dimension < 1:
            raise CorruptStoreError(f"{path}: header carries dimension {dimension}")
        total_rows = n_docs + n_chunks + n_questions
        if vec_len != total_rows * dimension * 4:
            raise CorruptStoreError(f"{path}: vector section size does not match counts")
        try:
            meta = json.loads(meta_bytes.decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise CorruptStoreError(f"{path}: metadata section unreadable: {exc}") from exc

        matrix = np.frombuffer(vec_bytes, dtype="<f4").reshape(total_rows, dimension)

        def row(index: object) -> np.ndarray:
            if not isinstance(index, int) or not 0 <= index < total_rows:
                raise CorruptStoreError(f"{path}: vector row index {index!r} out of range")
            return np.array(matrix[index], dtype=np.float32)

        store = cls(dimension=dimension)
        records = []
        try:
            docs = meta["docs"]
            for doc_meta in docs:
                entry = DocEntry(
                    doc_id=doc_meta["doc_id"],
                    abstract_vector=row(doc_meta["abstract_row"]),
                    doc_type=doc_meta["doc_type"],
                    metadata=DocumentMetadata(**doc_meta["metadata"]),
                )
                chunks = [
                    ChunkIndexEntry(
                        chunk_id=chunk_meta["chunk_id"],
                        doc_id=doc_meta["doc_id"],
                        chunk_vector=row(chunk_meta["row"]),
                        question_vectors=[
                            (q["question_id"], row(q["row"])) for q in chunk_meta["questions"]
                        ],
                        text=chunk_meta["text"],
                        heading_path=list(chunk_meta["heading_path"]),
                    )
                    for chunk_meta in doc_meta["chunks"]
                ]
                records.append((entry, chunks))
        except (KeyError, TypeError, ValueError) as exc:
            raise CorruptStoreError(f"{path}: metadata section malformed: {exc}") from exc
        if len(records) != n_docs:
            raise CorruptStoreError(f"{path}: header document count disagrees with metadata")
        store._adopt(records)
        return store
