"""Corpus ingestion: Markdown documents in, cleaned and indexed chunks out.

Segmentation is heading-driven: lines starting with one to three ``#``
characters plus a space open a new section; deeper markers are ordinary
body text. Text before the first heading becomes a level-0 preamble
section so abstracts and intro fragments stay retrievable.
"""

from __future__ import annotations

import json
import logging
import re
from pathlib import Path
from typing import NamedTuple, Sequence

from .enrichment import embed_document, generate_questions
from .errors import CitationError, ProviderError, ValidationError
from .models import (
    Chunk,
    DocumentMetadata,
    IngestReport,
    MergePlan,
    RawDocument,
)
from .providers import (
    TASK_CLEAN,
    TASK_MERGE,
    TASK_SCREEN,
    EmbeddingProvider,
    TextProvider,
    task_header,
)
from .store import ChunkIndexEntry, DocEntry, KnowledgeStore

logger = logging.getLogger(__name__)

HEADING_RE = re.compile(r"^(#{1,3}) (.*)$")

DEFAULT_MIN_CHUNK_CHARS = 200


class Section(NamedTuple):
    heading_path: list[str]
    level: int
    text: str


def _join_body(lines: list[str]) -> str:
    """Join body lines, trimming leading/trailing blank lines only.

    Interior whitespace and per-line indentation are preserved: stripping
    a leading space could promote an indented '#' line into a heading
    marker on reparse.
    """
    start, end = 0, len(lines)
    while start < end and not lines[start].strip():
        start += 1
    while end > start and not lines[end - 1].strip():
        end -= 1
    return "\n".join(lines[start:end])


def parse_markdown(body_markdown: str) -> list[Section]:
    """Split Markdown into heading-scoped sections, in document order.

    Total over arbitrary input: any text yields a valid (possibly empty)
    section list. A heading deeper than its ancestors attaches to the
    nearest existing level, so ``level`` always equals the path length.
    """
    sections: list[Section] = []
    stack: list[str] = []
    body_lines: list[str] = []
    seen_heading = False

    def flush() -> None:
        text = _join_body(body_lines)
        if not seen_heading:
            if text:
                sections.append(Section([], 0, text))
        else:
            sections.append(Section(list(stack), len(stack), text))
        body_lines.clear()

    for line in body_markdown.splitlines():
        match = HEADING_RE.match(line)
        if match is None:
            body_lines.append(line)
            continue
        flush()
        level = len(match.group(1))
        title = match.group(2).strip()
        del stack[level - 1 :]
        stack.append(title)
        seen_heading = True
    flush()
    return sections


def reassemble_markdown(sections: Sequence[Section]) -> str:
    """Inverse of :func:`parse_markdown` up to whitespace normalization."""
    parts = []
    for section in sections:
        if section.level > 0:
            parts.append("#" * section.level + " " + section.heading_path[-1])
        if section.text:
            parts.append(section.text)
    return "\n".join(parts)


def segment_document(doc: RawDocument) -> list[Chunk]:
    """One chunk per non-empty section; ids carry a zero-padded ordinal."""
    chunks = []
    ordinal = 0
    for section in parse_markdown(doc.body_markdown):
        if not section.text:
            continue
        ordinal += 1
        chunk_id = f"{doc.metadata.doc_id}#{ordinal:04d}"
        chunks.append(Chunk.build(chunk_id, doc.metadata.doc_id, section.heading_path, section.text))
    return chunks


def _clean_prompt(chunk: Chunk) -> str:
    return (
        f"{task_header(TASK_CLEAN)}\n"
        "Remove formatting artifacts and non-content lines from the section "
        "below. Keep every factual statement. Return only the cleaned text.\n"
        "--- SECTION ---\n"
        f"{chunk.text}\n"
        "--- END SECTION ---"
    )


def clean_chunk(chunk: Chunk, text_llm: TextProvider, warnings: list[str] | None = None) -> Chunk:
    """Replace a chunk's text with the provider's cleaned version.

    Empty or heading-introducing output keeps the original text and records
    a warning: the cleaner must never silently delete knowledge.
    """
    cleaned = text_llm.complete(_clean_prompt(chunk)).strip()
    if not cleaned:
        _warn(warnings, f"cleaner returned empty text for {chunk.chunk_id}; original kept")
        return chunk.with_text(chunk.text)
    if any(HEADING_RE.match(line) for line in cleaned.splitlines()):
        _warn(warnings, f"cleaner introduced heading lines in {chunk.chunk_id}; original kept")
        return chunk.with_text(chunk.text)
    return chunk.with_text(cleaned)


def _merge_prompt(candidates: Sequence[Chunk]) -> str:
    lines = [
        task_header(TASK_MERGE),
        "The short sections below come from one document, listed in document "
        "order. Propose groups worth merging into a single section: one group "
        "per line, section ids separated by commas, keeping document order. "
        "Return nothing if no merge helps.",
    ]
    for chunk in candidates:
        heading = " > ".join(chunk.heading_path) or "(preamble)"
        preview = chunk.text[:80].replace("\n", " ")
        lines.append(f"{chunk.chunk_id} | {chunk.char_count} chars | {heading} | {preview}")
    return "\n".join(lines)


def propose_merges(
    chunks: Sequence[Chunk],
    text_llm: TextProvider,
    min_chunk_chars: int = DEFAULT_MIN_CHUNK_CHARS,
    warnings: list[str] | None = None,
) -> MergePlan:
    """Ask the provider to group short chunks for merging.

    Only chunks under ``min_chunk_chars`` are offered. Suggestions that
    violate the plan invariants are dropped, never repaired; provider
    failure degrades to an empty plan.
    """
    candidates = [c for c in chunks if c.char_count < min_chunk_chars]
    if len(candidates) < 2:
        return MergePlan()
    try:
        completion = text_llm.complete(_merge_prompt(candidates))
    except ProviderError as exc:
        _warn(warnings, f"merge proposal failed ({exc}); ingesting unmerged")
        return MergePlan()

    candidate_ids = {c.chunk_id for c in candidates}
    position = {c.chunk_id: i for i, c in enumerate(chunks)}
    used: set[str] = set()
    groups: list[list[str]] = []
    for line in completion.splitlines():
        ids = [part.strip() for part in line.split(",") if part.strip()]
        if len(ids) < 2:
            continue
        if len(set(ids)) != len(ids):
            continue
        if not all(cid in candidate_ids for cid in ids):
            continue
        if any(cid in used for cid in ids):
            continue
        positions = [position[cid] for cid in ids]
        if not _is_contiguous_run(positions):
            continue
        used.update(ids)
        groups.append(ids)
    return MergePlan(groups=groups)


def _is_contiguous_run(positions: list[int]) -> bool:
    return positions == list(range(positions[0], positions[0] + len(positions)))


def validate_merge_plan(plan: MergePlan, chunks: Sequence[Chunk]) -> None:
    """Raise ValidationError unless the plan is applicable to ``chunks``.

    A group must be a contiguous run in document order: that is what makes
    merging conserve the corpus text (the concatenation of all chunk texts
    is unchanged up to whitespace).
    """
    by_id = {c.chunk_id: c for c in chunks}
    position = {c.chunk_id: i for i, c in enumerate(chunks)}
    seen: set[str] = set()
    for group in plan.groups:
        if len(group) < 2:
            raise ValidationError(f"merge group {group} has fewer than 2 members")
        unknown = [cid for cid in group if cid not in by_id]
        if unknown:
            raise ValidationError(f"merge plan references unknown chunk ids {unknown}")
        doc_ids = {by_id[cid].doc_id for cid in group}
        if len(doc_ids) > 1:
            raise ValidationError(f"merge group {group} spans documents {sorted(doc_ids)}")
        for cid in group:
            if cid in seen:
                raise ValidationError(f"chunk {cid} appears in more than one merge group")
            seen.add(cid)
        positions = [position[cid] for cid in group]
        if not _is_contiguous_run(positions):
            raise ValidationError(f"merge group {group} is not a contiguous document-order run")


def apply_merges(chunks: Sequence[Chunk], plan: MergePlan) -> list[Chunk]:
    """Replace each group by one chunk; texts join with a blank line.

    The merged chunk keeps the first member's id and heading path and sits
    at that member's position. Validation happens up front, so a bad plan
    never partially applies.
    """
    validate_merge_plan(plan, chunks)
    if plan.is_empty():
        return list(chunks)

    by_id = {c.chunk_id: c for c in chunks}
    merged_first: dict[str, list[str]] = {group[0]: group for group in plan.groups}
    absorbed = {cid for group in plan.groups for cid in group[1:]}

    result = []
    for chunk in chunks:
        if chunk.chunk_id in absorbed:
            continue
        group = merged_first.get(chunk.chunk_id)
        if group is None:
            result.append(chunk)
            continue
        text = "\n\n".join(by_id[cid].text for cid in group)
        result.append(Chunk.build(chunk.chunk_id, chunk.doc_id, chunk.heading_path, text))
    return result


def format_citation(metadata: DocumentMetadata) -> str:
    """Standardized reference string: authors (et al. past three), journal,
    year, volume(issue): pages. Missing parts collapse with their separators."""
    authors = [a.strip() for a in metadata.authors if a.strip()]
    if authors:
        head = ", ".join(authors[:3])
        if len(authors) > 3:
            head += ", et al."
    elif metadata.title.strip():
        head = metadata.title.strip()
    else:
        raise CitationError(f"document {metadata.doc_id} has neither authors nor title")
    if not head.endswith("."):
        head += "."

    parts = []
    if metadata.journal.strip():
        parts.append(metadata.journal.strip())
    if metadata.year is not None:
        parts.append(str(metadata.year))
    volume = metadata.volume.strip()
    issue = metadata.issue.strip()
    pages = metadata.pages.strip()
    vol_part = volume + (f"({issue})" if volume and issue else "")
    if vol_part:
        parts.append(vol_part)
    tail = ", ".join(parts)
    if pages:
        tail = f"{tail}: {pages}" if vol_part else (f"{tail}, {pages}" if tail else pages)
    return f"{head} {tail}." if tail else head


class ManifestEntry(NamedTuple):
    markdown_path: Path
    sidecar_path: Path


def load_manifest(path: str | Path) -> list[ManifestEntry]:
    """Read a corpus manifest: JSON listing (markdown_path, sidecar_path)
    pairs, resolved relative to the manifest's directory."""
    manifest_path = Path(path)
    try:
        data = json.loads(manifest_path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ValidationError(f"cannot read manifest {manifest_path}: {exc}") from exc
    documents = data.get("documents")
    if not isinstance(documents, list):
        raise ValidationError(f"manifest {manifest_path} lacks a 'documents' list")
    base = manifest_path.parent
    entries = []
    for row in documents:
        try:
            entries.append(
                ManifestEntry(base / row["markdown_path"], base / row["sidecar_path"])
            )
        except (TypeError, KeyError) as exc:
            raise ValidationError(f"manifest row {row!r} is malformed: {exc}") from exc
    return entries


def load_document(markdown_path: str | Path, sidecar_path: str | Path) -> RawDocument:
    """Build a RawDocument from a Markdown file and its JSON sidecar.

    The sidecar carries the metadata fields plus the abstract.
    """
    try:
        sidecar = json.loads(Path(sidecar_path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ValidationError(f"cannot read sidecar {sidecar_path}: {exc}") from exc
    try:
        body = Path(markdown_path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ValidationError(f"cannot read markdown {markdown_path}: {exc}") from exc
    if not isinstance(sidecar, dict):
        raise ValidationError(f"sidecar {sidecar_path} must be a JSON object")
    abstract = sidecar.get("abstract", "")
    try:
        metadata = DocumentMetadata(**{k: v for k, v in sidecar.items() if k != "abstract"})
        return RawDocument(metadata=metadata, abstract=abstract, body_markdown=body)
    except ValueError as exc:
        raise ValidationError(f"sidecar {sidecar_path} is invalid: {exc}") from exc


def _screen_prompt(doc: RawDocument, topic: str) -> str:
    return (
        f"{task_header(TASK_SCREEN)}\n"
        f"Decide whether the abstract below belongs in a knowledge base about "
        f"{topic or 'the configured corpus topic'}. Answer yes or no.\n"
        f"Title: {doc.metadata.title}\n"
        f"Abstract: {doc.abstract}"
    )


def screen_document(
    doc: RawDocument,
    text_llm: TextProvider,
    topic: str = "",
    warnings: list[str] | None = None,
) -> bool:
    """Optional ingest-time relevance screen over the abstract.

    Unparseable or failed screening keeps the document: dropping knowledge
    needs a definite "no".
    """
    try:
        verdict = text_llm.complete(_screen_prompt(doc, topic)).strip().lower()
    except ProviderError as exc:
        _warn(warnings, f"relevance screen failed for {doc.metadata.doc_id} ({exc}); document kept")
        return True
    if verdict.startswith("no"):
        return False
    return True


def ingest_document(
    doc: RawDocument,
    store: KnowledgeStore,
    text_llm: TextProvider,
    embedder: EmbeddingProvider,
    *,
    min_chunk_chars: int = DEFAULT_MIN_CHUNK_CHARS,
    max_questions: int = 4,
    clean: bool = True,
    warnings: list[str] | None = None,
) -> tuple[int, int]:
    """Run one document through segment, clean, merge, enrich, and upsert.

    Returns (chunk_count, question_count) as stored.
    """
    chunks = segment_document(doc)
    if clean:
        cleaned = []
        for chunk in chunks:
            try:
                cleaned.append(clean_chunk(chunk, text_llm, warnings))
            except ProviderError as exc:
                _warn(warnings, f"cleaning failed for {chunk.chunk_id} ({exc}); original kept")
                cleaned.append(chunk)
        chunks = cleaned
    plan = propose_merges(chunks, text_llm, min_chunk_chars, warnings)
    chunks = apply_merges(chunks, plan)

    questions = []
    for chunk in chunks:
        questions.extend(generate_questions(chunk, text_llm, max_questions, warnings))

    records = embed_document(doc, chunks, questions, embedder, store.dimension)
    vector_by_target = {(rec.kind, rec.target_id): rec.vector for rec in records}

    questions_by_chunk: dict[str, list] = {c.chunk_id: [] for c in chunks}
    for question in questions:
        questions_by_chunk[question.chunk_id].append(question)

    entries = []
    for chunk in chunks:
        qvecs = [
            (q.question_id, vector_by_target[("question", q.question_id)])
            for q in questions_by_chunk[chunk.chunk_id]
        ]
        entries.append(
            ChunkIndexEntry(
                chunk_id=chunk.chunk_id,
                doc_id=chunk.doc_id,
                chunk_vector=vector_by_target[("chunk", chunk.chunk_id)],
                question_vectors=qvecs,
                text=chunk.text,
                heading_path=list(chunk.heading_path),
            )
        )
    doc_entry = DocEntry(
        doc_id=doc.metadata.doc_id,
        abstract_vector=vector_by_target[("abstract", doc.metadata.doc_id)],
        doc_type=doc.metadata.doc_type,
        metadata=doc.metadata,
    )
    store.upsert(doc_entry, entries)
    return len(chunks), len(questions)


def ingest_entries(
    entries: Sequence[ManifestEntry],
    store: KnowledgeStore,
    text_llm: TextProvider,
    embedder: EmbeddingProvider,
    *,
    min_chunk_chars: int = DEFAULT_MIN_CHUNK_CHARS,
    max_questions: int = 4,
    clean: bool = True,
    relevance_screen: bool = False,
    screen_topic: str = "",
) -> IngestReport:
    """Ingest a list of (markdown, sidecar) pairs into the store."""
    report = IngestReport()
    for entry in entries:
        doc = load_document(entry.markdown_path, entry.sidecar_path)
        if relevance_screen and not screen_document(doc, text_llm, screen_topic, report.warnings):
            report.skipped_doc_ids.append(doc.metadata.doc_id)
            logger.info("screened out document %s", doc.metadata.doc_id)
            continue
        n_chunks, n_questions = ingest_document(
            doc,
            store,
            text_llm,
            embedder,
            min_chunk_chars=min_chunk_chars,
            max_questions=max_questions,
            clean=clean,
            warnings=report.warnings,
        )
        report.documents += 1
        report.chunks += n_chunks
        report.questions += n_questions
    return report


def ingest_corpus(
    manifest_path: str | Path,
    store: KnowledgeStore,
    text_llm: TextProvider,
    embedder: EmbeddingProvider,
    *,
    min_chunk_chars: int = DEFAULT_MIN_CHUNK_CHARS,
    max_questions: int = 4,
    clean: bool = True,
    relevance_screen: bool = False,
    screen_topic: str = "",
) -> IngestReport:
    """Ingest every manifest document into the store."""
    return ingest_entries(
        load_manifest(manifest_path),
        store,
        text_llm,
        embedder,
        min_chunk_chars=min_chunk_chars,
        max_questions=max_questions,
        clean=clean,
        relevance_screen=relevance_screen,
        screen_topic=screen_topic,
    )


def _warn(warnings: list[str] | None, message: str) -> None:
    logger.warning(message)
    if warnings is not None:
        warnings.append(message)
