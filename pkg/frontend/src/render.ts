// Pure renderer: server envelopes in, structured transcript entries out.
// The DOM layer materializes entries; keeping this step data-only makes
// the staged-order and ref-resolution invariants testable headlessly.
//
// Staging contract mirrored from the server: a molecule table (when any)
// precedes the citation list, which precedes the answer. SMILES strings
// render as selectable text, never drawn structures; molecule names link
// out to their detail pages.

import {
  Citation,
  QAResponse,
  ResearchReport,
  isQAResponse,
  isResearchReport,
} from "./types.js";

export interface MoleculeRow {
  name: string;
  smiles: string;
  detailUrl: string | null;
}

export interface CitationItem {
  refIndex: number;
  formatted: string;
  url: string | null;
  anchorId: string;
}

export type AnswerSegment =
  | { kind: "text"; text: string }
  | { kind: "ref-link"; refIndex: number; targetAnchor: string };

export type TranscriptEntry =
  | { kind: "molecule-table"; rows: MoleculeRow[] }
  | { kind: "citation-list"; items: CitationItem[] }
  | { kind: "answer"; segments: AnswerSegment[] }
  | { kind: "error-banner"; message: string }
  | { kind: "research-overview"; text: string }
  | {
      kind: "research-section";
      index: number;
      question: string;
      collapsible: true;
      entries: TranscriptEntry[];
    }
  | { kind: "research-synthesis"; segments: AnswerSegment[] }
  | { kind: "bibliography"; items: CitationItem[] };

const REF_MARKER = /\[ref (\d+)\]/g;

function citationItems(citations: Citation[], anchorPrefix: string): CitationItem[] {
  return citations.map((citation) => ({
    refIndex: citation.ref_index,
    formatted: citation.formatted,
    url: citation.url ?? null,
    anchorId: `${anchorPrefix}-ref-${citation.ref_index}`,
  }));
}

/** Split text on [ref k] markers; markers that match a rendered citation
 * become links, anything else stays literal text. */
export function linkifyRefs(text: string, items: CitationItem[]): AnswerSegment[] {
  const byIndex = new Map(items.map((item) => [item.refIndex, item]));
  const segments: AnswerSegment[] = [];
  let cursor = 0;
  for (const match of text.matchAll(REF_MARKER)) {
    const start = match.index ?? 0;
    const target = byIndex.get(Number(match[1]));
    if (!target) continue; // unresolvable marker stays inside the text
    if (start > cursor) segments.push({ kind: "text", text: text.slice(cursor, start) });
    segments.push({ kind: "ref-link", refIndex: target.refIndex, targetAnchor: target.anchorId });
    cursor = start + match[0].length;
  }
  if (cursor < text.length) segments.push({ kind: "text", text: text.slice(cursor) });
  if (segments.length === 0) segments.push({ kind: "text", text: "" });
  return segments;
}

function qaEntries(response: QAResponse, anchorPrefix: string): TranscriptEntry[] {
  const entries: TranscriptEntry[] = [];
  let items: CitationItem[] = citationItems(response.citations, anchorPrefix);
  for (const event of response.events) {
    if (event.type === "molecules") {
      if (event.molecules.length > 0) {
        entries.push({
          kind: "molecule-table",
          rows: event.molecules.map((m) => ({
            name: m.name,
            smiles: m.smiles,
            detailUrl: m.detail_url ?? null,
          })),
        });
      }
    } else if (event.type === "citations") {
      items = citationItems(event.citations, anchorPrefix);
      entries.push({ kind: "citation-list", items });
    } else {
      entries.push({ kind: "answer", segments: linkifyRefs(event.text, items) });
    }
  }
  return entries;
}

/** Render an expert Q&A envelope. A malformed envelope yields an error
 * banner entry; the caller keeps the existing transcript untouched. */
export function renderQA(payload: unknown): TranscriptEntry[] {
  if (!isQAResponse(payload)) {
    return [{ kind: "error-banner", message: "Malformed response envelope." }];
  }
  return qaEntries(payload, "qa");
}

/** Render a research report: overview, collapsible per-sub-question
 * sections in order, synthesis (cites bibliography numbers), then the
 * consolidated bibliography. */
export function renderResearch(payload: unknown): TranscriptEntry[] {
  if (!isResearchReport(payload)) {
    return [{ kind: "error-banner", message: "Malformed research report." }];
  }
  const report: ResearchReport = payload;
  const entries: TranscriptEntry[] = [];
  if (report.overview) {
    entries.push({ kind: "research-overview", text: report.overview });
  }
  report.sub_answers.forEach((sub, position) => {
    entries.push({
      kind: "research-section",
      index: position + 1,
      question: sub.question,
      collapsible: true,
      entries: qaEntries(sub.response, `sub${position + 1}`),
    });
  });
  const bibliography = citationItems(report.bibliography, "bib");
  entries.push({ kind: "research-synthesis", segments: linkifyRefs(report.synthesis, bibliography) });
  entries.push({ kind: "bibliography", items: bibliography });
  return entries;
}

/** True when citations precede the answer (and molecules precede both)
 * in a flat entry list. Research sections are checked recursively. */
export function stagedOrderHolds(entries: TranscriptEntry[]): boolean {
  const positions = (kind: TranscriptEntry["kind"]) =>
    entries.map((e, i) => (e.kind === kind ? i : -1)).filter((i) => i >= 0);
  const molecules = positions("molecule-table");
  const citations = positions("citation-list");
  const answers = positions("answer");
  if (answers.length > 0 && citations.length === 0) return false;
  if (citations.length > 0 && answers.length > 0 && citations[0] > answers[0]) return false;
  if (molecules.length > 0 && citations.length > 0 && molecules[0] > citations[0]) return false;
  for (const entry of entries) {
    if (entry.kind === "research-section" && !stagedOrderHolds(entry.entries)) return false;
  }
  return true;
}

/** Collect every ref-link whose anchor has no rendered citation entry. */
export function unresolvedRefLinks(entries: TranscriptEntry[]): string[] {
  const anchors = new Set<string>();
  const links: string[] = [];
  const walk = (list: TranscriptEntry[]) => {
    for (const entry of list) {
      if (entry.kind === "citation-list" || entry.kind === "bibliography") {
        for (const item of entry.items) anchors.add(item.anchorId);
      } else if (entry.kind === "answer" || entry.kind === "research-synthesis") {
        for (const segment of entry.segments) {
          if (segment.kind === "ref-link") links.push(segment.targetAnchor);
        }
      } else if (entry.kind === "research-section") {
        walk(entry.entries);
      }
    }
  };
  walk(entries);
  return links.filter((anchor) => !anchors.has(anchor));
}
