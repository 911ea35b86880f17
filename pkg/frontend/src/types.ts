// Wire types for the /api endpoints, plus runtime guards for the pieces
// the renderer depends on. The server is the source of truth; guards stay
// structural so additive server changes do not break the client.

export interface MoleculeRecord {
  name: string;
  smiles: string;
  detail_url?: string | null;
}

export interface Citation {
  ref_index: number;
  doc_id: string;
  formatted: string;
  url?: string | null;
}

export interface Hit {
  chunk_id: string;
  doc_id: string;
  score: number;
  matched_kind: "chunk" | "question";
  matched_id: string;
}

export type QAEvent =
  | { type: "molecules"; molecules: MoleculeRecord[] }
  | { type: "citations"; citations: Citation[] }
  | { type: "answer"; text: string };

export interface QAResponse {
  events: QAEvent[];
  answer_text: string;
  citations: Citation[];
  molecules: MoleculeRecord[];
  trace: Hit[];
  warnings: string[];
  session_id?: string | null;
}

export interface SubAnswer {
  question: string;
  response: QAResponse;
}

export interface ResearchReport {
  topic: string;
  overview: string;
  overview_citations: Citation[];
  sub_answers: SubAnswer[];
  synthesis: string;
  bibliography: Citation[];
  warnings: string[];
}

export interface ApiErrorBody {
  error: { code: string; message: string; request_id: string };
  partial?: {
    citations?: Citation[];
    molecules?: MoleculeRecord[];
  } | null;
}

function isObject(value: unknown): value is Record<string, unknown> {
  return typeof value === "object" && value !== null && !Array.isArray(value);
}

function isCitation(value: unknown): value is Citation {
  return (
    isObject(value) &&
    typeof value.ref_index === "number" &&
    typeof value.doc_id === "string" &&
    typeof value.formatted === "string"
  );
}

function isMolecule(value: unknown): value is MoleculeRecord {
  return isObject(value) && typeof value.name === "string" && typeof value.smiles === "string";
}

function isEvent(value: unknown): value is QAEvent {
  if (!isObject(value)) return false;
  if (value.type === "molecules") return Array.isArray(value.molecules) && value.molecules.every(isMolecule);
  if (value.type === "citations") return Array.isArray(value.citations) && value.citations.every(isCitation);
  if (value.type === "answer") return typeof value.text === "string";
  return false;
}

export function isQAResponse(value: unknown): value is QAResponse {
  return (
    isObject(value) &&
    Array.isArray(value.events) &&
    value.events.every(isEvent) &&
    typeof value.answer_text === "string" &&
    Array.isArray(value.citations) &&
    value.citations.every(isCitation) &&
    Array.isArray(value.molecules) &&
    value.molecules.every(isMolecule)
  );
}

export function isResearchReport(value: unknown): value is ResearchReport {
  return (
    isObject(value) &&
    typeof value.topic === "string" &&
    typeof value.overview === "string" &&
    typeof value.synthesis === "string" &&
    Array.isArray(value.bibliography) &&
    value.bibliography.every(isCitation) &&
    Array.isArray(value.sub_answers) &&
    value.sub_answers.every(
      (sub) => isObject(sub) && typeof sub.question === "string" && isQAResponse(sub.response),
    )
  );
}
