// Thin client over the service endpoints. The transcript is client-local
// (the API is stateless), so this module only ships requests and parses
// envelopes.

import { ApiErrorBody, QAResponse, ResearchReport } from "./types.js";

export type Mode = "expert" | "research";

export class ApiFailure extends Error {
  code: string;
  requestId: string;
  partial: ApiErrorBody["partial"];

  constructor(code: string, message: string, requestId: string, partial?: ApiErrorBody["partial"]) {
    super(message);
    this.code = code;
    this.requestId = requestId;
    this.partial = partial ?? null;
  }
}

export function routeForMode(mode: Mode): string {
  return mode === "expert" ? "/api/qa" : "/api/research";
}

export function labelForMode(mode: Mode): string {
  return mode === "expert" ? "Expert Q&A" : "Research";
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

async function post<T>(baseUrl: string, path: string, body: unknown, fetchImpl: FetchLike): Promise<T> {
  const response = await fetchImpl(`${baseUrl.replace(/\/$/, "")}${path}`, {
    method: "POST",
    headers: { "Content-Type": "application/json" },
    body: JSON.stringify(body),
  });
  const payload = (await response.json()) as unknown;
  if (!response.ok) {
    const envelope = payload as ApiErrorBody;
    const error = envelope?.error ?? { code: "internal", message: "unknown error", request_id: "" };
    throw new ApiFailure(error.code, error.message, error.request_id, envelope?.partial);
  }
  return payload as T;
}

export function sendExpert(
  baseUrl: string,
  query: string,
  fetchImpl: FetchLike = fetch,
  sessionId?: string,
): Promise<QAResponse> {
  return post<QAResponse>(baseUrl, routeForMode("expert"), { query, session_id: sessionId ?? null }, fetchImpl);
}

export function sendResearch(
  baseUrl: string,
  topic: string,
  fetchImpl: FetchLike = fetch,
  maxSubquestions?: number,
): Promise<ResearchReport> {
  const body: Record<string, unknown> = { topic };
  if (maxSubquestions !== undefined) body.max_subquestions = maxSubquestions;
  return post<ResearchReport>(baseUrl, routeForMode("research"), body, fetchImpl);
}
