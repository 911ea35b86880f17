// Client-local transcript. Responses arrive as whole envelopes; each
// rendered entry becomes one message, staged entries (molecule tables,
// citation lists) as system-stage messages ahead of the assistant answer.

import { Mode, labelForMode } from "./api.js";
import { TranscriptEntry } from "./render.js";

export type Role = "user" | "system-stage" | "assistant";

export interface ChatMessage {
  role: Role;
  modeLabel: string;
  entry: TranscriptEntry | { kind: "user-text"; text: string };
  timestamp: number;
}

const ASSISTANT_KINDS = new Set(["answer", "research-synthesis", "error-banner"]);

export function userMessage(mode: Mode, text: string, now: () => number = Date.now): ChatMessage {
  return {
    role: "user",
    modeLabel: labelForMode(mode),
    entry: { kind: "user-text", text },
    timestamp: now(),
  };
}

export function responseMessages(
  mode: Mode,
  entries: TranscriptEntry[],
  now: () => number = Date.now,
): ChatMessage[] {
  return entries.map((entry) => ({
    role: ASSISTANT_KINDS.has(entry.kind) ? ("assistant" as Role) : ("system-stage" as Role),
    modeLabel: labelForMode(mode),
    entry,
    timestamp: now(),
  }));
}

/** Transcript invariant: every assistant answer is preceded (earlier in
 * the same turn) by its citation-list stage message. Research syntheses
 * are exempt: their bibliography renders after them by contract. */
export function answersArePrecededByCitations(messages: ChatMessage[]): boolean {
  let citationSeen = false;
  for (const message of messages) {
    const kind = (message.entry as { kind: string }).kind;
    if (kind === "user-text") {
      citationSeen = false;
    } else if (kind === "citation-list") {
      citationSeen = true;
    } else if (kind === "answer") {
      if (!citationSeen) return false;
    }
  }
  return true;
}
