// Materialize transcript entries into DOM nodes. Browser-only; all logic
// worth testing lives in render.ts.

import { AnswerSegment, CitationItem, TranscriptEntry } from "./render.js";
import { ChatMessage } from "./transcript.js";

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function segmentNodes(segments: AnswerSegment[]): Node[] {
  return segments.map((segment) => {
    if (segment.kind === "text") return document.createTextNode(segment.text);
    const link = el("a", "ref-link", `[ref ${segment.refIndex}]`);
    link.href = `#${segment.targetAnchor}`;
    return link;
  });
}

function citationList(items: CitationItem[]): HTMLElement {
  const list = el("ol", "citations");
  for (const item of items) {
    const li = el("li");
    li.id = item.anchorId;
    if (item.url) {
      const link = el("a", undefined, item.formatted);
      link.href = item.url;
      link.target = "_blank";
      link.rel = "noopener";
      li.appendChild(link);
    } else {
      li.textContent = item.formatted;
    }
    list.appendChild(li);
  }
  if (items.length === 0) list.appendChild(el("li", "empty", "No sources retrieved."));
  return list;
}

export function entryNode(entry: TranscriptEntry): HTMLElement {
  switch (entry.kind) {
    case "molecule-table": {
      const table = el("table", "molecules");
      const head = el("tr");
      head.append(el("th", undefined, "molecule"), el("th", undefined, "SMILES"));
      table.appendChild(head);
      for (const row of entry.rows) {
        const tr = el("tr");
        const nameCell = el("td", "mol-name");
        if (row.detailUrl) {
          const link = el("a", undefined, row.name);
          link.href = row.detailUrl;
          link.target = "_blank";
          link.rel = "noopener";
          nameCell.appendChild(link);
        } else {
          nameCell.textContent = row.name;
        }
        // SMILES stays selectable text; no structure rendering client-side.
        const smilesCell = el("td", "smiles", row.smiles);
        tr.append(nameCell, smilesCell);
        table.appendChild(tr);
      }
      return table;
    }
    case "citation-list":
      return citationList(entry.items);
    case "bibliography": {
      const wrapper = el("div", "bibliography");
      wrapper.appendChild(el("h4", undefined, "Bibliography"));
      wrapper.appendChild(citationList(entry.items));
      return wrapper;
    }
    case "answer": {
      const answer = el("div", "answer");
      answer.append(...segmentNodes(entry.segments));
      return answer;
    }
    case "research-overview":
      return el("div", "overview", entry.text);
    case "research-synthesis": {
      const synthesis = el("div", "synthesis");
      synthesis.appendChild(el("h4", undefined, "Synthesis"));
      const body = el("div");
      body.append(...segmentNodes(entry.segments));
      synthesis.appendChild(body);
      return synthesis;
    }
    case "research-section": {
      const details = el("details", "sub-question");
      details.open = true;
      details.appendChild(el("summary", undefined, `${entry.index}. ${entry.question}`));
      for (const childEntry of entry.entries) details.appendChild(entryNode(childEntry));
      return details;
    }
    case "error-banner":
      return el("div", "error-banner", entry.message);
  }
}

export function messageNode(message: ChatMessage): HTMLElement {
  const wrapper = el("div", `message ${message.role}`);
  const meta = el("div", "meta", `${message.modeLabel} · ${message.role}`);
  wrapper.appendChild(meta);
  if (message.entry.kind === "user-text") {
    wrapper.appendChild(el("div", "user-text", message.entry.text));
  } else {
    wrapper.appendChild(entryNode(message.entry));
  }
  return wrapper;
}
