// App bootstrap: one conversation pane, a mode toggle, client-local
// transcript. One in-flight request at a time per pane.

import { ApiFailure, Mode, labelForMode, sendExpert, sendResearch } from "./api.js";
import { messageNode } from "./dom.js";
import { renderQA, renderResearch } from "./render.js";
import { responseMessages, userMessage } from "./transcript.js";

function mustFind<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node as T;
}

export function startApp(baseUrl: string = ""): void {
  const transcript = mustFind<HTMLDivElement>("transcript");
  const form = mustFind<HTMLFormElement>("ask-form");
  const input = mustFind<HTMLInputElement>("query-input");
  const button = mustFind<HTMLButtonElement>("send-button");

  const mode = (): Mode => {
    const checked = document.querySelector<HTMLInputElement>("input[name=mode]:checked");
    return checked?.value === "research" ? "research" : "expert";
  };

  const append = (node: HTMLElement) => {
    transcript.appendChild(node);
    transcript.scrollTop = transcript.scrollHeight;
  };

  form.addEventListener("submit", async (event) => {
    event.preventDefault();
    const text = input.value.trim();
    if (!text || button.disabled) return;
    const activeMode = mode();
    append(messageNode(userMessage(activeMode, text)));
    input.value = "";
    button.disabled = true;
    const placeholder = document.createElement("div");
    placeholder.className = "message pending";
    placeholder.textContent =
      activeMode === "research"
        ? `${labelForMode(activeMode)}: decomposing into sub-questions…`
        : `${labelForMode(activeMode)}: retrieving sources…`;
    append(placeholder);
    try {
      const entries =
        activeMode === "expert"
          ? renderQA(await sendExpert(baseUrl, text, fetch))
          : renderResearch(await sendResearch(baseUrl, text, fetch));
      placeholder.remove();
      for (const message of responseMessages(activeMode, entries)) {
        append(messageNode(message));
      }
    } catch (error) {
      placeholder.remove();
      const banner = document.createElement("div");
      banner.className = "message error-banner";
      banner.textContent =
        error instanceof ApiFailure
          ? `${error.code}: ${error.message}`
          : `request failed: ${String(error)}`;
      append(banner);
    } finally {
      button.disabled = false;
    }
  });
}

if (typeof document !== "undefined" && document.readyState !== "loading") {
  startApp();
} else if (typeof document !== "undefined") {
  document.addEventListener("DOMContentLoaded", () => startApp());
}
