// DOM rendering. Pure functions of AppState; all interaction goes back
// through the handlers, never by mutating state here.

import { diffWords } from "./diff.js";
import type { AppState } from "./state.js";
import type { Revision, SessionData } from "./types.js";

export interface Handlers {
  refresh(): void;
  open(questionId: string): void;
  select(sessionId: string): void;
  submit(corrected: string): void;
  accept(): void;
  abandon(): void;
  reload(): void;
}

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

function statusBadge(status: string): HTMLElement {
  return el("span", `badge badge-${status}`, status);
}

function renderBanner(state: AppState, handlers: Handlers): HTMLElement | null {
  if (!state.banner) return null;
  const banner = el("div", "banner");
  banner.append(el("span", undefined, state.banner));
  const retry = el("button", "retry", "retry");
  retry.addEventListener("click", () => handlers.refresh());
  banner.append(retry);
  return banner;
}

function renderQueue(state: AppState, handlers: Handlers): HTMLElement {
  const panel = el("section", "queue");
  panel.append(el("h2", undefined, "Open sessions"));
  if (state.queue.length === 0) {
    panel.append(el("p", "empty", "No open sessions. Open one from a probe below."));
  } else {
    const list = el("ul", "queue-list");
    for (const session of state.queue) {
      const item = el("li");
      const link = el("button", "session-link", session.question_id);
      link.addEventListener("click", () => handlers.select(session.session_id));
      item.append(link, statusBadge(session.status));
      if (!session.correct) item.append(el("span", "badge badge-wrong", "wrong"));
      list.append(item);
    }
    panel.append(list);
  }
  const openForm = el("div", "open-form");
  const input = el("input") as HTMLInputElement;
  input.placeholder = "question id";
  const button = el("button", undefined, "open session");
  button.addEventListener("click", () => {
    if (input.value.trim()) handlers.open(input.value.trim());
  });
  openForm.append(input, button);
  panel.append(openForm);
  return panel;
}

/** Prefix/continuation boundary: the first human_prefix.length characters
 * are the annotator's text, the rest is the model's continuation. */
export function renderRevisionText(revision: Revision): HTMLElement {
  const wrap = el("div", "revision-text");
  if (revision.index === 0) {
    wrap.append(el("span", "llm", revision.full_text));
    return wrap;
  }
  const boundary = revision.human_prefix.length;
  wrap.append(el("span", "human", revision.full_text.slice(0, boundary)));
  wrap.append(el("span", "llm", revision.full_text.slice(boundary)));
  return wrap;
}

export function renderDiff(previous: Revision, next: Revision): HTMLElement {
  const wrap = el("div", "revision-diff");
  for (const op of diffWords(previous.full_text, next.full_text)) {
    if (op.kind === "same") {
      wrap.append(document.createTextNode(op.text));
    } else {
      wrap.append(el("mark", op.kind === "added" ? "added" : "removed", op.text));
    }
  }
  return wrap;
}

function renderSession(session: SessionData, state: AppState, handlers: Handlers): HTMLElement {
  const panel = el("section", "session");
  const heading = el("h2", undefined, `${session.question_id} `);
  heading.append(statusBadge(session.status));
  panel.append(heading);
  panel.append(el("p", "question", session.question));
  panel.append(el("p", "gold", `gold answer: ${session.gold.value} (${session.gold.kind})`));

  if (!session.lint.conformant) {
    const lint = el("div", "lint");
    lint.append(el("h3", undefined, "format warnings"));
    const list = el("ul");
    for (const violation of session.lint.violations) {
      list.append(el("li", undefined, `${violation.rule_id}: ${violation.message}`));
    }
    lint.append(list);
    panel.append(lint);
  }

  const revisions = el("div", "revisions");
  session.revisions.forEach((revision, index) => {
    const block = el("div", "revision");
    block.append(el("h3", undefined, `revision ${revision.index}`));
    block.append(renderRevisionText(revision));
    if (index > 0) {
      const details = el("details");
      details.append(el("summary", undefined, "diff vs previous"));
      details.append(renderDiff(session.revisions[index - 1]!, revision));
      block.append(details);
    }
    revisions.append(block);
  });
  panel.append(revisions);

  if (state.conflict) {
    const conflict = el("div", "conflict");
    conflict.append(el("span", undefined, "This session changed elsewhere."));
    const reload = el("button", undefined, "reload");
    reload.addEventListener("click", () => handlers.reload());
    conflict.append(reload);
    panel.append(conflict);
  }

  const editable = session.status === "open" && !state.conflict;
  const editor = el("div", "editor");
  const textarea = el("textarea") as HTMLTextAreaElement;
  textarea.value = session.revisions[session.revisions.length - 1]!.full_text;
  textarea.disabled = !editable;
  const hint = el(
    "p",
    "hint",
    "Fix the first error, delete everything after it, then submit; the model completes the rest.",
  );
  const submit = el("button", undefined, "submit correction");
  submit.disabled = !editable;
  submit.addEventListener("click", () => handlers.submit(textarea.value));
  const acceptButton = el("button", "accept", "accept");
  acceptButton.disabled = !editable || !session.correct;
  acceptButton.addEventListener("click", () => handlers.accept());
  const abandonButton = el("button", "abandon", "abandon");
  abandonButton.disabled = !editable;
  abandonButton.addEventListener("click", () => handlers.abandon());
  editor.append(hint, textarea);
  if (state.inlineError) editor.append(el("p", "inline-error", state.inlineError));
  editor.append(submit, acceptButton, abandonButton);
  panel.append(editor);
  return panel;
}

export function renderApp(root: HTMLElement, state: AppState, handlers: Handlers): void {
  root.replaceChildren();
  const banner = renderBanner(state, handlers);
  if (banner) root.append(banner);
  root.append(renderQueue(state, handlers));
  if (state.current) {
    root.append(renderSession(state.current, state, handlers));
  } else if (state.inlineError) {
    root.append(el("p", "inline-error", state.inlineError));
  }
}
