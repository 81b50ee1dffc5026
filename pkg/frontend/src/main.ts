// Bootstrap: resolve the API base URL (?api=... beats localStorage beats
// the default), build the controller, and re-render on every state change.

import { SessionApi } from "./api.js";
import { renderApp, type Handlers } from "./render.js";
import { AnnotatorApp } from "./state.js";

const DEFAULT_BASE_URL = "http://127.0.0.1:8321";

export function resolveBaseUrl(): string {
  const fromQuery = new URLSearchParams(window.location.search).get("api");
  if (fromQuery) {
    localStorage.setItem("aligncot_api_base", fromQuery);
    return fromQuery;
  }
  return localStorage.getItem("aligncot_api_base") ?? DEFAULT_BASE_URL;
}

function start(): void {
  const root = document.getElementById("app");
  if (!root) throw new Error("missing #app container");
  const api = new SessionApi(resolveBaseUrl());
  const app = new AnnotatorApp(api, (state) => renderApp(root, state, handlers));
  const handlers: Handlers = {
    refresh: () => void app.refreshQueue(),
    open: (questionId) => void app.openSession(questionId),
    select: (sessionId) => void app.selectSession(sessionId),
    submit: (corrected) => void app.submitEdit(corrected),
    accept: () => void app.accept(),
    abandon: () => void app.abandon(),
    reload: () => void app.reloadCurrent(),
  };
  void app.refreshQueue();
}

start();
