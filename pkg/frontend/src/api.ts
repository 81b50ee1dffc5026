// Thin fetch client over the session HTTP API. Every mutation returns the
// server's view of the session; callers re-render from that, never from
// locally guessed state.

import type { SessionData } from "./types.js";

export class ApiError extends Error {
  constructor(
    message: string,
    readonly status: number,
    readonly code: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

export class ConnectionError extends Error {
  constructor(message: string) {
    super(message);
    this.name = "ConnectionError";
  }
}

async function request<T>(url: string, init?: RequestInit): Promise<T> {
  let response: Response;
  try {
    response = await fetch(url, init);
  } catch (error) {
    const message = error instanceof Error ? error.message : String(error);
    throw new ConnectionError(`cannot reach the annotation service: ${message}`);
  }
  if (!response.ok) {
    let code = `HTTP ${response.status}`;
    let message = response.statusText;
    try {
      const body = await response.json();
      if (body?.detail?.error) {
        code = body.detail.error;
        message = body.detail.message ?? message;
      }
    } catch {
      // non-JSON error body; keep the HTTP status as the code
    }
    throw new ApiError(message, response.status, code);
  }
  return (await response.json()) as T;
}

function post<T>(url: string, body?: unknown): Promise<T> {
  return request<T>(url, {
    method: "POST",
    headers: { "Content-Type": "application/json" },
    body: body === undefined ? undefined : JSON.stringify(body),
  });
}

export class SessionApi {
  constructor(readonly baseUrl: string) {}

  private url(path: string): string {
    return this.baseUrl.replace(/\/$/, "") + path;
  }

  health(): Promise<{ status: string; sessions: number }> {
    return request(this.url("/health"));
  }

  listSessions(status?: string): Promise<SessionData[]> {
    const query = status ? `?status=${encodeURIComponent(status)}` : "";
    return request(this.url(`/sessions${query}`));
  }

  openSession(questionId: string): Promise<SessionData> {
    return post(this.url("/sessions"), { question_id: questionId });
  }

  getSession(sessionId: string): Promise<SessionData> {
    return request(this.url(`/sessions/${encodeURIComponent(sessionId)}`));
  }

  submitEdit(sessionId: string, editOffset: number, correctedPrefix: string): Promise<SessionData> {
    return post(this.url(`/sessions/${encodeURIComponent(sessionId)}/edits`), {
      edit_offset: editOffset,
      corrected_prefix: correctedPrefix,
    });
  }

  accept(sessionId: string): Promise<SessionData> {
    return post(this.url(`/sessions/${encodeURIComponent(sessionId)}/accept`));
  }

  abandon(sessionId: string): Promise<SessionData> {
    return post(this.url(`/sessions/${encodeURIComponent(sessionId)}/abandon`));
  }
}
