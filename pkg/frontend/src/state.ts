// View-model for the annotator. All state transitions happen in response
// to confirmed server payloads: every mutation re-fetches the session so
// the UI can never drift from the server's view.

import { ApiError, ConnectionError } from "./api.js";
import { computeEditOffset } from "./diff.js";
import type { SessionData } from "./types.js";

/** The slice of the API client the controller needs (fakeable in tests). */
export interface SessionApiLike {
  listSessions(status?: string): Promise<SessionData[]>;
  openSession(questionId: string): Promise<SessionData>;
  getSession(sessionId: string): Promise<SessionData>;
  submitEdit(sessionId: string, editOffset: number, correctedPrefix: string): Promise<SessionData>;
  accept(sessionId: string): Promise<SessionData>;
  abandon(sessionId: string): Promise<SessionData>;
}

export interface AppState {
  queue: SessionData[];
  current: SessionData | null;
  banner: string | null; // connectivity problem; retry affordance shown
  inlineError: string | null; // server validation message for the edit form
  conflict: boolean; // concurrent mutation detected; prompt a reload
  busy: boolean;
}

const CONFLICT_CODES = new Set(["SessionClosed", "DuplicateSession"]);

export class AnnotatorApp {
  state: AppState = {
    queue: [],
    current: null,
    banner: null,
    inlineError: null,
    conflict: false,
    busy: false,
  };

  constructor(
    readonly api: SessionApiLike,
    private onChange: (state: AppState) => void = () => {},
  ) {}

  private emit(): void {
    this.onChange(this.state);
  }

  private update(patch: Partial<AppState>): void {
    this.state = { ...this.state, ...patch };
    this.emit();
  }

  private async guard<T>(work: () => Promise<T>): Promise<T | null> {
    this.update({ busy: true, banner: null, inlineError: null });
    try {
      const result = await work();
      this.update({ busy: false });
      return result;
    } catch (error) {
      if (error instanceof ConnectionError) {
        this.update({ busy: false, banner: error.message });
        return null;
      }
      if (error instanceof ApiError) {
        if (CONFLICT_CODES.has(error.code)) {
          this.update({ busy: false, conflict: true, inlineError: `${error.code}: ${error.message}` });
        } else {
          this.update({ busy: false, inlineError: `${error.code}: ${error.message}` });
        }
        return null;
      }
      this.update({ busy: false });
      throw error;
    }
  }

  async refreshQueue(): Promise<void> {
    await this.guard(async () => {
      const queue = await this.api.listSessions("open");
      this.update({ queue });
    });
  }

  async openSession(questionId: string): Promise<void> {
    await this.guard(async () => {
      const created = await this.api.openSession(questionId);
      // reload from the server rather than trusting local bookkeeping
      const current = await this.api.getSession(created.session_id);
      this.update({ current, conflict: false });
      const queue = await this.api.listSessions("open");
      this.update({ queue });
    });
  }

  async selectSession(sessionId: string): Promise<void> {
    await this.guard(async () => {
      const current = await this.api.getSession(sessionId);
      this.update({ current, conflict: false });
    });
  }

  async reloadCurrent(): Promise<void> {
    const current = this.state.current;
    if (!current) return;
    await this.guard(async () => {
      const fresh = await this.api.getSession(current.session_id);
      this.update({ current: fresh, conflict: false });
    });
  }

  currentText(): string {
    const current = this.state.current;
    if (!current || current.revisions.length === 0) return "";
    return current.revisions[current.revisions.length - 1]!.full_text;
  }

  /**
   * Submit the corrected prefix. The edit offset is the first index where
   * the correction diverges from the current text, which by construction
   * satisfies the server's "edited at/after the offset only" precondition.
   */
  async submitEdit(correctedPrefix: string): Promise<void> {
    const current = this.state.current;
    if (!current) return;
    const offset = computeEditOffset(this.currentText(), correctedPrefix);
    if (offset === null) {
      this.update({ inlineError: "PrefixUnchanged: the text has not been corrected" });
      return;
    }
    await this.guard(async () => {
      await this.api.submitEdit(current.session_id, offset, correctedPrefix);
      const fresh = await this.api.getSession(current.session_id);
      this.update({ current: fresh });
    });
  }

  async accept(): Promise<void> {
    const current = this.state.current;
    if (!current) return;
    await this.guard(async () => {
      await this.api.accept(current.session_id);
      const fresh = await this.api.getSession(current.session_id);
      const queue = await this.api.listSessions("open");
      this.update({ current: fresh, queue });
    });
  }

  async abandon(): Promise<void> {
    const current = this.state.current;
    if (!current) return;
    await this.guard(async () => {
      await this.api.abandon(current.session_id);
      const fresh = await this.api.getSession(current.session_id);
      const queue = await this.api.listSessions("open");
      this.update({ current: fresh, queue });
    });
  }

  editingEnabled(): boolean {
    return this.state.current?.status === "open" && !this.state.conflict;
  }
}
