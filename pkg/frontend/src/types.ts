// JSON shapes served by the proofreading session API. The server is the
// single source of truth; these mirror its payloads exactly.

export interface GoldAnswer {
  kind: "numeric" | "choice";
  value: string;
}

export interface Revision {
  index: number;
  edit_offset: number | null;
  human_prefix: string;
  llm_continuation: string;
  full_text: string;
}

export interface LintViolation {
  rule_id: string;
  message: string;
}

export interface LintReport {
  conformant: boolean;
  violations: LintViolation[];
}

export type SessionStatus = "open" | "accepted" | "abandoned";

export interface SessionData {
  session_id: string;
  question_id: string;
  question: string;
  gold: GoldAnswer;
  status: SessionStatus;
  correct: boolean;
  lint: LintReport;
  revisions: Revision[];
}
