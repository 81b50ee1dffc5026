"""Step 2: the human-in-the-loop correction session engine.

The annotator fixes the first error by submitting a corrected prefix; the
model is asked to complete the text behind the edit in the same zero-shot
scenario as probing; repeat until the extracted answer matches gold.

Sessions are persisted as an append-only event log. Replaying the log
reconstructs every session exactly, and accepted sessions are re-checked
against the correctness gate on load.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from .dataset import GoldAnswer
from .extraction import extract, is_correct
from .gateway import CompletionRequest, Gateway
from .probing import ProbeResult
from .prompting import DEFAULT_MAGIC_PHRASE, render_probe

# Wire form of the re-completion request (the transport cannot express
# assistant-prefix continuation, so one user message carries everything).
CONTINUATION_INSTRUCTION = "Continue the solution from exactly where it stops."

OPEN = "open"
ACCEPTED = "accepted"
ABANDONED = "abandoned"


class ProofreadError(Exception):
    pass


class DuplicateSession(ProofreadError):
    pass


class UnknownQuestion(ProofreadError):
    pass


class UnknownSession(ProofreadError):
    pass


class SessionClosed(ProofreadError):
    pass


class PrefixUnchanged(ProofreadError):
    pass


class InvalidEdit(ProofreadError):
    pass


class NotYetCorrect(ProofreadError):
    pass


@dataclass(frozen=True)
class Revision:
    index: int
    full_text: str
    edit_offset: int | None = None  # absent for revision 0
    human_prefix: str = ""
    llm_continuation: str = ""


@dataclass
class ProofreadSession:
    session_id: str
    question_id: str
    question: str
    gold: GoldAnswer
    revisions: list[Revision] = field(default_factory=list)
    status: str = OPEN

    @property
    def current_text(self) -> str:
        return self.revisions[-1].full_text

    def current_correct(self) -> bool:
        return is_correct(extract(self.current_text, self.gold.kind), self.gold)

    def to_dict(self) -> dict:
        from .formatting import lint  # deferred: formatting pulls in extraction

        report = lint(self.current_text)
        return {
            "session_id": self.session_id,
            "question_id": self.question_id,
            "question": self.question,
            "gold": {"kind": self.gold.kind, "value": self.gold.value},
            "status": self.status,
            "correct": self.current_correct(),
            "lint": {
                "conformant": report.conformant,
                "violations": [
                    {"rule_id": v.rule_id, "message": v.message} for v in report.violations
                ],
            },
            "revisions": [
                {
                    "index": r.index,
                    "edit_offset": r.edit_offset,
                    "human_prefix": r.human_prefix,
                    "llm_continuation": r.llm_continuation,
                    "full_text": r.full_text,
                }
                for r in self.revisions
            ],
        }


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


class SessionStore:
    """Event-sourced session state. Mutations append to the log first."""

    def __init__(self, log_path: str | Path | None = None):
        self.log_path = Path(log_path) if log_path else None
        self.sessions: dict[str, ProofreadSession] = {}
        self._counter = 0
        self._lock = threading.Lock()
        self._session_locks: dict[str, threading.Lock] = {}
        if self.log_path and self.log_path.exists():
            for line in self.log_path.read_text(encoding="utf-8").splitlines():
                if line.strip():
                    self._apply(json.loads(line))
            self._verify_accepted()

    def _verify_accepted(self) -> None:
        for session in self.sessions.values():
            if session.status == ACCEPTED and not session.current_correct():
                raise ProofreadError(
                    f"integrity: accepted session {session.session_id} fails the correctness gate"
                )

    def session_lock(self, session_id: str) -> threading.Lock:
        with self._lock:
            return self._session_locks.setdefault(session_id, threading.Lock())

    def _append(self, event: dict) -> None:
        event = {**event, "ts": _now()}
        if self.log_path:
            with self._lock:
                with open(self.log_path, "a", encoding="utf-8") as fh:
                    fh.write(json.dumps(event, ensure_ascii=False) + "\n")
        self._apply(event)

    def _apply(self, event: dict) -> None:
        kind = event["type"]
        if kind == "opened":
            gold = GoldAnswer(kind=event["gold"]["kind"], value=event["gold"]["value"])
            session = ProofreadSession(
                session_id=event["session_id"],
                question_id=event["question_id"],
                question=event.get("question", ""),
                gold=gold,
                revisions=[Revision(index=0, full_text=event["probe_text"])],
            )
            self.sessions[session.session_id] = session
            self._counter = max(self._counter, int(event["session_id"].split("-")[-1]) + 1)
        elif kind == "edit":
            session = self.sessions[event["session_id"]]
            session.revisions.append(
                Revision(
                    index=event["index"],
                    edit_offset=event["edit_offset"],
                    human_prefix=event["human_prefix"],
                    llm_continuation=event["llm_continuation"],
                    full_text=event["human_prefix"] + event["llm_continuation"],
                )
            )
        elif kind == "accepted":
            self.sessions[event["session_id"]].status = ACCEPTED
        elif kind == "abandoned":
            self.sessions[event["session_id"]].status = ABANDONED
        else:
            raise ProofreadError(f"unknown event type {kind!r}")

    def next_session_id(self) -> str:
        with self._lock:
            sid = f"sess-{self._counter:05d}"
            self._counter += 1
            return sid

    def open_for_question(self, question_id: str) -> ProofreadSession | None:
        for session in self.sessions.values():
            if session.question_id == question_id and session.status == OPEN:
                return session
        return None

    def list(self, status: str | None = None) -> list[ProofreadSession]:
        out = [s for s in self.sessions.values() if status is None or s.status == status]
        return sorted(out, key=lambda s: s.question_id)

    def get(self, session_id: str) -> ProofreadSession:
        session = self.sessions.get(session_id)
        if session is None:
            raise UnknownSession(f"no session {session_id!r}")
        return session


class ProofreadService:
    """Session operations wired to the gateway for re-completion."""

    def __init__(
        self,
        store: SessionStore,
        gateway: Gateway,
        model: str,
        probes: dict[str, ProbeResult],
        magic_phrase: str = DEFAULT_MAGIC_PHRASE,
        max_tokens: int = 1024,
    ):
        self.store = store
        self.gateway = gateway
        self.model = model
        self.probes = probes
        self.magic_phrase = magic_phrase
        self.max_tokens = max_tokens

    def open_session(self, question_id: str) -> ProofreadSession:
        probe = self.probes.get(question_id)
        if probe is None:
            raise UnknownQuestion(f"no probe for question {question_id!r}")
        if probe.gold is None:
            raise UnknownQuestion(f"probe for {question_id!r} carries no gold answer")
        if self.store.open_for_question(question_id) is not None:
            raise DuplicateSession(f"question {question_id!r} already has an open session")
        session_id = self.store.next_session_id()
        self.store._append(
            {
                "type": "opened",
                "session_id": session_id,
                "question_id": question_id,
                "question": probe.question,
                "gold": {"kind": probe.gold.kind, "value": probe.gold.value},
                "probe_text": probe.raw_generation,
            }
        )
        return self.store.get(session_id)

    def apply_edit(self, session_id: str, edit_offset: int, corrected_prefix: str) -> Revision:
        session = self.store.get(session_id)
        with self.store.session_lock(session_id):
            if session.status != OPEN:
                raise SessionClosed(f"session {session_id} is {session.status}")
            previous = session.current_text
            if edit_offset < 0 or edit_offset > len(previous):
                raise InvalidEdit(
                    f"edit_offset {edit_offset} outside previous text (len {len(previous)})"
                )
            if corrected_prefix[:edit_offset] != previous[:edit_offset]:
                raise InvalidEdit("corrected prefix changes text before the edit offset")
            if corrected_prefix == previous[: len(corrected_prefix)]:
                raise PrefixUnchanged("corrected prefix is identical to the existing text")

            prompt = (
                render_probe(session.question, magic_phrase=self.magic_phrase)
                + "\n"
                + corrected_prefix
                + "\n\n"
                + CONTINUATION_INSTRUCTION
            )
            request = CompletionRequest.user(
                self.model, prompt, temperature=0.0, max_tokens=self.max_tokens
            )
            continuation = self.gateway.complete(request).text
            self.store._append(
                {
                    "type": "edit",
                    "session_id": session_id,
                    "index": len(session.revisions),
                    "edit_offset": edit_offset,
                    "human_prefix": corrected_prefix,
                    "llm_continuation": continuation,
                }
            )
            return session.revisions[-1]

    def accept(self, session_id: str) -> ProofreadSession:
        session = self.store.get(session_id)
        with self.store.session_lock(session_id):
            if session.status != OPEN:
                raise SessionClosed(f"session {session_id} is {session.status}")
            if not session.current_correct():
                raise NotYetCorrect(
                    f"extraction does not match gold {session.gold.value!r} yet"
                )
            self.store._append({"type": "accepted", "session_id": session_id})
            return session

    def abandon(self, session_id: str) -> ProofreadSession:
        session = self.store.get(session_id)
        with self.store.session_lock(session_id):
            if session.status != OPEN:
                raise SessionClosed(f"session {session_id} is {session.status}")
            self.store._append({"type": "abandoned", "session_id": session_id})
            return session
