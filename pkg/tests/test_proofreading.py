from __future__ import annotations

import re

import pytest
from fastapi.testclient import TestClient

from aligncot.api import create_app
from aligncot.dataset import load_dataset
from aligncot.extraction import ExtractedAnswer
from aligncot.probing import ProbeResult
from aligncot.proofreading import (
    ACCEPTED,
    CONTINUATION_INSTRUCTION,
    DuplicateSession,
    InvalidEdit,
    NotYetCorrect,
    PrefixUnchanged,
    ProofreadService,
    SessionClosed,
    SessionStore,
    UnknownQuestion,
)

from conftest import FIXTURES, stub_gateway


def wrong_probe(record) -> ProbeResult:
    """A probe whose computed value is off by one."""
    right = record.gold.value
    wrong = str(int(right) + 1)
    expr = record.gold_rationale.replace("Compute ", "").split(" =")[0]
    return ProbeResult(
        question_id=record.id,
        raw_generation=f"- Work out {expr} = {wrong}.\nThe answer is {wrong}.",
        extracted=ExtractedAnswer("numeric", wrong),
        correct_vs_gold=False,
        model="test-model",
        created_at="2026-01-01T00:00:00+00:00",
        question=record.question,
        gold=record.gold,
    )


def continuation_stub(records):
    """Continuation patterns: once the prefix carries the right value, the
    stub completes with the matching answer sentence."""
    patterns = []
    for record in records:
        right = record.gold.value
        patterns.append((
            re.escape(record.question)
            + r"[\s\S]*= " + re.escape(right) + r"\.\n\n"
            + re.escape(CONTINUATION_INSTRUCTION) + r"$",
            f"\nThe answer is {right}.",
        ))
    return patterns


def make_service(tmp_path, n=3, log_name="sessions.jsonl"):
    records = load_dataset(FIXTURES / "gsm8k_train.jsonl", "gsm8k", "train", limit=n)
    probes = {r.id: wrong_probe(r) for r in records}
    gateway = stub_gateway(patterns=continuation_stub(records))
    store = SessionStore(tmp_path / log_name)
    service = ProofreadService(store=store, gateway=gateway, model="test-model", probes=probes)
    return service, records


def scripted_fix(service, record):
    """Open, correct the first error, and return the session."""
    session = service.open_session(record.id)
    previous = session.current_text
    right, wrong = record.gold.value, str(int(record.gold.value) + 1)
    edit_offset = previous.index(f"= {wrong}") + 2  # the computed result slot
    corrected_prefix = previous[:edit_offset] + right + "."
    service.apply_edit(session.session_id, edit_offset, corrected_prefix)
    return session


class TestSessionLifecycle:
    def test_open_session_has_probe_text_as_revision_zero(self, tmp_path):
        service, records = make_service(tmp_path)
        session = service.open_session(records[0].id)
        assert len(session.revisions) == 1
        assert session.revisions[0].full_text == service.probes[records[0].id].raw_generation
        assert session.status == "open"

    def test_duplicate_open_rejected(self, tmp_path):
        service, records = make_service(tmp_path)
        service.open_session(records[0].id)
        with pytest.raises(DuplicateSession):
            service.open_session(records[0].id)

    def test_unknown_question(self, tmp_path):
        service, _ = make_service(tmp_path)
        with pytest.raises(UnknownQuestion):
            service.open_session("t999")

    def test_already_correct_probe_acceptable_immediately(self, tmp_path):
        service, records = make_service(tmp_path)
        record = records[0]
        good = wrong_probe(record)
        good = ProbeResult(
            **{**good.__dict__,
               "raw_generation": f"Work it out. The answer is {record.gold.value}.",
               "correct_vs_gold": True}
        )
        service.probes[record.id] = good
        session = service.open_session(record.id)
        assert len(session.revisions) == 1
        assert service.accept(session.session_id).status == ACCEPTED

    def test_edit_then_accept_flow(self, tmp_path):
        service, records = make_service(tmp_path)
        session = scripted_fix(service, records[0])
        assert session.current_correct()
        assert service.accept(session.session_id).status == ACCEPTED

    def test_accept_rejected_while_wrong(self, tmp_path):
        service, records = make_service(tmp_path)
        session = service.open_session(records[0].id)
        with pytest.raises(NotYetCorrect):
            service.accept(session.session_id)

    def test_closed_session_rejects_mutations(self, tmp_path):
        service, records = make_service(tmp_path)
        session = scripted_fix(service, records[0])
        service.accept(session.session_id)
        with pytest.raises(SessionClosed):
            service.apply_edit(session.session_id, 0, "x")
        with pytest.raises(SessionClosed):
            service.abandon(session.session_id)

    def test_abandon(self, tmp_path):
        service, records = make_service(tmp_path)
        session = service.open_session(records[0].id)
        assert service.abandon(session.session_id).status == "abandoned"


class TestEditValidation:
    def test_offset_beyond_text_rejected(self, tmp_path):
        service, records = make_service(tmp_path)
        session = service.open_session(records[0].id)
        with pytest.raises(InvalidEdit):
            service.apply_edit(session.session_id, len(session.current_text) + 1, "x")

    def test_changes_before_offset_rejected(self, tmp_path):
        service, records = make_service(tmp_path)
        session = service.open_session(records[0].id)
        with pytest.raises(InvalidEdit):
            service.apply_edit(session.session_id, 5, "XXXXX" + session.current_text[5:10])

    def test_unchanged_prefix_rejected(self, tmp_path):
        service, records = make_service(tmp_path)
        session = service.open_session(records[0].id)
        with pytest.raises(PrefixUnchanged):
            service.apply_edit(session.session_id, 3, session.current_text[:10])

    def test_empty_continuation_is_a_valid_revision(self, tmp_path):
        records = load_dataset(FIXTURES / "gsm8k_train.jsonl", "gsm8k", "train", limit=1)
        probes = {r.id: wrong_probe(r) for r in records}
        gateway = stub_gateway(default="")
        store = SessionStore(tmp_path / "s.jsonl")
        service = ProofreadService(store, gateway, "test-model", probes)
        session = service.open_session(records[0].id)
        prefix = session.current_text[:5] + "zz"
        revision = service.apply_edit(session.session_id, 5, prefix)
        assert revision.llm_continuation == ""
        assert revision.full_text == prefix

    def test_gateway_error_appends_nothing(self, tmp_path):
        records = load_dataset(FIXTURES / "gsm8k_train.jsonl", "gsm8k", "train", limit=1)
        probes = {r.id: wrong_probe(r) for r in records}
        gateway = stub_gateway(patterns=[])  # StubMiss on any request
        store = SessionStore(tmp_path / "s.jsonl")
        service = ProofreadService(store, gateway, "test-model", probes)
        session = service.open_session(records[0].id)
        from aligncot.gateway import StubMiss

        with pytest.raises(StubMiss):
            service.apply_edit(session.session_id, 5, session.current_text[:5] + "zz")
        assert len(session.revisions) == 1


class TestInvariantsAtScale:
    def test_fifty_scripted_sessions(self, tmp_path):
        service, records = make_service(tmp_path, n=50)
        for record in records:
            session = service.open_session(record.id)
            with pytest.raises(NotYetCorrect):
                service.accept(session.session_id)
            previous = session.current_text
            wrong = str(int(record.gold.value) + 1)
            edit_offset = previous.index(f"= {wrong}") + 2
            corrected_prefix = previous[:edit_offset] + record.gold.value + "."
            service.apply_edit(session.session_id, edit_offset, corrected_prefix)
            service.accept(session.session_id)

        sessions = service.store.list()
        assert len(sessions) == 50
        for session in sessions:
            assert session.status == ACCEPTED
            for revision in session.revisions[1:]:
                assert revision.full_text.startswith(revision.human_prefix)
                assert revision.full_text[: len(revision.human_prefix)] == revision.human_prefix
            indices = [r.index for r in session.revisions]
            assert indices == list(range(len(indices)))

    def test_event_log_replay_reconstructs_state(self, tmp_path):
        service, records = make_service(tmp_path, n=8)
        for i, record in enumerate(records):
            session = scripted_fix(service, record)
            if i % 3 == 0:
                service.accept(session.session_id)
            elif i % 3 == 1:
                service.abandon(session.session_id)
        replayed = SessionStore(tmp_path / "sessions.jsonl")
        original_state = {sid: s.to_dict() for sid, s in service.store.sessions.items()}
        replayed_state = {sid: s.to_dict() for sid, s in replayed.sessions.items()}
        assert replayed_state == original_state

    def test_replay_rejects_corrupted_accept(self, tmp_path):
        service, records = make_service(tmp_path, n=1)
        session = service.open_session(records[0].id)
        # forge an accept event without the gate having passed
        service.store._append({"type": "accepted", "session_id": session.session_id})
        from aligncot.proofreading import ProofreadError

        with pytest.raises(ProofreadError):
            SessionStore(tmp_path / "sessions.jsonl")


class TestHttpApi:
    @pytest.fixture
    def client(self, tmp_path):
        service, self.records = make_service(tmp_path, n=3)
        return TestClient(create_app(service))

    def test_health(self, client):
        response = client.get("/health")
        assert response.status_code == 200
        assert response.json()["status"] == "ok"

    def test_full_flow(self, client):
        record = self.records[0]
        created = client.post("/sessions", json={"question_id": record.id}).json()
        assert created["status"] == "open"
        assert created["question"] == record.question
        assert created["gold"]["value"] == record.gold.value

        listed = client.get("/sessions", params={"status": "open"}).json()
        assert [s["session_id"] for s in listed] == [created["session_id"]]

        previous = created["revisions"][0]["full_text"]
        wrong = str(int(record.gold.value) + 1)
        offset = previous.index(f"= {wrong}") + 2
        prefix = previous[:offset] + record.gold.value + "."
        edited = client.post(
            f"/sessions/{created['session_id']}/edits",
            json={"edit_offset": offset, "corrected_prefix": prefix},
        ).json()
        assert len(edited["revisions"]) == 2
        assert edited["revisions"][1]["full_text"].startswith(prefix)
        assert edited["correct"]

        accepted = client.post(f"/sessions/{created['session_id']}/accept").json()
        assert accepted["status"] == "accepted"
        assert client.get(f"/sessions/{created['session_id']}").json()["status"] == "accepted"

    def test_error_codes(self, client):
        assert client.get("/sessions/nope").status_code == 404
        assert client.post("/sessions", json={"question_id": "missing"}).status_code == 404

        record = self.records[1]
        created = client.post("/sessions", json={"question_id": record.id}).json()
        assert client.post("/sessions", json={"question_id": record.id}).status_code == 409

        accept = client.post(f"/sessions/{created['session_id']}/accept")
        assert accept.status_code == 400
        assert accept.json()["detail"]["error"] == "NotYetCorrect"

        unchanged = client.post(
            f"/sessions/{created['session_id']}/edits",
            json={"edit_offset": 0, "corrected_prefix": created["revisions"][0]["full_text"][:4]},
        )
        assert unchanged.status_code == 400
        assert unchanged.json()["detail"]["error"] == "PrefixUnchanged"

        client.post(f"/sessions/{created['session_id']}/abandon")
        closed = client.post(f"/sessions/{created['session_id']}/abandon")
        assert closed.status_code == 409
