"""Rewrite a training set into native-style Aligned Data.

Stage 1 queries with the aligned 8-shot prompt; records that fail the
gate fall back to stage 2, the style-conversion prompt; the residual is
dropped and tallied. Every accepted record passes the same gate:
normalize succeeds, the extracted answer equals gold exactly, and the
normalized CoT lints clean.

Progress is persisted per item to a sidecar JSONL, which makes runs
resumable: the output file is rebuilt from the sidecar on resume, so a
kill at any point reproduces byte-identical final output.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from .dataset import ProblemRecord
from .extraction import extract, is_correct
from .formatting import DEFAULT_RULES, FormatRules, FormattingError, lint, normalize
from .gateway import CompletionRequest, Gateway, GatewayError
from .prompting import PromptSpec, answer_sentence, render_conversion, render_fewshot

HEADER_COMMENT = "# aligncot aligned records v1"

PROVENANCE_ALIGNED = "aligned_prompt"
PROVENANCE_CONVERSION = "conversion_prompt"

MODES = ("aligned", "conversion_only")


class OverwriteError(Exception):
    pass


@dataclass(frozen=True)
class AlignedRecord:
    id: str
    question: str
    native_cot: str
    answer: str
    provenance: str
    attempts: int


@dataclass
class OverwriteLedger:
    total: int = 0
    accepted_aligned: int = 0
    accepted_conversion: int = 0
    dropped: int = 0
    dropped_ids: list[str] = field(default_factory=list)

    def conserved(self) -> bool:
        return self.accepted_aligned + self.accepted_conversion + self.dropped == self.total

    def to_dict(self) -> dict:
        return {
            "total": self.total,
            "accepted_aligned": self.accepted_aligned,
            "accepted_conversion": self.accepted_conversion,
            "dropped": self.dropped,
            "dropped_ids": list(self.dropped_ids),
        }


def _gate(generation: str, record: ProblemRecord, rules: FormatRules) -> tuple[str, str] | None:
    """Normalize-then-judge: returns (cot, answer token) or None on failure."""
    try:
        cot, token = normalize(generation, record.answer_kind, rules)
    except FormattingError:
        return None
    if not is_correct(extract(generation, record.answer_kind), record.gold):
        return None
    if not lint(cot, rules).conformant:
        return None
    return cot, token


def _manual_answer(record: ProblemRecord) -> str:
    """The handcrafted answer text shown in conversion demos/targets."""
    rationale = record.gold_rationale.strip()
    sentence = answer_sentence(record.gold.value)
    return f"{rationale} {sentence}" if rationale else sentence


def conversion_demos_from(
    exemplars: Sequence, records_by_id: dict[str, ProblemRecord]
) -> list[tuple[str, str, str]]:
    """Pair accepted native exemplars with their original manual answers."""
    demos = []
    for e in exemplars:
        record = records_by_id.get(e.id)
        if record is None:
            raise OverwriteError(f"exemplar {e.id!r} has no matching training record")
        native = f"{e.cot} {answer_sentence(e.answer)}"
        demos.append((e.question, _manual_answer(record), native))
    return demos


class _ProgressLog:
    """Append-only per-item outcome journal keyed by record id."""

    def __init__(self, path: Path):
        self.path = path
        self.entries: dict[str, dict] = {}
        if path.exists():
            for line in path.read_text(encoding="utf-8").splitlines():
                try:
                    entry = json.loads(line)
                except json.JSONDecodeError:
                    continue  # interrupted mid-write; the item will be redone
                self.entries.setdefault(entry["id"], entry)

    def record(self, entry: dict) -> None:
        self.entries[entry["id"]] = entry
        with open(self.path, "a", encoding="utf-8") as fh:
            fh.write(json.dumps(entry, ensure_ascii=False) + "\n")
            fh.flush()


def _record_to_dict(r: AlignedRecord) -> dict:
    return {
        "id": r.id,
        "question": r.question,
        "cot": r.native_cot,
        "answer": r.answer,
        "provenance": r.provenance,
        "attempts": r.attempts,
    }


def _record_from_dict(raw: dict) -> AlignedRecord:
    return AlignedRecord(
        id=str(raw["id"]),
        question=raw["question"],
        native_cot=raw["cot"],
        answer=str(raw["answer"]),
        provenance=raw.get("provenance", PROVENANCE_ALIGNED),
        attempts=int(raw.get("attempts", 1)),
    )


def overwrite_dataset(
    train: list[ProblemRecord],
    aligned_prompt: PromptSpec,
    conversion_demos: Sequence[tuple[str, str, str]],
    gateway: Gateway,
    model: str,
    mode: str = "aligned",
    out_path: str | Path | None = None,
    rules: FormatRules = DEFAULT_RULES,
    max_tokens: int = 1024,
    item_retries: int = 1,
) -> tuple[list[AlignedRecord], OverwriteLedger]:
    """Run the overwrite pipeline over *train*, persisting incrementally.

    mode="aligned": stage 1 with the aligned prompt, stage 2 conversion
    fallback. mode="conversion_only": stage 2 for every record. The
    ledger always conserves: accepted + converted + dropped = total.
    """
    if mode not in MODES:
        raise OverwriteError(f"mode must be one of {MODES}, got {mode!r}")
    if mode == "aligned" and not aligned_prompt.exemplars:
        raise OverwriteError("aligned mode needs a non-empty aligned prompt")
    if not conversion_demos:
        raise OverwriteError("conversion demos must be non-empty")

    progress = None
    out_file = Path(out_path) if out_path else None
    if out_file is not None:
        progress = _ProgressLog(out_file.with_suffix(out_file.suffix + ".progress"))
        _rewrite_output(out_file, train, progress)

    results: list[AlignedRecord] = []
    ledger = OverwriteLedger(total=len(train))

    def ask(prompt: str, attempts_so_far: int) -> tuple[str | None, int, str]:
        attempts = attempts_so_far
        reason = ""
        for _ in range(max(1, item_retries)):
            attempts += 1
            try:
                request = CompletionRequest.user(
                    model, prompt, temperature=0.0, max_tokens=max_tokens
                )
                return gateway.complete(request).text, attempts, ""
            except GatewayError as exc:
                reason = str(exc)
        return None, attempts, reason

    for record in train:
        if progress is not None and record.id in progress.entries:
            entry = progress.entries[record.id]
            _apply_entry(entry, results, ledger)
            continue

        accepted: AlignedRecord | None = None
        attempts = 0
        drop_reason = "gate failed"

        if mode == "aligned":
            prompt = render_fewshot(aligned_prompt.with_test_question(record.question))
            generation, attempts, err = ask(prompt, attempts)
            if generation is None:
                drop_reason = f"stage1 transport: {err}"
            else:
                gated = _gate(generation, record, rules)
                if gated is not None:
                    accepted = AlignedRecord(
                        record.id, record.question, gated[0], gated[1],
                        PROVENANCE_ALIGNED, attempts,
                    )

        if accepted is None:
            prompt = render_conversion(
                list(conversion_demos), (record.question, _manual_answer(record))
            )
            generation, attempts, err = ask(prompt, attempts)
            if generation is None:
                drop_reason = f"stage2 transport: {err}"
            else:
                gated = _gate(generation, record, rules)
                if gated is not None:
                    accepted = AlignedRecord(
                        record.id, record.question, gated[0], gated[1],
                        PROVENANCE_CONVERSION, attempts,
                    )

        if accepted is not None:
            entry = {"id": record.id, "outcome": accepted.provenance,
                     "record": _record_to_dict(accepted)}
        else:
            entry = {"id": record.id, "outcome": "dropped", "reason": drop_reason,
                     "record": None}
        if progress is not None:
            progress.record(entry)
            if accepted is not None:
                with open(out_file, "a", encoding="utf-8") as fh:
                    fh.write(json.dumps(_record_to_dict(accepted), ensure_ascii=False) + "\n")
        _apply_entry(entry, results, ledger)

    return results, ledger


def _apply_entry(entry: dict, results: list[AlignedRecord], ledger: OverwriteLedger) -> None:
    if entry["outcome"] == "dropped":
        ledger.dropped += 1
        ledger.dropped_ids.append(entry["id"])
        return
    record = _record_from_dict(entry["record"])
    results.append(record)
    if record.provenance == PROVENANCE_ALIGNED:
        ledger.accepted_aligned += 1
    else:
        ledger.accepted_conversion += 1


def _rewrite_output(out_file: Path, train: list[ProblemRecord], progress: _ProgressLog) -> None:
    """Rebuild the output file from the progress journal (resume safety)."""
    lines = [HEADER_COMMENT]
    for record in train:
        entry = progress.entries.get(record.id)
        if entry and entry["outcome"] != "dropped":
            lines.append(json.dumps(entry["record"], ensure_ascii=False))
    out_file.write_text("\n".join(lines) + "\n", encoding="utf-8")


def export_aligned(records: list[AlignedRecord], path: str | Path) -> None:
    """Write records as line-delimited JSON under a header comment line."""
    lines = [HEADER_COMMENT]
    lines.extend(json.dumps(_record_to_dict(r), ensure_ascii=False) for r in records)
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_aligned(path: str | Path) -> list[AlignedRecord]:
    out = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        out.append(_record_from_dict(json.loads(line)))
    return out


def write_ledger(ledger: OverwriteLedger, path: str | Path) -> None:
    Path(path).write_text(json.dumps(ledger.to_dict(), indent=2) + "\n", encoding="utf-8")


def load_ledger(path: str | Path) -> OverwriteLedger:
    raw = json.loads(Path(path).read_text(encoding="utf-8"))
    return OverwriteLedger(
        total=raw["total"],
        accepted_aligned=raw["accepted_aligned"],
        accepted_conversion=raw["accepted_conversion"],
        dropped=raw["dropped"],
        dropped_ids=list(raw["dropped_ids"]),
    )
