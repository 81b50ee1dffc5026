"""Step 1: probe the model's native-style CoT for each question.

Each question is sent zero-shot with the magic phrase; nothing is retried
with sampling -- wrong probes are handed to proofreading as-is.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

from .dataset import GoldAnswer, ProblemRecord
from .extraction import ExtractedAnswer, extract, is_correct
from .gateway import CompletionRequest, Gateway, GatewayError
from .prompting import DEFAULT_MAGIC_PHRASE, render_probe


@dataclass(frozen=True)
class ProbeResult:
    question_id: str
    raw_generation: str
    extracted: ExtractedAnswer
    correct_vs_gold: bool
    model: str
    created_at: str
    question: str = ""
    gold: GoldAnswer | None = None
    error: str | None = None


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


def probe(
    records: list[ProblemRecord],
    model: str,
    gateway: Gateway,
    magic_phrase: str = DEFAULT_MAGIC_PHRASE,
    max_tokens: int = 1024,
    workers: int = 1,
) -> list[ProbeResult]:
    """One ProbeResult per record, in input order; failures are flagged,
    never aborting the batch."""

    def one(record: ProblemRecord) -> ProbeResult:
        prompt = render_probe(record.question, magic_phrase=magic_phrase)
        request = CompletionRequest.user(
            model, prompt, temperature=0.0, max_tokens=max_tokens
        )
        try:
            response = gateway.complete(request)
        except GatewayError as exc:
            return ProbeResult(
                question_id=record.id,
                raw_generation="",
                extracted=ExtractedAnswer.none(),
                correct_vs_gold=False,
                model=model,
                created_at=_now(),
                question=record.question,
                gold=record.gold,
                error=str(exc),
            )
        extracted = extract(response.text, record.answer_kind)
        return ProbeResult(
            question_id=record.id,
            raw_generation=response.text,
            extracted=extracted,
            correct_vs_gold=is_correct(extracted, record.gold),
            model=model,
            created_at=_now(),
            question=record.question,
            gold=record.gold,
        )

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(one, records))
    return [one(r) for r in records]


def probe_to_dict(result: ProbeResult) -> dict:
    return {
        "question_id": result.question_id,
        "question": result.question,
        "gold": (
            {"kind": result.gold.kind, "value": result.gold.value} if result.gold else None
        ),
        "raw_generation": result.raw_generation,
        "extracted": {
            "kind": result.extracted.kind,
            "value": result.extracted.value,
            "span": list(result.extracted.span) if result.extracted.span else None,
        },
        "correct_vs_gold": result.correct_vs_gold,
        "model": result.model,
        "created_at": result.created_at,
        "error": result.error,
    }


def probe_from_dict(raw: dict) -> ProbeResult:
    gold = raw.get("gold")
    ext = raw.get("extracted") or {}
    span = tuple(ext["span"]) if ext.get("span") else None
    return ProbeResult(
        question_id=raw["question_id"],
        raw_generation=raw.get("raw_generation", ""),
        extracted=ExtractedAnswer(kind=ext.get("kind", "none"), value=ext.get("value"), span=span),
        correct_vs_gold=bool(raw.get("correct_vs_gold", False)),
        model=raw.get("model", ""),
        created_at=raw.get("created_at", ""),
        question=raw.get("question", ""),
        gold=GoldAnswer(kind=gold["kind"], value=gold["value"]) if gold else None,
        error=raw.get("error"),
    )


def save_probes(results: list[ProbeResult], path: str | Path) -> None:
    lines = [json.dumps(probe_to_dict(r), ensure_ascii=False) for r in results]
    Path(path).write_text("\n".join(lines) + ("\n" if lines else ""), encoding="utf-8")


def load_probes(path: str | Path) -> list[ProbeResult]:
    out = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if line.strip():
            out.append(probe_from_dict(json.loads(line)))
    return out
