"""Build exemplar sets (prompt-pool variants) from probe and session output.

The ablation grid needs four native-style exemplar variants per question
set: raw probes, proofread-only, format-only, and the full pipeline. All
four share question text and exemplar count and differ only in cot and
answer bytes.
"""

from __future__ import annotations

import warnings
from typing import Iterable

from .extraction import extract
from .formatting import DEFAULT_RULES, FormatRules, FormattingError, _strip_answer_sentence, normalize
from .probing import ProbeResult
from .proofreading import ACCEPTED, ProofreadSession
from .prompting import Exemplar


def _build(
    exemplar_id: str,
    question: str,
    text: str,
    answer_kind: str,
    gold_value: str | None,
    apply_format: bool,
    rules: FormatRules,
    style: str,
) -> Exemplar | None:
    if apply_format:
        try:
            cot, answer = normalize(text, answer_kind, rules)
        except FormattingError as exc:
            warnings.warn(f"skipping {exemplar_id}: {exc}")
            return None
    else:
        # Keep the text verbatim apart from the final-answer sentence,
        # which prompting re-renders from the answer token.
        cot = _strip_answer_sentence(text, answer_kind).strip()
        extracted = extract(text, answer_kind)
        answer = extracted.value if extracted.value is not None else gold_value
        if not cot or not answer:
            warnings.warn(f"skipping {exemplar_id}: nothing left after stripping")
            return None
    return Exemplar(question=question, cot=cot, answer=answer, style=style, id=exemplar_id)


def exemplars_from_probes(
    probes: Iterable[ProbeResult],
    apply_format: bool = False,
    rules: FormatRules = DEFAULT_RULES,
) -> list[Exemplar]:
    """Raw probes verbatim (wrong answers included), optionally formatted."""
    out = []
    for probe in probes:
        if probe.error is not None:
            warnings.warn(f"skipping {probe.question_id}: probe failed ({probe.error})")
            continue
        exemplar = _build(
            probe.question_id,
            probe.question,
            probe.raw_generation,
            probe.gold.kind if probe.gold else "numeric",
            probe.gold.value if probe.gold else None,
            apply_format,
            rules,
            style="native_unproofed",
        )
        if exemplar is not None:
            out.append(exemplar)
    return out


def exemplars_from_sessions(
    sessions: Iterable[ProofreadSession],
    apply_format: bool = True,
    rules: FormatRules = DEFAULT_RULES,
) -> list[Exemplar]:
    """Accepted-session texts, optionally formatted (full pipeline)."""
    out = []
    for session in sessions:
        if session.status != ACCEPTED:
            continue
        exemplar = _build(
            session.question_id,
            session.question,
            session.current_text,
            session.gold.kind,
            session.gold.value,
            apply_format,
            rules,
            style="native" if apply_format else "native_unformatted",
        )
        if exemplar is not None:
            out.append(exemplar)
    return out
