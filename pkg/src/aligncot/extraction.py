"""Final-answer extraction from free-form model generations.

The rule cascade, in priority order:
  1. the last occurrence of an anchored answer phrase ("The answer is X",
     "answer: X", choice variants like "The answer is (C)") wins;
  2. otherwise the last numeric token (numeric mode) or last standalone
     uppercase letter A-E (choice mode) in the last line containing one;
  3. otherwise no extraction (kind="none" -- a value, not an error).

Extraction is total: it never raises on arbitrary input.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .canonical import canonical_choice, canonical_number
from .dataset import GoldAnswer

_NUMERIC_TOKEN = r"[-+$]{0,2}\d[\d,]*(?:\.\d+)?%?"

_PHRASE_NUMERIC = re.compile(
    r"(?:the\s+)?answer\s*(?:is\s*:?|:)\s*\(?\s*(" + _NUMERIC_TOKEN + r")",
    re.IGNORECASE,
)
_PHRASE_CHOICE = re.compile(
    r"(?:the\s+)?answer\s*(?:is\s*:?|:)\s*(?:option\s+)?\(?([A-Ea-e])\)?(?![A-Za-z])",
    re.IGNORECASE,
)
_BARE_NUMERIC = re.compile("(" + _NUMERIC_TOKEN + ")")
# Lowercase a-e are excluded from the bare fallback: "a" is an article.
_BARE_CHOICE = re.compile(r"(?<![A-Za-z])\(?([A-E])\)?(?![A-Za-z])")


@dataclass(frozen=True)
class ExtractedAnswer:
    kind: str  # "numeric" | "choice" | "none"
    value: str | None = None
    span: tuple[int, int] | None = None

    @staticmethod
    def none() -> "ExtractedAnswer":
        return ExtractedAnswer(kind="none")


def _last_canonical(matches: list[re.Match], kind: str) -> ExtractedAnswer | None:
    canon = canonical_number if kind == "numeric" else canonical_choice
    for m in reversed(matches):
        value = canon(m.group(1))
        if value is not None:
            return ExtractedAnswer(kind=kind, value=value, span=m.span(1))
    return None


def extract(generation: str, answer_kind: str) -> ExtractedAnswer:
    """Extract the final answer from *generation* (numeric or choice mode)."""
    if answer_kind not in ("numeric", "choice"):
        raise ValueError(f"answer_kind must be 'numeric' or 'choice', got {answer_kind!r}")
    text = generation or ""
    phrase_re = _PHRASE_NUMERIC if answer_kind == "numeric" else _PHRASE_CHOICE
    bare_re = _BARE_NUMERIC if answer_kind == "numeric" else _BARE_CHOICE

    hit = _last_canonical(list(phrase_re.finditer(text)), answer_kind)
    if hit is not None:
        return hit
    hit = _last_canonical(list(bare_re.finditer(text)), answer_kind)
    return hit if hit is not None else ExtractedAnswer.none()


def is_correct(extracted: ExtractedAnswer, gold: GoldAnswer) -> bool:
    """Exact-match judgement: kinds agree and canonical values are equal.

    Numeric comparison is exact decimal equality after canonicalization;
    there is no epsilon. A kind="none" extraction is never correct.
    """
    if extracted.kind == "none" or extracted.value is None:
        return False
    if extracted.kind != gold.kind:
        return False
    return extracted.value == gold.value
