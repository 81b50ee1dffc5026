"""Deterministic unification of CoT surface format.

Normal form: one reasoning step per line, each line trimmed, free of
bullet/numbering prefixes, ending in exactly one terminal period, with no
blank interior lines. The final-answer sentence is split off and returned
as a canonical token so prompting can re-render it uniformly.

normalize is idempotent and lint(normalize(x)) is conformant whenever
normalize succeeds; both facts are enforced by property tests.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path

from .canonical import canonical_choice, canonical_number
from .extraction import _PHRASE_CHOICE, _PHRASE_NUMERIC, extract

RULE_IDS = (
    "whitespace",
    "blank-line",
    "bullet-prefix",
    "step-per-line",
    "terminal-punct",
    "empty-step",
    "line-ending",
)

_BULLET_RE = re.compile(r"^(?:[-*+•]+|\(?\d{1,3}[.)])\s+")
_BOUNDARY_RE = re.compile(r"(?<=[.!?])\s+")
_TERMINAL_CLUSTER_RE = re.compile(r"[.!?,;:]+$")
# Everything str.splitlines treats as a line break besides "\n".
_ODD_LINE_BREAKS = "\r\x0b\x0c\x1c\x1d\x1e\x85  "


class FormattingError(Exception):
    pass


class NoAnswerFound(FormattingError):
    pass


class EmptyAfterStripping(FormattingError):
    pass


@dataclass(frozen=True)
class FormatRules:
    """The enabled rule set; ablations may switch individual rules off."""

    enabled: frozenset = frozenset(RULE_IDS)

    def on(self, rule_id: str) -> bool:
        return rule_id in self.enabled


DEFAULT_RULES = FormatRules()


@dataclass(frozen=True)
class Violation:
    rule_id: str
    span: tuple[int, int]
    message: str


@dataclass(frozen=True)
class FormatReport:
    conformant: bool
    violations: tuple[Violation, ...]
    normalized_text: str


def load_rules(path: str | Path) -> FormatRules:
    """Read a rules file ([rules] enabled = [...]) into a FormatRules."""
    try:
        import tomllib
    except ModuleNotFoundError:  # Python < 3.11
        import tomli as tomllib
    with open(path, "rb") as fh:
        data = tomllib.load(fh)
    enabled = data.get("rules", {}).get("enabled", list(RULE_IDS))
    unknown = set(enabled) - set(RULE_IDS)
    if unknown:
        raise FormattingError(f"unknown rule ids in {path}: {sorted(unknown)}")
    return FormatRules(enabled=frozenset(enabled))


def _strip_bullets(line: str) -> str:
    while True:
        m = _BULLET_RE.match(line)
        if m is None:
            return line
        line = line[m.end():]


def _normalize_lines(text: str, rules: FormatRules = DEFAULT_RULES) -> str:
    """Apply the line rules alone (no answer-sentence handling)."""
    out: list[str] = []
    for raw_line in text.splitlines():
        line = raw_line.strip() if rules.on("whitespace") else raw_line
        if not line.strip():
            if rules.on("blank-line"):
                continue
            out.append(line)
            continue
        if rules.on("bullet-prefix"):
            line = _strip_bullets(line)
        segments = _BOUNDARY_RE.split(line) if rules.on("step-per-line") else [line]
        for seg in segments:
            if rules.on("whitespace"):
                seg = seg.strip()
            if rules.on("bullet-prefix"):
                seg = _strip_bullets(seg)
            if not seg:
                continue
            core = seg.rstrip(".!?,;:")
            if not core.strip():
                if rules.on("empty-step"):
                    continue
                core = ""
            if rules.on("terminal-punct"):
                seg = core + "."
            out.append(seg)
    return "\n".join(out)


def _line_violations(raw_line: str, base: int, rules: FormatRules) -> list[Violation]:
    span = (base, base + len(raw_line))
    found: list[Violation] = []
    if not raw_line.strip():
        if rules.on("blank-line"):
            found.append(Violation("blank-line", span, "blank line"))
        return found
    stripped = raw_line.strip()
    if rules.on("whitespace") and raw_line != stripped:
        found.append(Violation("whitespace", span, "leading or trailing whitespace"))
    line = stripped if rules.on("whitespace") else raw_line
    if rules.on("bullet-prefix") and _BULLET_RE.match(line):
        found.append(Violation("bullet-prefix", span, "bullet or numbering prefix"))
        line = _strip_bullets(line)
    if rules.on("step-per-line") and _BOUNDARY_RE.search(line.strip()):
        found.append(Violation("step-per-line", span, "multiple steps on one line"))
    cluster = _TERMINAL_CLUSTER_RE.search(line)
    if rules.on("terminal-punct") and (cluster is None or cluster.group() != "."):
        found.append(Violation("terminal-punct", span, "line must end with exactly one '.'"))
    if rules.on("empty-step") and not line.rstrip(".!?,;:").strip():
        found.append(Violation("empty-step", span, "line has no step content"))
    return found


def lint(cot: str, rules: FormatRules = DEFAULT_RULES) -> FormatReport:
    """Report every rule violation; conformant iff normalization is a no-op."""
    violations: list[Violation] = []
    if rules.on("line-ending"):
        for i, ch in enumerate(cot):
            if ch in _ODD_LINE_BREAKS:
                violations.append(
                    Violation("line-ending", (i, i + 1), "non-\\n line break")
                )
                break
    base = 0
    for raw_line in cot.splitlines():
        violations.extend(_line_violations(raw_line, base, rules))
        base += len(raw_line) + 1
    if cot and cot[-1] in "\n" + _ODD_LINE_BREAKS and rules.on("whitespace"):
        violations.append(Violation("whitespace", (len(cot) - 1, len(cot)), "trailing line break"))
    normalized = _normalize_lines(cot, rules)
    if normalized != cot and not violations:
        # Defensive: the per-line checks should characterize the normal
        # form exactly; keep the report invariant if a case slips through.
        violations.append(Violation("nonconformant", (0, len(cot)), "text is not in normal form"))
    conformant = not violations and normalized == cot
    return FormatReport(
        conformant=conformant, violations=tuple(violations), normalized_text=normalized
    )


def _strip_answer_sentence(text: str, answer_kind: str) -> str:
    """Remove the sentence holding the last anchored answer phrase, if any.

    Mirrors extraction: phrase matches whose token does not canonicalize
    are skipped, so the removed sentence is the one extraction read.
    """
    phrase_re = _PHRASE_NUMERIC if answer_kind == "numeric" else _PHRASE_CHOICE
    canon = canonical_number if answer_kind == "numeric" else canonical_choice
    m = None
    for candidate in reversed(list(phrase_re.finditer(text))):
        if canon(candidate.group(1)) is not None:
            m = candidate
            break
    if m is None:
        return text
    s = m.start()
    while s > 0 and text[s - 1] not in ".!?\n":
        s -= 1
    e = m.end()
    while e < len(text) and text[e] not in ".!?\n":
        e += 1
    while e < len(text) and text[e] in ".!?":
        e += 1
    return text[:s] + text[e:]


def normalize(
    cot_with_answer: str,
    answer_kind: str,
    rules: FormatRules = DEFAULT_RULES,
) -> tuple[str, str]:
    """Split *cot_with_answer* into (normal-form cot, canonical answer token).

    The answer is located with the extraction cascade; an anchored answer
    sentence is removed from the cot (a bare trailing number is left in
    place -- it is a reasoning step that happens to state the value).
    """
    ext = extract(cot_with_answer, answer_kind)
    if ext.kind == "none" or ext.value is None:
        raise NoAnswerFound("no extractable answer in text")
    body = _strip_answer_sentence(cot_with_answer, answer_kind)
    cot = _normalize_lines(body, rules)
    if not cot:
        raise EmptyAfterStripping("no reasoning steps left after normalization")
    return cot, ext.value
