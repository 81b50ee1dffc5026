"""Prompt templates and byte-exact rendering.

Every prompt surface lives here so that extraction and formatting can rely
on one authoritative answer-sentence form ("The answer is {a}.") and one
exemplar layout. Rendering is a pure function of the PromptSpec fields:
identical specs render to identical bytes, which golden-file tests pin.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Sequence

DEFAULT_MAGIC_PHRASE = "Let's think step by step"
DEFAULT_TEMPLATE = "fewshot_cot"

EXEMPLAR_STYLES = ("manual", "native", "native_unproofed", "native_unformatted")


class PromptError(Exception):
    pass


class UnknownTemplate(PromptError):
    pass


class EmptyTestQuestion(PromptError):
    pass


class EmptyDemos(PromptError):
    pass


def answer_sentence(answer_token: str) -> str:
    """The standardized final-answer sentence re-rendered after each CoT."""
    return f"The answer is {answer_token}."


@dataclass(frozen=True)
class Exemplar:
    """One (question, reasoning chain, final answer) unit of a few-shot prompt.

    ``cot`` carries the reasoning only; the final-answer sentence is
    rendered from ``answer`` at prompt time.
    """

    question: str
    cot: str
    answer: str
    style: str = "manual"
    id: str = ""

    def __post_init__(self):
        if not self.question or not self.answer:
            raise ValueError("exemplar question and answer must be non-empty")
        if self.style not in EXEMPLAR_STYLES:
            raise ValueError(f"unknown exemplar style {self.style!r}")


@dataclass(frozen=True)
class PromptSpec:
    exemplars: tuple[Exemplar, ...] = ()
    test_question: str = ""
    template: str = DEFAULT_TEMPLATE
    magic_phrase: str = DEFAULT_MAGIC_PHRASE

    @property
    def k(self) -> int:
        return len(self.exemplars)

    def with_test_question(self, question: str) -> "PromptSpec":
        return replace(self, test_question=question)


@dataclass(frozen=True)
class Template:
    name: str
    exemplar_block: str  # format fields: question, magic, cot, answer
    test_block: str  # format fields: question, magic


TEMPLATES: dict[str, Template] = {
    "fewshot_cot": Template(
        name="fewshot_cot",
        exemplar_block="Question: {question}\nAnswer: {magic}. {cot} The answer is {answer}.\n\n",
        test_block="Question: {question}\nAnswer: {magic}.",
    ),
    # No-CoT baseline: exemplars state the answer with no reasoning chain.
    "standard": Template(
        name="standard",
        exemplar_block="Question: {question}\nAnswer: The answer is {answer}.\n\n",
        test_block="Question: {question}\nAnswer:",
    ),
}


def render_fewshot(spec: PromptSpec) -> str:
    """Render a k-shot prompt (k >= 0) to its exact byte string."""
    template = TEMPLATES.get(spec.template)
    if template is None:
        raise UnknownTemplate(f"no template named {spec.template!r}")
    if not spec.test_question:
        raise EmptyTestQuestion("test question must be non-empty")
    parts = [
        template.exemplar_block.format(
            question=e.question, magic=spec.magic_phrase, cot=e.cot, answer=e.answer
        )
        for e in spec.exemplars
    ]
    parts.append(template.test_block.format(question=spec.test_question, magic=spec.magic_phrase))
    return "".join(parts)


def render_probe(question: str, magic_phrase: str = DEFAULT_MAGIC_PHRASE) -> str:
    """Zero-shot probe prompt; identical to render_fewshot with k=0."""
    return render_fewshot(
        PromptSpec(exemplars=(), test_question=question, magic_phrase=magic_phrase)
    )


def render_conversion(
    demos: Sequence[tuple[str, str, str]],
    target: tuple[str, str],
) -> str:
    """Render the style-conversion prompt.

    Each demo is a (question, manual answer, native answer) triple rendered
    as a Question / Original answer / Rewritten answer block. The target
    block ends right after "Rewritten answer:" so the model continues with
    the native-style rewrite of the target's manual answer.
    """
    if not demos:
        raise EmptyDemos("conversion prompt needs at least one demo")
    target_question, target_manual = target
    if not target_manual:
        raise PromptError("target manual answer must be non-empty")
    parts = [
        f"Question: {q}\nOriginal answer: {manual}\nRewritten answer: {native}\n\n"
        for q, manual, native in demos
    ]
    parts.append(f"Question: {target_question}\nOriginal answer: {target_manual}\nRewritten answer:")
    return "".join(parts)


def load_exemplars(path: str | Path) -> list[Exemplar]:
    """Read a line-delimited exemplar file (comment lines start with '#')."""
    out: list[Exemplar] = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        raw = json.loads(line)
        out.append(
            Exemplar(
                question=raw["question"],
                cot=raw.get("cot", ""),
                answer=str(raw["answer"]),
                style=raw.get("style", "manual"),
                id=str(raw.get("id", "")),
            )
        )
    return out


def save_exemplars(exemplars: Sequence[Exemplar], path: str | Path) -> None:
    lines = [
        json.dumps(
            {"id": e.id, "question": e.question, "cot": e.cot, "answer": e.answer, "style": e.style},
            ensure_ascii=False,
        )
        for e in exemplars
    ]
    Path(path).write_text("\n".join(lines) + ("\n" if lines else ""), encoding="utf-8")
