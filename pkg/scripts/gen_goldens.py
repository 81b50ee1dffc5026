#!/usr/bin/env python3
"""Write the golden prompt files under tests/goldens/.

The strings are assembled here with plain concatenation, independently of
the prompting module, so the byte-match tests compare two separate
implementations of the template contract.
"""

from __future__ import annotations

import json
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
GOLDENS = ROOT / "tests" / "goldens"

MAGIC = "Let's think step by step"

TEST_QUESTION = "Tina buys 3 pencils for 2 dollars each. How much does she spend?"


def exemplar_block(question: str, cot: str, answer: str) -> str:
    return (
        "Question: " + question + "\n"
        "Answer: " + MAGIC + ". " + cot + " The answer is " + answer + ".\n\n"
    )


def test_block(question: str) -> str:
    return "Question: " + question + "\nAnswer: " + MAGIC + "."


def load_jsonl(path: Path) -> list[dict]:
    return [json.loads(line) for line in path.read_text(encoding="utf-8").splitlines() if line.strip()]


def main() -> None:
    GOLDENS.mkdir(parents=True, exist_ok=True)

    # zero-shot probe
    (GOLDENS / "probe.txt").write_text(test_block(TEST_QUESTION), encoding="utf-8")

    # vanilla 8-shot
    cot8 = load_jsonl(ROOT / "prompts" / "cot8.jsonl")
    assert len(cot8) == 8
    fewshot = "".join(exemplar_block(e["question"], e["cot"], e["answer"]) for e in cot8)
    (GOLDENS / "fewshot_cot8.txt").write_text(fewshot + test_block(TEST_QUESTION), encoding="utf-8")

    # one 9-step complexity-style exemplar, 1-shot
    complex9 = load_jsonl(ROOT / "prompts" / "complex9.jsonl")
    first = complex9[0]
    assert sum(1 for ln in first["cot"].splitlines() if ln.strip()) == 9
    (GOLDENS / "complex9_exemplar.txt").write_text(
        exemplar_block(first["question"], first["cot"], first["answer"]) + test_block(TEST_QUESTION),
        encoding="utf-8",
    )

    # style-conversion prompt: one demo plus the target block
    demo_question = "Jason had 20 lollipops. He gave Denny some lollipops. Now Jason has 12 lollipops. How many lollipops did Jason give to Denny?"
    demo_manual = "Jason had 20 lollipops. Since he has 12 now, he must have given Denny 20 - 12 = 8 lollipops. The answer is 8."
    demo_native = "Jason starts with 20 lollipops.\nHe ends with 12 lollipops.\nSo he gave away 20 - 12 = 8. The answer is 8."
    target_manual = "3 pencils at 2 dollars each cost 3 * 2 = 6 dollars. The answer is 6."
    conversion = (
        "Question: " + demo_question + "\n"
        "Original answer: " + demo_manual + "\n"
        "Rewritten answer: " + demo_native + "\n\n"
        "Question: " + TEST_QUESTION + "\n"
        "Original answer: " + target_manual + "\n"
        "Rewritten answer:"
    )
    (GOLDENS / "conversion.txt").write_text(conversion, encoding="utf-8")
    print(f"goldens written under {GOLDENS}")


if __name__ == "__main__":
    main()
