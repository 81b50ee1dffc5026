#!/usr/bin/env python3
"""Generate the deterministic test fixtures under tests/fixtures/.

Everything here is authored by hand or derived with plain string
arithmetic; the package code is intentionally not imported so fixtures
stay independent of the implementation they test. Re-running the script
reproduces identical files.
"""

from __future__ import annotations

import json
import re
from pathlib import Path

FIXTURES = Path(__file__).resolve().parent.parent / "tests" / "fixtures"

MAGIC = "Let's think step by step"

# stub patterns anchor on the test slot so exemplar prefixes never matter
def probe_pattern(question: str) -> str:
    return "Question: " + re.escape(question) + r"\nAnswer: " + re.escape(MAGIC) + r"\.$"


def conversion_pattern(question: str) -> str:
    return "Question: " + re.escape(question) + r"\nOriginal answer:[^\n]*\nRewritten answer:$"


# ---------------------------------------------------------------------------
# 20-item eval fixture: stub makes exactly 13 items correct (65.0 accuracy)
# ---------------------------------------------------------------------------

EVAL_ITEMS = [
    # (id, question, rationale, gold, stub_response)  -- first 13 correct
    ("e000", "Tom has 3 boxes with 4 pens each. How many pens does Tom have?",
     "3 * 4 = 12.", "12",
     "Each box has 4 pens and there are 3 boxes. 3 * 4 = 12. The answer is 12."),
    ("e001", "Mia had 10 stickers and used 4 on a card. How many stickers are left?",
     "10 - 4 = 6.", "6",
     "Mia starts with 10 stickers. She uses 4, leaving 10 - 4 = 6. The answer is 6."),
    ("e002", "A sandwich costs $3. How much do 5 sandwiches cost?",
     "5 * 3 = 15.", "15",
     "Each sandwich is $3 and there are 5. The total cost is 5 * $3 = $15. The answer is $15."),
    ("e003", "A stadium sold 1200 regular and 34 premium seats. How many seats were sold?",
     "1200 + 34 = 1234.", "1234",
     "Adding both kinds of seats gives 1200 + 34 = 1234 seats sold. The answer is 1,234."),
    ("e004", "Ben reads 2 pages, then 6 more. How many pages has he read?",
     "2 + 6 = 8.", "8",
     "The answer is 7. Wait, that is wrong: 2 + 6 = 8. The answer is 8."),
    ("e005", "Ana splits 5 meters of ribbon in half. How long is each piece in meters?",
     "5 / 2 = 2.5.", "2.5",
     "Half of 5 is 5 / 2 = 2.5 meters. The answer is 2.5."),
    ("e006", "Joy picks 4 red and 5 green apples. How many apples does she pick?",
     "4 + 5 = 9.", "9",
     "Adding them gives 4 + 5 = 9, so she picks 9 apples in total."),
    ("e007", "A train has 6 cars with 20 seats each. How many seats are on the train?",
     "6 * 20 = 120.", "120",
     "There are 6 cars and each has 20 seats. 6 * 20 = 120. The answer is 120."),
    ("e008", "Sam saves $7 a week for 8 weeks. How much does Sam save?",
     "7 * 8 = 56.", "56",
     "Saving $7 each week for 8 weeks gives 7 * 8 = 56 dollars. The answer is $56."),
    ("e009", "A jar holds 48 candies shared by 6 kids equally. How many candies each?",
     "48 / 6 = 8.", "8",
     "Sharing 48 candies among 6 kids gives 48 / 6 = 8 each. The answer is 8."),
    ("e010", "Leo runs 3 km a day. How far does he run in 9 days?",
     "3 * 9 = 27.", "27",
     "Leo covers 3 km per day for 9 days, so 3 * 9 = 27 km. The answer is 27."),
    ("e011", "A shop had 75 mugs and sold 29. How many mugs remain?",
     "75 - 29 = 46.", "46",
     "Starting from 75 mugs and selling 29 leaves 75 - 29 = 46. The answer is 46."),
    ("e012", "Nina buys 2 notebooks for $4 each and a pen for $1. What is the total cost?",
     "2 * 4 + 1 = 9.", "9",
     "Notebooks cost 2 * 4 = 8 dollars, plus 1 for the pen makes 9. The answer is 9."),
    # the remaining 7 come back wrong
    ("e013", "Ravi stacks 5 shelves with 6 books each. How many books are shelved?",
     "5 * 6 = 30.", "30",
     "There are 5 shelves of 6 books, which is 5 * 6 = 35. The answer is 35."),
    ("e014", "A baker makes 24 rolls and sells 10. How many rolls are left?",
     "24 - 10 = 14.", "14",
     "I am not sure how to work this one out."),
    ("e015", "Ky has 3 coins worth 25 cents each. How many cents does Ky have?",
     "3 * 25 = 75.", "75",
     "The answer is 75. Actually, recounting the coins gives 50. The answer is 50."),
    ("e016", "A garden has 7 rows of 8 flowers. How many flowers are there?",
     "7 * 8 = 56.", "56",
     "Rows times flowers is 7 * 8 = 54. The answer is 54."),
    ("e017", "Zoe walks 12 blocks and rides 30. How many blocks does she travel?",
     "12 + 30 = 42.", "42",
     "She travels 12 + 30 = 40 blocks in total. The answer is 40."),
    ("e018", "A crate of 60 oranges is split into bags of 5. How many bags are filled?",
     "60 / 5 = 12.", "12",
     "Splitting 60 oranges into bags of 5 gives 60 / 5 = 13 bags. The answer is 13."),
    ("e019", "Eli scores 11 points, then 9 more. How many points does Eli score?",
     "11 + 9 = 20.", "20",
     "Adding the two scores gives 11 + 9 = 21 points. The answer is 21."),
]


def write_eval_fixture() -> None:
    lines = []
    patterns = []
    for item_id, question, rationale, gold, response in EVAL_ITEMS:
        lines.append(json.dumps(
            {"id": item_id, "question": question, "answer": f"{rationale}\n#### {gold}"},
            ensure_ascii=False,
        ))
        patterns.append({"pattern": probe_pattern(question), "response": response})
    (FIXTURES / "gsm8k_test.jsonl").write_text("\n".join(lines) + "\n", encoding="utf-8")
    (FIXTURES / "stub_eval.json").write_text(
        json.dumps({"responses": {}, "patterns": patterns}, indent=2, ensure_ascii=False) + "\n",
        encoding="utf-8",
    )


# ---------------------------------------------------------------------------
# 100-item train fixture for the overwrite pipeline: ledger (97, 2, 1)
# ---------------------------------------------------------------------------

FIRST = ["Ava", "Noah", "Mila", "Liam", "Iris", "Omar", "Lena", "Kai", "Ruth", "Jude"]
LAST = ["Chen", "Patel", "Novak", "Reyes", "Kim", "Okafor", "Haas", "Silva", "Mori", "Dube"]

STAGE1_FAIL = {"t097", "t098", "t099"}  # wrong at stage 1
STAGE2_FAIL = {"t099"}  # also wrong at stage 2 -> dropped


def train_item(i: int) -> dict:
    name = f"{FIRST[i % 10]} {LAST[i // 10]}"
    a = 2 + (i % 7)
    b = 3 + (i % 5)
    shape = i % 4
    if shape == 0:
        question = f"{name} has {a} boxes with {b} pens each. How many pens does {name} have?"
        expr, answer = f"{a} * {b}", a * b
    elif shape == 1:
        question = f"{name} had {a + 10} apples and bought {b} more. How many apples does {name} have now?"
        expr, answer = f"{a + 10} + {b}", a + 10 + b
    elif shape == 2:
        question = f"{name} baked {a + 12} cookies and gave away {b}. How many cookies are left?"
        expr, answer = f"{a + 12} - {b}", a + 12 - b
    else:
        total = a * b
        question = f"{name} splits {total} marbles evenly among {b} friends. How many marbles does each friend get?"
        expr, answer = f"{total} / {b}", a
    return {
        "id": f"t{i:03d}",
        "name": name,
        "question": question,
        "expr": expr,
        "answer": answer,
    }


def write_train_fixture() -> None:
    records = [train_item(i) for i in range(100)]
    lines = []
    patterns = []
    for item in records:
        lines.append(json.dumps(
            {
                "id": item["id"],
                "question": item["question"],
                "answer": f"Compute {item['expr']} = {item['answer']}.\n#### {item['answer']}",
            },
            ensure_ascii=False,
        ))
        right = item["answer"]
        wrong = right + 1
        stage1_value = wrong if item["id"] in STAGE1_FAIL else right
        stage1 = (
            f"- {item['name']} starts from the numbers given.\n"
            f"- Compute {item['expr']} = {stage1_value}.\n"
            f"- That settles it.\n"
            f"The answer is {stage1_value}."
        )
        patterns.append({"pattern": probe_pattern(item["question"]), "response": stage1})
        if item["id"] in STAGE1_FAIL:
            stage2_value = wrong if item["id"] in STAGE2_FAIL else right
            stage2 = (
                f"{item['name']} starts from the numbers given. "
                f"Compute {item['expr']} = {stage2_value}. "
                f"The answer is {stage2_value}."
            )
            patterns.append(
                {"pattern": conversion_pattern(item["question"]), "response": stage2}
            )
    (FIXTURES / "gsm8k_train.jsonl").write_text("\n".join(lines) + "\n", encoding="utf-8")
    (FIXTURES / "stub_overwrite.json").write_text(
        json.dumps({"responses": {}, "patterns": patterns}, indent=2, ensure_ascii=False) + "\n",
        encoding="utf-8",
    )
    # the aligned 8-shot prompt: native-style exemplars for t000..t007
    exemplar_lines = []
    for item in records[:8]:
        cot = (
            f"{item['name']} starts from the numbers given.\n"
            f"Compute {item['expr']} = {item['answer']}.\n"
            f"That settles it."
        )
        exemplar_lines.append(json.dumps(
            {
                "id": item["id"],
                "question": item["question"],
                "cot": cot,
                "answer": str(item["answer"]),
                "style": "native",
            },
            ensure_ascii=False,
        ))
    (FIXTURES / "aligned8.jsonl").write_text("\n".join(exemplar_lines) + "\n", encoding="utf-8")


# ---------------------------------------------------------------------------
# AQUA and SVAMP fixtures
# ---------------------------------------------------------------------------

AQUA_ITEMS = [
    {
        "question": "A train travels 60 km in 45 minutes. What is its speed in km per hour?",
        "options": ["A) 70 km/h", "B) 75 km/h", "C) 80 km/h", "D) 85 km/h", "E) 90 km/h"],
        "rationale": "Speed = 60 / (45/60) = 80 km/h.",
        "correct": "C",
    },
    {
        "question": "If 3x + 5 = 20, what is the value of x?",
        "options": ["A) 3", "B) 5", "C) 7", "D) 9", "E) 15"],
        "rationale": "3x = 15, so x = 5.",
        "correct": "B",
    },
    {
        "question": "A shirt priced at $40 is discounted by 15%. What is the sale price?",
        "options": ["A) $32", "B) $33", "C) $34", "D) $35", "E) $36"],
        "rationale": "40 * 0.85 = 34.",
        "correct": "C",
    },
    {
        "question": "The average of 4, 8, and x is 8. What is x?",
        "options": ["A) 8", "B) 10", "C) 12", "D) 14", "E) 16"],
        "rationale": "Sum must be 24, so x = 12.",
        "correct": "C",
    },
    {
        "question": "How many distinct arrangements are there of the letters in NOON?",
        "options": ["A) 4", "B) 6", "C) 8", "D) 12", "E) 24"],
        "rationale": "4!/(2! * 2!) = 6.",
        "correct": "B",
    },
]

SVAMP_ITEMS = [
    {"Body": "Lena picked 7 flowers. Her friend picked 5 flowers.",
     "Question": "How many flowers did they pick together?",
     "Equation": "( 7 + 5 )", "Answer": 12.0},
    {"Body": "A box holds 36 crayons divided into 4 equal groups.",
     "Question": "How many crayons are in each group?",
     "Equation": "( 36 / 4 )", "Answer": 9.0},
    {"Body": "Marco had 15 toy cars and lost 6 of them.",
     "Question": "How many toy cars does Marco have now?",
     "Equation": "( 15 - 6 )", "Answer": 9.0},
    {"Body": "Each shelf holds 8 books and there are 7 shelves.",
     "Question": "How many books fit on the shelves?",
     "Equation": "( 8 * 7 )", "Answer": 56.0},
]


def write_other_datasets() -> None:
    lines = [json.dumps(item, ensure_ascii=False) for item in AQUA_ITEMS]
    (FIXTURES / "aqua_test.jsonl").write_text("\n".join(lines) + "\n", encoding="utf-8")
    (FIXTURES / "svamp_test.json").write_text(
        json.dumps(SVAMP_ITEMS, indent=2, ensure_ascii=False) + "\n", encoding="utf-8"
    )


# ---------------------------------------------------------------------------
# 60-item hand-labeled extraction corpus
# ---------------------------------------------------------------------------

CORPUS = [
    # --- numeric: currency, commas, decimals, self-corrections (26) ---
    ("Natalia sold 48 clips in April. In May she sold half as many, 48 / 2 = 24. In total she sold 48 + 24 = 72 clips. The answer is 72.", "numeric", "numeric", "72"),
    ("The farmer has 3 * 15 = 45 rows. Each row gives 20 carrots, so 45 * 20 = 900. The answer is 900.", "numeric", "numeric", "900"),
    ("Weng earned 12 * 50 / 60 = 10. The answer is $10.", "numeric", "numeric", "10"),
    ("Each ticket is $12.50, so 4 tickets cost 4 * 12.50 = $50.00. The answer is $50.00.", "numeric", "numeric", "50"),
    ("Betty needs 100 - 40 = 60 more. Her parents give 15 and grandparents 30, so 60 - 45 = 15. The answer is 15.", "numeric", "numeric", "15"),
    ("Revenue was 1,200 + 340 = 1,540 dollars. The answer is 1,540.", "numeric", "numeric", "1540"),
    ("He bought 2,000 staples and used 1,250, leaving 750. The answer is 750.", "numeric", "numeric", "750"),
    ("The answer is 6. Hmm wait, 3 * 3 = 9, so the answer is 9.", "numeric", "numeric", "9"),
    ("First I get 17. Let me double check: 8 + 8 = 16, plus 1 is 17. The answer is 17.", "numeric", "numeric", "17"),
    ("The discount is 20% of $45, which is $9. The final price is 45 - 9 = 36 dollars. The answer is $36.", "numeric", "numeric", "36"),
    ("The answer is -3.", "numeric", "numeric", "-3"),
    ("Temperature dropped from 4 to -5, a change of 9 degrees. The answer is 9.", "numeric", "numeric", "9"),
    ("Total = 0.25 * 8 = 2. The answer is 2.", "numeric", "numeric", "2"),
    ("She walks 1.5 + 2.5 = 4 kilometers. The answer is 4.", "numeric", "numeric", "4"),
    ("The answer is 18.50.", "numeric", "numeric", "18.5"),
    ("Milk costs $3, bread $2, eggs $4; total 3 + 2 + 4 = 9. The answer is 9.", "numeric", "numeric", "9"),
    ("So he needs 96 / 8 = 12 boxes. The answer is 12.", "numeric", "numeric", "12"),
    ("Answer: 42", "numeric", "numeric", "42"),
    ("After the refund his balance is $1,034.00. There is nothing else to subtract, so that is the result.", "numeric", "numeric", "1034"),
    ("5 + 13 = 18", "numeric", "numeric", "18"),
    ("The total comes to 7 apples, or maybe 8 if we count the bruised one. 7 + 1 = 8.", "numeric", "numeric", "8"),
    ("The answer is 3,000.", "numeric", "numeric", "3000"),
    ("Each minute he walks 90 meters, so in 12 minutes he covers 90 * 12 = 1080 meters. The answer is 1080 meters.", "numeric", "numeric", "1080"),
    ("The answer is 25%.", "numeric", "numeric", "25"),
    ("The answer is approximately 3.14.", "numeric", "numeric", "3.14"),
    ("Cost: $0.50 per unit; total for 100 units is $50. The answer is 50.", "numeric", "numeric", "50"),
    # --- choice: parentheses, colons, lowercase, self-corrections (22) ---
    ("Area = 6 * 4 = 24, which matches option (B). The answer is (B).", "choice", "choice", "B"),
    ("The answer is C.", "choice", "choice", "C"),
    ("Comparing the values shows choice D is largest. The answer is D.", "choice", "choice", "D"),
    ("answer: E", "choice", "choice", "E"),
    ("The answer is option (A).", "choice", "choice", "A"),
    ("The correct choice is B. The answer is B.", "choice", "choice", "B"),
    ("The answer is b.", "choice", "choice", "B"),
    ("I calculate 45 km/h, so the answer is (C).", "choice", "choice", "C"),
    ("The answer is A. Actually, re-checking the units, the answer is D.", "choice", "choice", "D"),
    ("The answer is: B.", "choice", "choice", "B"),
    ("Let me compute 3/4 of 200 = 150. That is option C.", "choice", "choice", "C"),
    ("Option E gives 720 which matches. The answer is E.", "choice", "choice", "E"),
    ("The ratio simplifies to 2:3, answer is (D).", "choice", "choice", "D"),
    ("The answer is (A) 42.", "choice", "choice", "A"),
    ("B", "choice", "choice", "B"),
    ("It must be E since all others fail. The answer is E.", "choice", "choice", "E"),
    ("The answer is D because 7 * 8 = 56.", "choice", "choice", "D"),
    ("After checking each option, (B) holds. The answer is B.", "choice", "choice", "B"),
    ("Answer: (C)", "choice", "choice", "C"),
    ("The speed is 60 mph, so the option is A", "choice", "choice", "A"),
    ("The answer is C, final answer C.", "choice", "choice", "C"),
    ("Eliminate A and B; C is too small; hence D. The answer is D.", "choice", "choice", "D"),
    # --- no extractable answer (12) ---
    ("", "numeric", "none", None),
    ("I'm not sure how to approach this problem.", "numeric", "none", None),
    ("Let's think about it differently.", "numeric", "none", None),
    ("The problem cannot be solved without more information.", "numeric", "none", None),
    ("I need to know the price first.", "numeric", "none", None),
    ("Sorry, I cannot determine this.", "choice", "none", None),
    ("There is no valid option given.", "choice", "none", None),
    ("Hmm.", "numeric", "none", None),
    ("The result depends on unknown factors.", "choice", "none", None),
    ("No numeric value can be concluded.", "numeric", "none", None),
    ("abcde", "choice", "none", None),
    ("pi", "numeric", "none", None),
]


def write_corpus() -> None:
    lines = []
    for generation, answer_kind, expected_kind, expected_value in CORPUS:
        lines.append(json.dumps(
            {
                "generation": generation,
                "answer_kind": answer_kind,
                "expected_kind": expected_kind,
                "expected_value": expected_value,
            },
            ensure_ascii=False,
        ))
    (FIXTURES / "extraction_corpus.jsonl").write_text("\n".join(lines) + "\n", encoding="utf-8")


# ---------------------------------------------------------------------------
# Ablation exemplar variants: same questions, cot/answer bytes differ
# ---------------------------------------------------------------------------

VARIANT_QUESTIONS = [
    ("v000", "Cora counts 4 nests with 3 eggs each. How many eggs does she count?", "12",
     "4 * 3"),
    ("v001", "Theo stacks 18 plates and removes 5. How many plates remain?", "13",
     "18 - 5"),
    ("v002", "A pack of 6 juice boxes costs $9. How much do 2 packs cost?", "18",
     "9 * 2"),
    ("v003", "Nia plants 21 seeds in rows of 7. How many rows does she plant?", "3",
     "21 / 7"),
]


def write_variants() -> None:
    # The files must differ ONLY in cot/answer bytes, so no style field:
    # question text and exemplar count are pinned across all five variants.
    directory = FIXTURES / "variants"
    directory.mkdir(parents=True, exist_ok=True)

    def rows(make_cot_answer):
        lines = []
        for vid, question, answer, expr in VARIANT_QUESTIONS:
            cot, out_answer = make_cot_answer(answer, expr)
            lines.append(json.dumps(
                {"id": vid, "question": question, "cot": cot, "answer": out_answer},
                ensure_ascii=False,
            ))
        return "\n".join(lines) + "\n"

    # manual: handcrafted single-line rationales
    (directory / "manual.jsonl").write_text(
        rows(lambda ans, expr: (f"We compute {expr} = {ans} directly.", ans)),
        encoding="utf-8",
    )
    # probed: raw native output, bullets kept, one wrong value (v001 off by one)
    def probed(ans, expr):
        value = str(int(ans) + 1) if expr.startswith("18") else ans
        return (f"- Start from the question.\n- Work out {expr} = {value}.", value)
    (directory / "probed.jsonl").write_text(rows(probed), encoding="utf-8")
    # proofread: values corrected, bullets kept
    (directory / "proofread.jsonl").write_text(
        rows(lambda ans, expr: (f"- Start from the question.\n- Work out {expr} = {ans}.", ans)),
        encoding="utf-8",
    )
    # formatted: bullets stripped, the probed wrong value kept (no human pass)
    def formatted(ans, expr):
        value = str(int(ans) + 1) if expr.startswith("18") else ans
        return (f"Start from the question.\nWork out {expr} = {value}.", value)
    (directory / "formatted.jsonl").write_text(rows(formatted), encoding="utf-8")
    # aligned: corrected and formatted
    (directory / "aligned.jsonl").write_text(
        rows(lambda ans, expr: (f"Start from the question.\nWork out {expr} = {ans}.", ans)),
        encoding="utf-8",
    )


# ---------------------------------------------------------------------------
# Frontend service fixtures: wrong probes + continuation stub for the UI
# round-trip test against a real `aligncot proofread serve` process
# ---------------------------------------------------------------------------

CONTINUATION_INSTRUCTION = "Continue the solution from exactly where it stops."


def write_frontend_fixtures() -> None:
    directory = FIXTURES.parent.parent / "frontend" / "test" / "fixtures"
    directory.mkdir(parents=True, exist_ok=True)
    probes = []
    patterns = []
    for i in range(3):
        item = train_item(i)
        right = item["answer"]
        wrong = right + 1
        probes.append(json.dumps(
            {
                "question_id": item["id"],
                "question": item["question"],
                "gold": {"kind": "numeric", "value": str(right)},
                "raw_generation": f"- Work out {item['expr']} = {wrong}.\nThe answer is {wrong}.",
                "extracted": {"kind": "numeric", "value": str(wrong), "span": None},
                "correct_vs_gold": False,
                "model": "test-model",
                "created_at": "2026-01-01T00:00:00+00:00",
                "error": None,
            },
            ensure_ascii=False,
        ))
        patterns.append({
            "pattern": (
                re.escape(item["question"])
                + r"[\s\S]*= " + re.escape(str(right)) + r"\.\n\n"
                + re.escape(CONTINUATION_INSTRUCTION) + "$"
            ),
            "response": f"\nThe answer is {right}.",
        })
    (directory / "probes.jsonl").write_text("\n".join(probes) + "\n", encoding="utf-8")
    (directory / "stub_serve.json").write_text(
        json.dumps({"responses": {}, "patterns": patterns}, indent=2, ensure_ascii=False) + "\n",
        encoding="utf-8",
    )


def main() -> None:
    FIXTURES.mkdir(parents=True, exist_ok=True)
    write_eval_fixture()
    write_train_fixture()
    write_other_datasets()
    write_corpus()
    write_variants()
    write_frontend_fixtures()
    print(f"fixtures written under {FIXTURES}")


if __name__ == "__main__":
    main()
