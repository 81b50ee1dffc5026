"""Loaders for the GSM8K, AQUA, and SVAMP math-word-problem datasets.

Each loader maps raw records (line-delimited JSON or a single JSON array)
onto the uniform :class:`ProblemRecord`, parsing the gold answer into a
:class:`GoldAnswer` at load time so that downstream correctness checks
never touch source-format quirks again.

Source formats:
  gsm8k  {question, answer}            gold follows the final "####"
  aqua   {question, options, rationale, correct}
  svamp  {Body, Question, Equation, Answer}   question = Body + " " + Question
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

from .canonical import canonical_choice, canonical_number

DATASETS = ("gsm8k", "aqua", "svamp")
SPLITS = ("train", "test")

GSM8K_DELIMITER = "####"


class DatasetError(Exception):
    """Base class for dataset loading failures."""


class UnknownDataset(DatasetError):
    def __init__(self, dataset: str):
        super().__init__(f"unknown dataset tag: {dataset!r} (expected one of {DATASETS})")
        self.dataset = dataset


class MalformedRecord(DatasetError):
    def __init__(self, line_no: int, reason: str):
        super().__init__(f"line {line_no}: {reason}")
        self.line_no = line_no
        self.reason = reason


class MissingGoldAnswer(DatasetError):
    def __init__(self, record_id: str):
        super().__init__(f"record {record_id} has no gold answer")
        self.record_id = record_id


class NoDelimiterFound(DatasetError):
    pass


class NonNumericGold(DatasetError):
    pass


class InvalidChoiceLetter(DatasetError):
    pass


@dataclass(frozen=True)
class GoldAnswer:
    """Normalized target answer: an exact decimal string or a choice letter."""

    kind: str  # "numeric" | "choice"
    value: str

    @staticmethod
    def numeric(raw: str) -> "GoldAnswer":
        value = canonical_number(str(raw))
        if value is None:
            raise NonNumericGold(f"cannot canonicalize numeric gold: {raw!r}")
        return GoldAnswer(kind="numeric", value=value)

    @staticmethod
    def choice(raw: str) -> "GoldAnswer":
        letter = canonical_choice(str(raw))
        if letter is None:
            raise InvalidChoiceLetter(f"not a choice letter A-E: {raw!r}")
        return GoldAnswer(kind="choice", value=letter)


@dataclass(frozen=True)
class ProblemRecord:
    id: str
    question: str
    gold_rationale: str
    gold: GoldAnswer
    options: tuple[str, ...] = field(default_factory=tuple)
    split: str = "test"
    dataset: str = "gsm8k"

    @property
    def answer_kind(self) -> str:
        return self.gold.kind


def parse_gold(raw_answer_text: str, dataset: str) -> GoldAnswer:
    """Parse a dataset's raw answer text into a :class:`GoldAnswer`.

    gsm8k: the token following the final "####" delimiter; svamp: the
    numeric field as given; aqua: the correct-choice letter.
    """
    if not raw_answer_text or not str(raw_answer_text).strip():
        raise MissingGoldAnswer("<raw>")
    text = str(raw_answer_text)
    if dataset == "gsm8k":
        if GSM8K_DELIMITER not in text:
            raise NoDelimiterFound(f"no {GSM8K_DELIMITER!r} delimiter in answer text")
        tail = text.rsplit(GSM8K_DELIMITER, 1)[1].strip()
        token = tail.split()[0] if tail.split() else ""
        return GoldAnswer.numeric(token)
    if dataset == "svamp":
        return GoldAnswer.numeric(text)
    if dataset == "aqua":
        return GoldAnswer.choice(text)
    raise UnknownDataset(dataset)


def _iter_raw_records(path: Path) -> Iterable[tuple[int, dict]]:
    """Yield (line_no, record) pairs from JSONL or a single JSON array."""
    text = path.read_text(encoding="utf-8")
    stripped = text.lstrip()
    if stripped.startswith("["):
        try:
            items = json.loads(text)
        except json.JSONDecodeError as exc:
            raise MalformedRecord(exc.lineno, f"invalid JSON array: {exc.msg}") from exc
        for i, item in enumerate(items, start=1):
            if not isinstance(item, dict):
                raise MalformedRecord(i, "array element is not an object")
            yield i, item
        return
    for line_no, line in enumerate(text.splitlines(), start=1):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise MalformedRecord(line_no, f"invalid JSON: {exc.msg}") from exc
        if not isinstance(record, dict):
            raise MalformedRecord(line_no, "record is not an object")
        yield line_no, record


def _require(record: dict, key: str, line_no: int) -> object:
    if key not in record:
        raise MalformedRecord(line_no, f"missing field {key!r}")
    return record[key]


def load_dataset(
    path: str | Path,
    dataset: str,
    split: str = "test",
    limit: int | None = None,
) -> list[ProblemRecord]:
    """Load *path* as *dataset* records, preserving file order.

    Every raw record yields exactly one ProblemRecord or raises a
    positioned error. ``limit`` truncates after N records (fixture
    subsetting; ``None`` loads everything).
    """
    if dataset not in DATASETS:
        raise UnknownDataset(dataset)
    path = Path(path)
    records: list[ProblemRecord] = []
    for line_no, raw in _iter_raw_records(path):
        if limit is not None and len(records) >= limit:
            break
        records.append(_parse_record(raw, dataset, split, line_no))
    ids = [r.id for r in records]
    if len(set(ids)) != len(ids):
        raise MalformedRecord(0, f"duplicate record ids in {path}")
    return records


def _parse_record(raw: dict, dataset: str, split: str, line_no: int) -> ProblemRecord:
    rid = str(raw.get("id", f"{dataset}-{split}-{line_no:05d}"))
    if dataset == "gsm8k":
        question = str(_require(raw, "question", line_no))
        answer_text = str(_require(raw, "answer", line_no))
        if not answer_text.strip():
            raise MissingGoldAnswer(rid)
        try:
            gold = parse_gold(answer_text, "gsm8k")
        except (NoDelimiterFound, NonNumericGold) as exc:
            raise MalformedRecord(line_no, str(exc)) from exc
        rationale = answer_text.rsplit(GSM8K_DELIMITER, 1)[0].strip()
        return ProblemRecord(rid, question, rationale, gold, (), split, dataset)
    if dataset == "aqua":
        question = str(_require(raw, "question", line_no))
        options = tuple(str(o) for o in _require(raw, "options", line_no))
        rationale = str(raw.get("rationale", ""))
        correct = str(_require(raw, "correct", line_no))
        if not correct.strip():
            raise MissingGoldAnswer(rid)
        try:
            gold = parse_gold(correct, "aqua")
        except InvalidChoiceLetter as exc:
            raise MalformedRecord(line_no, str(exc)) from exc
        if not options:
            raise MalformedRecord(line_no, "aqua record has no options")
        index = ord(gold.value) - ord("A")
        if index >= len(options):
            raise MalformedRecord(
                line_no, f"choice {gold.value} outside option count {len(options)}"
            )
        return ProblemRecord(rid, question, rationale, gold, options, split, dataset)
    if dataset == "svamp":
        body = str(_require(raw, "Body", line_no)).strip()
        question_part = str(_require(raw, "Question", line_no)).strip()
        question = f"{body} {question_part}" if body else question_part
        equation = str(raw.get("Equation", ""))
        answer = _require(raw, "Answer", line_no)
        if answer is None or str(answer).strip() == "":
            raise MissingGoldAnswer(rid)
        try:
            gold = parse_gold(str(answer), "svamp")
        except NonNumericGold as exc:
            raise MalformedRecord(line_no, str(exc)) from exc
        return ProblemRecord(rid, question, equation, gold, (), split, dataset)
    raise UnknownDataset(dataset)


def dump_records(records: list[ProblemRecord], path: str | Path) -> None:
    """Write records back in their source schema (JSONL), one per line.

    load_dataset(dump_records(rs)) == rs for any loadable fixture.
    """
    path = Path(path)
    lines = []
    for r in records:
        if r.dataset == "gsm8k":
            answer = (
                f"{r.gold_rationale}\n{GSM8K_DELIMITER} {r.gold.value}"
                if r.gold_rationale
                else f"{GSM8K_DELIMITER} {r.gold.value}"
            )
            raw = {"id": r.id, "question": r.question, "answer": answer}
        elif r.dataset == "aqua":
            raw = {
                "id": r.id,
                "question": r.question,
                "options": list(r.options),
                "rationale": r.gold_rationale,
                "correct": r.gold.value,
            }
        elif r.dataset == "svamp":
            raw = {
                "id": r.id,
                "Body": "",
                "Question": r.question,
                "Equation": r.gold_rationale,
                "Answer": r.gold.value,
            }
        else:
            raise UnknownDataset(r.dataset)
        lines.append(json.dumps(raw, ensure_ascii=False))
    path.write_text("\n".join(lines) + ("\n" if lines else ""), encoding="utf-8")
