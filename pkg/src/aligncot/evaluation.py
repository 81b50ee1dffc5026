"""Experiment cells: prompt method x example pool x dataset -> accuracy.

run_eval drives one cell with greedy decoding, persisting per-item
records incrementally so interrupted runs resume from disk (and from the
gateway cache). ablation_grid maps the probing/proofreading/formatting
flag combinations onto exemplar-variant prompt files and runs each cell.
"""

from __future__ import annotations

import json
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from pathlib import Path
from typing import Sequence

from .dataset import ProblemRecord, load_dataset
from .extraction import ExtractedAnswer, extract, is_correct
from .gateway import CompletionRequest, Gateway, GatewayError, cache_key
from .prompting import (
    DEFAULT_MAGIC_PHRASE,
    DEFAULT_TEMPLATE,
    PromptSpec,
    load_exemplars,
    render_fewshot,
)
from .selection import (
    ExamplePool,
    ensure_embeddings,
    exemplars_by_id,
    load_pool,
    select_complex,
    select_random,
    select_similar,
)

# Exemplar variants for the ablation flags (probing, proofreading, formatting).
VARIANT_FILES: dict[tuple[bool, bool, bool], str] = {
    (False, False, False): "manual.jsonl",
    (True, False, False): "probed.jsonl",
    (True, True, False): "proofread.jsonl",
    (True, False, True): "formatted.jsonl",
    (True, True, True): "aligned.jsonl",
}

FAILURE_COMPARABILITY_THRESHOLD = 0.01


class EvalError(Exception):
    pass


class MissingVariant(EvalError):
    def __init__(self, flags: tuple[bool, bool, bool], reason: str):
        super().__init__(f"no exemplar variant for flags {flags}: {reason}")
        self.flags = flags


@dataclass(frozen=True)
class PromptSource:
    kind: str  # "fixed" | "strategy"
    file: str | None = None
    strategy: str | None = None  # random | complexity | similarity
    pool: str | None = None
    pool_source: str = "original"
    k: int = 8

    def __post_init__(self):
        if self.kind not in ("fixed", "strategy"):
            raise EvalError(f"prompt source kind must be fixed|strategy, got {self.kind!r}")
        if self.kind == "fixed" and not self.file:
            raise EvalError("fixed prompt source needs a file")
        if self.kind == "strategy" and (not self.strategy or not self.pool):
            raise EvalError("strategy prompt source needs strategy and pool")


@dataclass(frozen=True)
class EvalConfig:
    dataset: str
    data_path: str
    model: str
    prompt_source: PromptSource
    split: str = "test"
    temperature: float = 0.0
    workers: int = 1
    limit: int | None = None
    seed: int = 0
    template: str = DEFAULT_TEMPLATE
    magic_phrase: str = DEFAULT_MAGIC_PHRASE
    max_tokens: int = 1024
    label: str = ""

    def __post_init__(self):
        if self.temperature != 0:
            warnings.warn(
                f"temperature {self.temperature} overrides greedy decoding; "
                "results are not comparable to greedy baselines"
            )

    def to_dict(self) -> dict:
        d = {
            "dataset": self.dataset,
            "data_path": self.data_path,
            "model": self.model,
            "split": self.split,
            "temperature": self.temperature,
            "workers": self.workers,
            "limit": self.limit,
            "seed": self.seed,
            "template": self.template,
            "magic_phrase": self.magic_phrase,
            "max_tokens": self.max_tokens,
            "label": self.label,
            "prompt_source": {
                "kind": self.prompt_source.kind,
                "file": self.prompt_source.file,
                "strategy": self.prompt_source.strategy,
                "pool": self.prompt_source.pool,
                "pool_source": self.prompt_source.pool_source,
                "k": self.prompt_source.k,
            },
        }
        return d


@dataclass(frozen=True)
class PerItem:
    id: str
    prompt_digest: str
    generation: str
    extracted: ExtractedAnswer
    correct: bool
    error: str | None = None

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "prompt_digest": self.prompt_digest,
            "generation": self.generation,
            "extracted": {"kind": self.extracted.kind, "value": self.extracted.value},
            "correct": self.correct,
            "error": self.error,
        }

    @staticmethod
    def from_dict(raw: dict) -> "PerItem":
        ext = raw.get("extracted") or {}
        return PerItem(
            id=str(raw["id"]),
            prompt_digest=raw.get("prompt_digest", ""),
            generation=raw.get("generation", ""),
            extracted=ExtractedAnswer(kind=ext.get("kind", "none"), value=ext.get("value")),
            correct=bool(raw.get("correct", False)),
            error=raw.get("error"),
        )


@dataclass
class EvalRun:
    config: EvalConfig
    per_item: list[PerItem] = field(default_factory=list)
    started: str = ""
    finished: str = ""

    @property
    def evaluated_count(self) -> int:
        return sum(1 for item in self.per_item if item.error is None)

    @property
    def correct_count(self) -> int:
        return sum(1 for item in self.per_item if item.error is None and item.correct)

    @property
    def failure_count(self) -> int:
        return sum(1 for item in self.per_item if item.error is not None)

    @property
    def accuracy(self) -> float | None:
        if self.evaluated_count == 0:
            return None
        return 100.0 * self.correct_count / self.evaluated_count

    @property
    def accuracy_display(self) -> str:
        return "n/a" if self.accuracy is None else f"{self.accuracy:.1f}"

    @property
    def non_comparable(self) -> bool:
        total = len(self.per_item)
        return total > 0 and self.failure_count / total > FAILURE_COMPARABILITY_THRESHOLD

    def summary(self) -> dict:
        return {
            "config": self.config.to_dict(),
            "accuracy": self.accuracy,
            "accuracy_display": self.accuracy_display,
            "evaluated_count": self.evaluated_count,
            "correct_count": self.correct_count,
            "failure_count": self.failure_count,
            "non_comparable": self.non_comparable,
            "started": self.started,
            "finished": self.finished,
        }


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


class _PromptBuilder:
    """Resolve the per-item prompt from the configured source."""

    def __init__(self, config: EvalConfig, gateway: Gateway):
        self.config = config
        source = config.prompt_source
        self._pool: ExamplePool | None = None
        self._fixed_spec: PromptSpec | None = None
        self._gateway = gateway
        if source.kind == "fixed":
            exemplars = tuple(load_exemplars(source.file))
            self._fixed_spec = PromptSpec(
                exemplars=exemplars,
                template=config.template,
                magic_phrase=config.magic_phrase,
            )
        else:
            pool = load_pool(source.pool, source=source.pool_source)
            if source.strategy == "similarity":
                pool = ensure_embeddings(pool, gateway)
            self._pool = pool
            if source.strategy == "random":
                result = select_random(pool, source.k, config.seed)
                self._fixed_spec = self._spec_from_ids(result.chosen_ids)
            elif source.strategy == "complexity":
                result = select_complex(pool, source.k)
                self._fixed_spec = self._spec_from_ids(result.chosen_ids)
            elif source.strategy != "similarity":
                raise EvalError(f"unknown strategy {source.strategy!r}")

    def _spec_from_ids(self, ids: Sequence[str]) -> PromptSpec:
        return PromptSpec(
            exemplars=tuple(exemplars_by_id(self._pool, ids)),
            template=self.config.template,
            magic_phrase=self.config.magic_phrase,
        )

    def spec_for(self, record: ProblemRecord) -> PromptSpec:
        if self._fixed_spec is not None:
            return self._fixed_spec.with_test_question(record.question)
        # per-item similarity retrieval: fresh k-shot for every test case
        result = select_similar(
            self._pool, record.question, self.config.prompt_source.k, gateway=self._gateway
        )
        return self._spec_from_ids(result.chosen_ids).with_test_question(record.question)


def run_eval(config: EvalConfig, gateway: Gateway, out_dir: str | Path) -> EvalRun:
    """Evaluate one experiment cell; per-item records persist incrementally."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    per_item_path = out / "per_item.jsonl"

    records = load_dataset(config.data_path, config.dataset, config.split, limit=config.limit)
    builder = _PromptBuilder(config, gateway)

    done: dict[str, PerItem] = {}
    if per_item_path.exists():
        for line in per_item_path.read_text(encoding="utf-8").splitlines():
            try:
                item = PerItem.from_dict(json.loads(line))
            except json.JSONDecodeError:
                continue
            done.setdefault(item.id, item)

    run = EvalRun(config=config, started=_now())

    def one(record: ProblemRecord) -> PerItem:
        spec = builder.spec_for(record)
        prompt = render_fewshot(spec)
        request = CompletionRequest.user(
            config.model, prompt, temperature=config.temperature, max_tokens=config.max_tokens
        )
        digest = cache_key(request)
        try:
            generation = gateway.complete(request).text
        except GatewayError as exc:
            return PerItem(record.id, digest, "", ExtractedAnswer.none(), False, error=str(exc))
        extracted = extract(generation, record.answer_kind)
        return PerItem(
            record.id, digest, generation, extracted,
            is_correct(extracted, record.gold),
        )

    pending = [r for r in records if r.id not in done]
    fresh: dict[str, PerItem] = {}
    if config.workers > 1 and pending:
        with ThreadPoolExecutor(max_workers=config.workers) as executor:
            for item in executor.map(one, pending):
                fresh[item.id] = item
    else:
        for record in pending:
            fresh[record.id] = one(record)

    with open(per_item_path, "a", encoding="utf-8") as fh:
        for record in records:
            if record.id in done:
                run.per_item.append(done[record.id])
            else:
                item = fresh[record.id]
                fh.write(json.dumps(item.to_dict(), ensure_ascii=False) + "\n")
                fh.flush()
                run.per_item.append(item)

    run.finished = _now()
    (out / "summary.json").write_text(
        json.dumps(run.summary(), indent=2, ensure_ascii=False) + "\n", encoding="utf-8"
    )
    return run


def flags_to_variant(
    flags: tuple[bool, bool, bool], variants_dir: str | Path
) -> Path:
    """Map (probing, proofreading, formatting) flags to their exemplar file."""
    if flags not in VARIANT_FILES:
        probing = flags[0]
        need = "proofreading" if flags[1] else "formatting"
        reason = (
            f"{need} requires probing output"
            if not probing
            else "no such flag combination"
        )
        raise MissingVariant(flags, reason)
    path = Path(variants_dir) / VARIANT_FILES[flags]
    if not path.exists():
        raise MissingVariant(flags, f"variant file {path} does not exist")
    return path


@dataclass(frozen=True)
class AblationCell:
    flags: tuple[bool, bool, bool]
    run: EvalRun
    delta: float | None


def ablation_grid(
    base: EvalConfig,
    cells: Sequence[tuple[bool, bool, bool]],
    variants_dir: str | Path,
    gateway: Gateway,
    out_dir: str | Path,
) -> list[AblationCell]:
    """One EvalRun per flag combination; deltas against the all-off cell."""
    if not cells:
        raise EvalError("ablation grid needs at least one cell")
    paths = {flags: flags_to_variant(flags, variants_dir) for flags in cells}
    out = Path(out_dir)
    runs: dict[tuple[bool, bool, bool], EvalRun] = {}
    for flags in cells:
        label = "".join("T" if f else "F" for f in flags)
        cell_config = replace(
            base,
            prompt_source=PromptSource(kind="fixed", file=str(paths[flags])),
            label=f"ablation-{label}",
        )
        runs[flags] = run_eval(cell_config, gateway, out / label)
    baseline_flags = (False, False, False) if (False, False, False) in runs else cells[0]
    baseline = runs[baseline_flags].accuracy
    report = []
    for flags in cells:
        accuracy = runs[flags].accuracy
        delta = None
        if accuracy is not None and baseline is not None:
            delta = accuracy - baseline
        report.append(AblationCell(flags=flags, run=runs[flags], delta=delta))
    return report


def render_ablation_report(cells: list[AblationCell]) -> str:
    lines = ["Probing  Proofreading  Formatting  Accuracy  Delta"]
    for cell in cells:
        marks = ["yes" if f else "no " for f in cell.flags]
        delta = "" if cell.delta is None else f"{cell.delta:+.1f}"
        lines.append(
            f"{marks[0]:<7}  {marks[1]:<12}  {marks[2]:<10}  "
            f"{cell.run.accuracy_display:>8}  {delta}"
        )
    return "\n".join(lines)


def compare_report(runs: list[EvalRun]) -> tuple[str, dict]:
    """Rows per run; delta column against the first run (baseline)."""
    if not runs:
        raise EvalError("compare_report needs at least one run")
    baseline = runs[0].accuracy
    rows = []
    for position, run in enumerate(runs):
        source = run.config.prompt_source
        method = source.strategy if source.kind == "strategy" else f"fixed:{Path(source.file).stem}"
        pool = Path(source.pool).stem if source.pool else "-"
        delta = None
        if position > 0 and run.accuracy is not None and baseline is not None:
            delta = run.accuracy - baseline
        rows.append(
            {
                "label": run.config.label or method,
                "dataset": run.config.dataset,
                "method": method,
                "pool": pool,
                "accuracy": run.accuracy,
                "accuracy_display": run.accuracy_display,
                "delta": delta,
            }
        )
    header = ["dataset", "method", "pool", "accuracy"]
    with_delta = len(runs) > 1
    if with_delta:
        header.append("delta")
    lines = ["  ".join(f"{h:<12}" for h in header)]
    for row in rows:
        cells = [row["dataset"], row["method"], row["pool"], row["accuracy_display"]]
        if with_delta:
            cells.append("" if row["delta"] is None else f"{row['delta']:+.1f}")
        lines.append("  ".join(f"{str(c):<12}" for c in cells))
    return "\n".join(lines), {"rows": rows}


def config_from_toml(path: str | Path) -> EvalConfig:
    try:
        import tomllib
    except ModuleNotFoundError:  # Python < 3.11
        import tomli as tomllib
    with open(path, "rb") as fh:
        data = tomllib.load(fh)
    run = data.get("run", {})
    prompt = data.get("prompt", {})
    source = PromptSource(
        kind=prompt.get("source", "fixed"),
        file=prompt.get("file"),
        strategy=prompt.get("strategy"),
        pool=prompt.get("pool"),
        pool_source=prompt.get("pool_source", "original"),
        k=int(prompt.get("k", 8)),
    )
    return EvalConfig(
        dataset=run["dataset"],
        data_path=run["data"],
        model=run.get("model", "gpt-3.5-turbo"),
        prompt_source=source,
        split=run.get("split", "test"),
        temperature=float(run.get("temperature", 0.0)),
        workers=int(run.get("workers", 1)),
        limit=run.get("limit"),
        seed=int(run.get("seed", 0)),
        template=prompt.get("template", DEFAULT_TEMPLATE),
        magic_phrase=prompt.get("magic_phrase", DEFAULT_MAGIC_PHRASE),
        max_tokens=int(run.get("max_tokens", 1024)),
        label=run.get("label", ""),
    )


def ablation_cells_from_toml(path: str | Path) -> tuple[EvalConfig, list[tuple[bool, bool, bool]], str]:
    try:
        import tomllib
    except ModuleNotFoundError:  # Python < 3.11
        import tomli as tomllib
    with open(path, "rb") as fh:
        data = tomllib.load(fh)
    config = config_from_toml(path)
    ablation = data.get("ablation", {})
    cells = [tuple(bool(v) for v in cell) for cell in ablation.get("cells", [])]
    return config, cells, ablation.get("variants_dir", "variants")
