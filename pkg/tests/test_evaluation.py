from __future__ import annotations

import json

import pytest

from aligncot.evaluation import (
    EvalConfig,
    EvalError,
    MissingVariant,
    PromptSource,
    VARIANT_FILES,
    ablation_grid,
    compare_report,
    config_from_toml,
    flags_to_variant,
    render_ablation_report,
    run_eval,
)
from aligncot.gateway import CompletionRequest, cache_key
from aligncot.recount import recount_eval

from conftest import FIXTURES, PROMPTS, load_jsonl, stub_gateway

TABLE2_CELLS = [
    (False, False, False),
    (True, False, False),
    (True, True, False),
    (True, False, True),
    (True, True, True),
]


def eval_config(**overrides) -> EvalConfig:
    base = dict(
        dataset="gsm8k",
        data_path=str(FIXTURES / "gsm8k_test.jsonl"),
        model="test-model",
        prompt_source=PromptSource(kind="fixed", file=str(PROMPTS / "cot8.jsonl")),
    )
    base.update(overrides)
    return EvalConfig(**base)


class TestRunEval:
    def test_thirteen_of_twenty_gives_65(self, tmp_path):
        gateway = stub_gateway(FIXTURES / "stub_eval.json", tmp_path / "cache")
        run = run_eval(eval_config(), gateway, tmp_path / "run")
        assert run.evaluated_count == 20
        assert run.correct_count == 13
        assert run.accuracy == 65.0
        assert run.accuracy_display == "65.0"
        assert not run.non_comparable

    def test_recount_agrees(self, tmp_path):
        gateway = stub_gateway(FIXTURES / "stub_eval.json", tmp_path / "cache")
        run = run_eval(eval_config(), gateway, tmp_path / "run")
        recount = recount_eval(tmp_path / "run" / "per_item.jsonl")
        assert recount["accuracy"] == run.accuracy
        assert recount["correct"] == run.correct_count
        assert recount["evaluated"] == run.evaluated_count

    def test_limit_zero_reports_na(self, tmp_path):
        gateway = stub_gateway(FIXTURES / "stub_eval.json", tmp_path / "cache")
        run = run_eval(eval_config(limit=0), gateway, tmp_path / "run")
        assert run.accuracy is None
        assert run.accuracy_display == "n/a"

    def test_warm_cache_rerun_identical(self, tmp_path):
        gateway = stub_gateway(FIXTURES / "stub_eval.json", tmp_path / "cache")
        first = run_eval(eval_config(), gateway, tmp_path / "run_a")
        calls_after_first = gateway.transport.call_count
        second = run_eval(eval_config(), gateway, tmp_path / "run_b")
        assert gateway.transport.call_count == calls_after_first  # all cache hits
        assert second.accuracy == first.accuracy
        assert [i.prompt_digest for i in second.per_item] == [
            i.prompt_digest for i in first.per_item
        ]

    def test_resume_skips_persisted_items(self, tmp_path):
        gateway = stub_gateway(FIXTURES / "stub_eval.json")
        run_eval(eval_config(limit=8), gateway, tmp_path / "run")
        assert gateway.transport.call_count == 8
        resumed = run_eval(eval_config(), gateway, tmp_path / "run")
        assert gateway.transport.call_count == 20  # only the remaining 12
        assert resumed.accuracy == 65.0

    def test_failures_excluded_and_flagged(self, tmp_path):
        # a stub that only knows 18 of the 20 questions
        raw = json.loads((FIXTURES / "stub_eval.json").read_text())
        patterns = [(p["pattern"], p["response"]) for p in raw["patterns"][:18]]
        from aligncot.gateway import Gateway, RetryPolicy, StubTransport

        gateway = Gateway(
            StubTransport(patterns=patterns), retry=RetryPolicy(attempts=2, base_delay=0.0)
        )
        run = run_eval(eval_config(), gateway, tmp_path / "run")
        assert run.failure_count == 2
        assert run.evaluated_count == 18
        assert run.non_comparable

    def test_per_item_digest_matches_rerendered_prompt(self, tmp_path):
        from aligncot.prompting import PromptSpec, load_exemplars, render_fewshot
        from aligncot.dataset import load_dataset

        gateway = stub_gateway(FIXTURES / "stub_eval.json", tmp_path / "cache")
        config = eval_config()
        run = run_eval(config, gateway, tmp_path / "run")
        records = {r.id: r for r in load_dataset(config.data_path, "gsm8k", "test")}
        exemplars = tuple(load_exemplars(PROMPTS / "cot8.jsonl"))
        for item in run.per_item[:5]:
            prompt = render_fewshot(
                PromptSpec(exemplars=exemplars, test_question=records[item.id].question)
            )
            request = CompletionRequest.user(
                config.model, prompt, temperature=0.0, max_tokens=config.max_tokens
            )
            assert cache_key(request) == item.prompt_digest

    def test_strategy_prompt_source(self, tmp_path):
        gateway = stub_gateway(FIXTURES / "stub_eval.json", tmp_path / "cache")
        config = eval_config(
            prompt_source=PromptSource(
                kind="strategy", strategy="random", pool=str(FIXTURES / "aligned8.jsonl"), k=3
            ),
            limit=5,
        )
        run = run_eval(config, gateway, tmp_path / "run")
        assert run.evaluated_count == 5

    def test_similarity_strategy_selects_per_item(self, tmp_path):
        gateway = stub_gateway(FIXTURES / "stub_eval.json", tmp_path / "cache")
        config = eval_config(
            prompt_source=PromptSource(
                kind="strategy", strategy="similarity",
                pool=str(FIXTURES / "aligned8.jsonl"), k=2,
            ),
            limit=4,
        )
        run = run_eval(config, gateway, tmp_path / "run")
        assert run.evaluated_count == 4

    def test_temperature_override_warns(self):
        with pytest.warns(UserWarning):
            eval_config(temperature=0.5)


class TestAblation:
    def test_five_table_cells_run(self, tmp_path):
        gateway = stub_gateway(FIXTURES / "stub_eval.json", tmp_path / "cache")
        cells = ablation_grid(
            eval_config(), TABLE2_CELLS, FIXTURES / "variants", gateway, tmp_path / "grid"
        )
        assert len(cells) == 5
        assert all(cell.run.evaluated_count == 20 for cell in cells)
        baseline = cells[0]
        assert baseline.flags == (False, False, False)
        assert baseline.delta == 0.0
        report = render_ablation_report(cells)
        assert report.count("\n") == 5

    def test_proofreading_without_probing_is_missing_variant(self):
        with pytest.raises(MissingVariant):
            flags_to_variant((False, True, False), FIXTURES / "variants")

    def test_formatting_without_probing_is_missing_variant(self):
        with pytest.raises(MissingVariant):
            flags_to_variant((False, False, True), FIXTURES / "variants")

    def test_absent_file_is_missing_variant(self, tmp_path):
        with pytest.raises(MissingVariant):
            flags_to_variant((True, True, True), tmp_path)

    def test_single_cell_delta_vs_itself(self, tmp_path):
        gateway = stub_gateway(FIXTURES / "stub_eval.json", tmp_path / "cache")
        cells = ablation_grid(
            eval_config(), [(True, True, True)], FIXTURES / "variants", gateway, tmp_path / "g"
        )
        assert cells[0].delta == 0.0

    def test_variants_differ_only_in_cot_and_answer(self):
        rows = {
            flags: load_jsonl(FIXTURES / "variants" / name)
            for flags, name in VARIANT_FILES.items()
        }
        counts = {len(r) for r in rows.values()}
        assert len(counts) == 1
        reference = rows[(False, False, False)]
        for variant in rows.values():
            for ref_row, row in zip(reference, variant):
                assert row["id"] == ref_row["id"]
                assert row["question"] == ref_row["question"]
                changed = {
                    key for key in set(ref_row) | set(row) if row.get(key) != ref_row.get(key)
                }
                assert changed <= {"cot", "answer"}
        # and the variants are not all byte-identical
        assert len({json.dumps(r, sort_keys=True) for r in map(str, rows.values())}) > 1


class TestCompareReport:
    def run_pair(self, tmp_path):
        gateway = stub_gateway(FIXTURES / "stub_eval.json", tmp_path / "cache")
        run_a = run_eval(eval_config(label="baseline"), gateway, tmp_path / "a")
        run_b = run_eval(eval_config(label="aligned", limit=10), gateway, tmp_path / "b")
        return run_a, run_b

    def test_delta_against_first_run(self, tmp_path):
        run_a, run_b = self.run_pair(tmp_path)
        text, machine = compare_report([run_a, run_b])
        assert machine["rows"][0]["delta"] is None
        expected = run_b.accuracy - run_a.accuracy
        assert machine["rows"][1]["delta"] == pytest.approx(expected)
        assert f"{expected:+.1f}" in text

    def test_single_run_has_no_delta_column(self, tmp_path):
        run_a, _ = self.run_pair(tmp_path)
        text, machine = compare_report([run_a])
        assert "delta" not in text.splitlines()[0]
        assert machine["rows"][0]["delta"] is None

    def test_machine_file_roundtrip(self, tmp_path):
        run_a, run_b = self.run_pair(tmp_path)
        _, machine = compare_report([run_a, run_b])
        path = tmp_path / "report.json"
        path.write_text(json.dumps(machine))
        reparsed = json.loads(path.read_text())
        assert [r["accuracy"] for r in reparsed["rows"]] == [run_a.accuracy, run_b.accuracy]

    def test_empty_runs_rejected(self):
        with pytest.raises(EvalError):
            compare_report([])


class TestConfigToml:
    def test_parse(self, tmp_path):
        path = tmp_path / "run.toml"
        path.write_text(
            "[run]\n"
            'dataset = "gsm8k"\n'
            f'data = "{FIXTURES / "gsm8k_test.jsonl"}"\n'
            'model = "test-model"\n'
            "limit = 20\n"
            "[prompt]\n"
            'source = "fixed"\n'
            f'file = "{PROMPTS / "cot8.jsonl"}"\n'
        )
        config = config_from_toml(path)
        assert config.dataset == "gsm8k"
        assert config.limit == 20
        assert config.prompt_source.kind == "fixed"
        assert config.temperature == 0.0
