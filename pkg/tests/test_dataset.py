from __future__ import annotations

import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from aligncot.canonical import canonical_choice, canonical_number
from aligncot.dataset import (
    GoldAnswer,
    MalformedRecord,
    MissingGoldAnswer,
    NoDelimiterFound,
    NonNumericGold,
    InvalidChoiceLetter,
    UnknownDataset,
    dump_records,
    load_dataset,
    parse_gold,
)


class TestCanonicalNumber:
    @pytest.mark.parametrize(
        "raw,expected",
        [
            ("18", "18"),
            ("18.0", "18"),
            ("1,234", "1234"),
            ("$1,234.00", "1234"),
            ("-3", "-3"),
            ("+7", "7"),
            ("0.50", "0.5"),
            (".5", "0.5"),
            ("25%", "25"),
            ("18.", "18"),
            ("007", "7"),
            ("-0", "0"),
            ("-0.0", "0"),
            ("  42  ", "42"),
        ],
    )
    def test_values(self, raw, expected):
        assert canonical_number(raw) == expected

    @pytest.mark.parametrize("raw", ["", "abc", "1.2.3", "--5", "$", "1e5"])
    def test_rejects(self, raw):
        assert canonical_number(raw) is None

    @given(st.text(max_size=30))
    def test_idempotent(self, raw):
        out = canonical_number(raw)
        if out is not None:
            assert canonical_number(out) == out

    @given(
        st.integers(min_value=-10**9, max_value=10**9),
        st.integers(min_value=0, max_value=999999),
    )
    def test_roundtrip_decimals(self, whole, frac):
        raw = f"{whole}.{frac}"
        out = canonical_number(raw)
        assert out is not None
        assert canonical_number(out) == out


class TestCanonicalChoice:
    @pytest.mark.parametrize(
        "raw,expected",
        [("C", "C"), ("(c)", "C"), ("B.", "B"), ("e", "E"), (" a ", "A"), ("D)", "D")],
    )
    def test_values(self, raw, expected):
        assert canonical_choice(raw) == expected

    @pytest.mark.parametrize("raw", ["F", "AB", "", "6", "(ab)"])
    def test_rejects(self, raw):
        assert canonical_choice(raw) is None


class TestParseGold:
    def test_gsm8k_delimiter(self):
        gold = parse_gold("She sells the rest, the total is 18.\n#### 18", "gsm8k")
        assert gold == GoldAnswer(kind="numeric", value="18")

    def test_gsm8k_separator_stripping(self):
        assert parse_gold("#### 1,234", "gsm8k").value == "1234"

    def test_gsm8k_missing_delimiter(self):
        with pytest.raises(NoDelimiterFound):
            parse_gold("the total is 18", "gsm8k")

    def test_gsm8k_non_numeric(self):
        with pytest.raises(NonNumericGold):
            parse_gold("#### eighteen", "gsm8k")

    def test_aqua_letter(self):
        assert parse_gold("B", "aqua") == GoldAnswer(kind="choice", value="B")

    def test_aqua_invalid(self):
        with pytest.raises(InvalidChoiceLetter):
            parse_gold("Z", "aqua")

    def test_svamp_numeric(self):
        assert parse_gold("10.0", "svamp").value == "10"

    def test_unknown_dataset(self):
        with pytest.raises(UnknownDataset):
            parse_gold("#### 1", "mathqa")

    def test_idempotent_under_recanonicalization(self):
        gold = parse_gold("#### 18.50", "gsm8k")
        assert canonical_number(gold.value) == gold.value


class TestLoadDataset:
    def test_gsm8k_fixture(self, fixtures_dir):
        records = load_dataset(fixtures_dir / "gsm8k_test.jsonl", "gsm8k", "test")
        assert len(records) == 20
        assert records[0].id == "e000"
        assert records[0].gold == GoldAnswer(kind="numeric", value="12")
        assert records[0].options == ()
        assert all(r.dataset == "gsm8k" and r.split == "test" for r in records)

    def test_order_preserved_and_ids_unique(self, fixtures_dir):
        records = load_dataset(fixtures_dir / "gsm8k_train.jsonl", "gsm8k", "train")
        assert [r.id for r in records] == [f"t{i:03d}" for i in range(100)]

    def test_split_size_equals_line_count(self, fixtures_dir):
        path = fixtures_dir / "gsm8k_train.jsonl"
        line_count = sum(1 for ln in path.read_text().splitlines() if ln.strip())
        assert len(load_dataset(path, "gsm8k", "train")) == line_count

    def test_aqua_fixture(self, fixtures_dir):
        records = load_dataset(fixtures_dir / "aqua_test.jsonl", "aqua", "test")
        assert len(records) == 5
        assert records[0].gold == GoldAnswer(kind="choice", value="C")
        assert len(records[0].options) == 5

    def test_svamp_json_array(self, fixtures_dir):
        records = load_dataset(fixtures_dir / "svamp_test.json", "svamp", "test")
        assert len(records) == 4
        assert records[0].question.startswith("Lena picked 7 flowers.")
        assert records[0].gold.value == "12"

    def test_empty_file(self, tmp_path):
        path = tmp_path / "empty.jsonl"
        path.write_text("")
        assert load_dataset(path, "gsm8k", "test") == []

    def test_limit(self, fixtures_dir):
        records = load_dataset(fixtures_dir / "gsm8k_train.jsonl", "gsm8k", "train", limit=7)
        assert len(records) == 7

    def test_malformed_line_positioned(self, tmp_path):
        path = tmp_path / "bad.jsonl"
        path.write_text('{"question": "q", "answer": "#### 1"}\nnot json\n')
        with pytest.raises(MalformedRecord) as err:
            load_dataset(path, "gsm8k", "test")
        assert err.value.line_no == 2

    def test_missing_gold(self, tmp_path):
        path = tmp_path / "nogold.jsonl"
        path.write_text(json.dumps({"question": "q", "answer": "   "}) + "\n")
        with pytest.raises(MissingGoldAnswer):
            load_dataset(path, "gsm8k", "test")

    def test_unknown_dataset(self, fixtures_dir):
        with pytest.raises(UnknownDataset):
            load_dataset(fixtures_dir / "gsm8k_test.jsonl", "numbers", "test")

    @pytest.mark.parametrize(
        "name,dataset",
        [("gsm8k_test.jsonl", "gsm8k"), ("aqua_test.jsonl", "aqua"), ("svamp_test.json", "svamp")],
    )
    def test_roundtrip(self, fixtures_dir, tmp_path, name, dataset):
        records = load_dataset(fixtures_dir / name, dataset, "test")
        out = tmp_path / "out.jsonl"
        dump_records(records, out)
        assert load_dataset(out, dataset, "test") == records
