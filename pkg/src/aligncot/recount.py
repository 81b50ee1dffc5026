"""Independent recount checks for persisted run artifacts.

Deliberately kept free of the evaluation/overwriting code paths: the
recount reads the files on disk and tallies them with nothing but json
and arithmetic, so a disagreement points at a real bookkeeping bug.
"""

from __future__ import annotations

import json
from pathlib import Path


def recount_eval(per_item_path: str | Path) -> dict:
    """Re-tally accuracy from a per_item.jsonl file."""
    correct = 0
    evaluated = 0
    failures = 0
    for line in Path(per_item_path).read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        item = json.loads(line)
        if item.get("error") is not None:
            failures += 1
            continue
        evaluated += 1
        if item.get("correct"):
            correct += 1
    accuracy = None if evaluated == 0 else 100.0 * correct / evaluated
    return {
        "evaluated": evaluated,
        "correct": correct,
        "failures": failures,
        "accuracy": accuracy,
        "accuracy_display": "n/a" if accuracy is None else f"{accuracy:.1f}",
    }


def recount_overwrite(out_path: str | Path, ledger_path: str | Path) -> dict:
    """Recount an exported aligned-records file against its ledger."""
    by_provenance: dict[str, int] = {}
    ids = []
    for line in Path(out_path).read_text(encoding="utf-8").splitlines():
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        record = json.loads(line)
        ids.append(record["id"])
        prov = record.get("provenance", "aligned_prompt")
        by_provenance[prov] = by_provenance.get(prov, 0) + 1
    ledger = json.loads(Path(ledger_path).read_text(encoding="utf-8"))
    aligned = by_provenance.get("aligned_prompt", 0)
    conversion = by_provenance.get("conversion_prompt", 0)
    return {
        "file_aligned": aligned,
        "file_conversion": conversion,
        "file_total_accepted": aligned + conversion,
        "file_unique_ids": len(set(ids)),
        "ledger": ledger,
        "counts_match": (
            aligned == ledger["accepted_aligned"]
            and conversion == ledger["accepted_conversion"]
            and len(ids) == len(set(ids))
            and ledger["accepted_aligned"]
            + ledger["accepted_conversion"]
            + ledger["dropped"]
            == ledger["total"]
        ),
    }
