#!/usr/bin/env python3
"""Run a multi-cell experiment suite (experiments/table1.toml or table3.toml).

Each cell becomes one eval run; the comparison report renders deltas
against the first cell. Live mode needs --transport http and
ALIGNCOT_API_KEY; --transport stub makes the driver itself testable.
"""

from __future__ import annotations

import argparse
import json
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from aligncot.cli import build_gateway
from aligncot.evaluation import EvalConfig, PromptSource, compare_report, run_eval


def cell_config(cell: dict, suite: dict) -> EvalConfig:
    source = PromptSource(
        kind=cell.get("source", "fixed"),
        file=cell.get("file"),
        strategy=cell.get("strategy"),
        pool=cell.get("pool"),
        k=int(cell.get("k", 8)),
    )
    return EvalConfig(
        dataset=cell["dataset"],
        data_path=cell["data"],
        model=cell.get("model", suite.get("model", "gpt-3.5-turbo")),
        prompt_source=source,
        limit=cell.get("limit", suite.get("limit")),
        seed=int(cell.get("seed", 0)),
        workers=int(suite.get("workers", 1)),
        label=cell["label"],
    )


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--suite", required=True, help="suite TOML (e.g. experiments/table1.toml)")
    parser.add_argument("--out", default=None, help="override the suite's out_dir")
    parser.add_argument("--transport", choices=["stub", "http"], default="http")
    parser.add_argument("--stub-file", default=None)
    parser.add_argument("--base-url", default="https://api.openai.com/v1")
    parser.add_argument("--cache-dir", default=".aligncot-cache")
    parser.add_argument("--rpm", type=float, default=None)
    parser.add_argument("--limit", type=int, default=None, help="cap items per cell")
    args = parser.parse_args()

    with open(args.suite, "rb") as fh:
        data = tomllib.load(fh)
    suite = data.get("suite", {})
    if args.limit is not None:
        suite["limit"] = args.limit
    cells = data.get("cells", [])
    if not cells:
        raise SystemExit(f"no [[cells]] in {args.suite}")

    gateway = build_gateway(
        transport=args.transport,
        stub_file=args.stub_file,
        base_url=args.base_url,
        cache_dir=args.cache_dir,
        no_cache=False,
        rpm=args.rpm,
        retries=4,
        embedder_kind="offline" if args.transport == "stub" else "http",
    )

    out_dir = Path(args.out or suite.get("out_dir", "runs/suite"))
    runs = []
    for cell in cells:
        config = cell_config(cell, suite)
        run = run_eval(config, gateway, out_dir / cell["label"])
        print(f"{cell['label']}: {run.accuracy_display}")
        runs.append(run)

    text, machine = compare_report(runs)
    print()
    print(text)
    (out_dir / "report.json").write_text(
        json.dumps(machine, indent=2, ensure_ascii=False) + "\n", encoding="utf-8"
    )
    print(f"\nreport written to {out_dir / 'report.json'}")


if __name__ == "__main__":
    main()
