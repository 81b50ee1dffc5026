"""aligncot command line: probe / proofread / format / overwrite / select / eval."""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from . import evaluation, probing, recount, selection
from .dataset import load_dataset
from .formatting import DEFAULT_RULES, load_rules
from .gateway import (
    Gateway,
    HashedBagOfWordsEmbedder,
    HttpEmbedder,
    HttpTransport,
    RateLimiter,
    ResponseCache,
    RetryPolicy,
    StubTransport,
)
from .overwriting import conversion_demos_from, overwrite_dataset, write_ledger
from .prompting import PromptSpec, load_exemplars, save_exemplars
from .proofreading import ACCEPTED, ProofreadService, SessionStore
from .variants import exemplars_from_probes, exemplars_from_sessions


def gateway_options(fn):
    options = [
        click.option("--transport", type=click.Choice(["stub", "http"]), default="stub",
                     show_default=True, help="LLM transport"),
        click.option("--stub-file", type=click.Path(exists=True), default=None,
                     help="stub fixture file (digest/pattern tables)"),
        click.option("--base-url", default="https://api.openai.com/v1", show_default=True),
        click.option("--cache-dir", type=click.Path(), default=".aligncot-cache",
                     show_default=True, help="response cache directory"),
        click.option("--no-cache", is_flag=True, default=False),
        click.option("--rpm", type=float, default=None, help="requests per minute"),
        click.option("--retries", type=int, default=4, show_default=True),
        click.option("--embedder", "embedder_kind", type=click.Choice(["offline", "http"]),
                     default="offline", show_default=True),
    ]
    for option in reversed(options):
        fn = option(fn)
    return fn


def build_gateway(transport, stub_file, base_url, cache_dir, no_cache, rpm, retries,
                  embedder_kind) -> Gateway:
    if transport == "stub":
        if stub_file:
            t = StubTransport.from_file(stub_file)
        else:
            t = StubTransport(default="Let me work through this. The answer is 0.")
    else:
        t = HttpTransport(base_url=base_url)
    embedder = HttpEmbedder(base_url=base_url) if embedder_kind == "http" else HashedBagOfWordsEmbedder()
    return Gateway(
        transport=t,
        cache=None if no_cache else ResponseCache(cache_dir),
        rate_limiter=RateLimiter(rpm),
        retry=RetryPolicy(attempts=retries),
        embedder=embedder,
    )


@click.group()
def main():
    """Native-style CoT alignment toolchain."""


@main.command("probe")
@click.option("--data", "data_path", type=click.Path(exists=True), required=True)
@click.option("--dataset", type=click.Choice(["gsm8k", "aqua", "svamp"]), required=True)
@click.option("--split", default="train", show_default=True)
@click.option("--ids", default="all", show_default=True,
              help="'all' or a file of question ids, one per line")
@click.option("--model", default="gpt-3.5-turbo", show_default=True)
@click.option("--out", type=click.Path(), required=True)
@click.option("--limit", type=int, default=None)
@click.option("--workers", type=int, default=1, show_default=True)
@gateway_options
def probe_cmd(data_path, dataset, split, ids, model, out, limit, workers, **gw):
    """Collect zero-shot native-style CoTs for exemplar questions."""
    gateway = build_gateway(**gw)
    records = load_dataset(data_path, dataset, split, limit=limit)
    if ids != "all":
        wanted = {line.strip() for line in Path(ids).read_text().splitlines() if line.strip()}
        records = [r for r in records if r.id in wanted]
    results = probing.probe(records, model, gateway, workers=workers)
    probing.save_probes(results, out)
    failed = sum(1 for r in results if r.error is not None)
    wrong = sum(1 for r in results if r.error is None and not r.correct_vs_gold)
    click.echo(f"probed {len(results)} questions -> {out} "
               f"({wrong} incorrect, flagged for proofreading; {failed} failed)")


@main.group("proofread")
def proofread_group():
    """Human-in-the-loop correction of probe output."""


def _proofread_service(probes_path, store_path, model, gw) -> ProofreadService:
    gateway = build_gateway(**gw)
    probes = {p.question_id: p for p in probing.load_probes(probes_path)}
    store = SessionStore(store_path)
    return ProofreadService(store=store, gateway=gateway, model=model, probes=probes)


@proofread_group.command("serve")
@click.option("--probes", "probes_path", type=click.Path(exists=True), required=True)
@click.option("--store", "store_path", type=click.Path(), default="sessions.jsonl",
              show_default=True)
@click.option("--model", default="gpt-3.5-turbo", show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8321, show_default=True)
@gateway_options
def proofread_serve(probes_path, store_path, model, host, port, **gw):
    """Serve the session HTTP API for the annotator UI."""
    import uvicorn

    from .api import create_app

    service = _proofread_service(probes_path, store_path, model, gw)
    uvicorn.run(create_app(service), host=host, port=port)


@proofread_group.command("tui")
@click.option("--probes", "probes_path", type=click.Path(exists=True), required=True)
@click.option("--store", "store_path", type=click.Path(), default="sessions.jsonl",
              show_default=True)
@click.option("--model", default="gpt-3.5-turbo", show_default=True)
@gateway_options
def proofread_tui(probes_path, store_path, model, **gw):
    """Minimal terminal fallback for annotation without the browser UI."""
    service = _proofread_service(probes_path, store_path, model, gw)
    click.echo("commands: list | open <qid> | show <sid> | edit <sid> <offset> | "
               "accept <sid> | abandon <sid> | quit")
    while True:
        try:
            line = input("proofread> ").strip()
        except EOFError:
            break
        if not line:
            continue
        cmd, *args = line.split()
        try:
            if cmd == "quit":
                break
            elif cmd == "list":
                for s in service.store.list():
                    mark = "ok" if s.current_correct() else "WRONG"
                    click.echo(f"{s.session_id}  {s.question_id}  [{s.status}] {mark}")
            elif cmd == "open":
                s = service.open_session(args[0])
                click.echo(f"opened {s.session_id}")
            elif cmd == "show":
                s = service.store.get(args[0])
                click.echo(json.dumps(s.to_dict(), indent=2, ensure_ascii=False))
            elif cmd == "edit":
                sid, offset = args[0], int(args[1])
                click.echo("enter corrected prefix, end with a single '.' line:")
                prefix_lines = []
                while True:
                    row = input()
                    if row == ".":
                        break
                    prefix_lines.append(row)
                revision = service.apply_edit(sid, offset, "\n".join(prefix_lines))
                click.echo(f"revision {revision.index}: {revision.full_text!r}")
            elif cmd == "accept":
                service.accept(args[0])
                click.echo("accepted")
            elif cmd == "abandon":
                service.abandon(args[0])
                click.echo("abandoned")
            else:
                click.echo(f"unknown command {cmd!r}")
        except Exception as exc:  # surface, keep the loop alive
            click.echo(f"error: {exc}")


@main.command("format")
@click.option("--in", "in_path", type=click.Path(exists=True), default=None,
              help="session event log; accepted sessions are exported")
@click.option("--probes", "probes_path", type=click.Path(exists=True), default=None,
              help="probe file; formats raw probes (no human correction)")
@click.option("--out", type=click.Path(), required=True)
@click.option("--rules", "rules_path", type=click.Path(exists=True), default=None)
@click.option("--raw", is_flag=True, default=False,
              help="skip normalization (strip the answer sentence only)")
def format_cmd(in_path, probes_path, out, rules_path, raw):
    """Unify CoT surface format and emit an exemplar file."""
    if (in_path is None) == (probes_path is None):
        raise click.UsageError("pass exactly one of --in (sessions) or --probes")
    rules = load_rules(rules_path) if rules_path else DEFAULT_RULES
    if in_path:
        store = SessionStore(in_path)
        exemplars = exemplars_from_sessions(
            store.list(status=ACCEPTED), apply_format=not raw, rules=rules
        )
    else:
        exemplars = exemplars_from_probes(
            probing.load_probes(probes_path), apply_format=not raw, rules=rules
        )
    save_exemplars(exemplars, out)
    click.echo(f"wrote {len(exemplars)} exemplars -> {out}")


@main.command("overwrite")
@click.option("--data", "data_path", type=click.Path(exists=True), required=True)
@click.option("--dataset", type=click.Choice(["gsm8k", "aqua", "svamp"]), default="gsm8k",
              show_default=True)
@click.option("--split", default="train", show_default=True)
@click.option("--mode", type=click.Choice(["aligned", "conversion_only"]), default="aligned",
              show_default=True)
@click.option("--prompt", "prompt_path", type=click.Path(exists=True), required=True,
              help="aligned exemplar file (8-shot prompt and conversion demos)")
@click.option("--model", default="gpt-3.5-turbo", show_default=True)
@click.option("--out", type=click.Path(), required=True)
@click.option("--ledger", "ledger_path", type=click.Path(), required=True)
@click.option("--limit", type=int, default=None)
@gateway_options
def overwrite_cmd(data_path, dataset, split, mode, prompt_path, model, out, ledger_path,
                  limit, **gw):
    """Rewrite a training split into native-style aligned records."""
    gateway = build_gateway(**gw)
    train = load_dataset(data_path, dataset, split, limit=limit)
    exemplars = tuple(load_exemplars(prompt_path))
    demos = conversion_demos_from(exemplars, {r.id: r for r in train})
    records, ledger = overwrite_dataset(
        train,
        PromptSpec(exemplars=exemplars),
        demos,
        gateway,
        model,
        mode=mode,
        out_path=out,
    )
    write_ledger(ledger, ledger_path)
    click.echo(
        f"total {ledger.total}: {ledger.accepted_aligned} aligned, "
        f"{ledger.accepted_conversion} converted, {ledger.dropped} dropped -> {out}"
    )


@main.command("select")
@click.option("--strategy", type=click.Choice(["random", "complexity", "similarity"]),
              required=True)
@click.option("--pool", "pool_path", type=click.Path(exists=True), required=True)
@click.option("--k", type=int, default=8, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--query-from", "query_path", type=click.Path(exists=True), default=None,
              help="dataset file; similarity retrieves per test question")
@click.option("--dataset", type=click.Choice(["gsm8k", "aqua", "svamp"]), default="gsm8k",
              show_default=True)
@click.option("--out", type=click.Path(), default=None)
@gateway_options
def select_cmd(strategy, pool_path, k, seed, query_path, dataset, out, **gw):
    """Choose k-shot exemplars from an example pool."""
    gateway = build_gateway(**gw)
    pool = selection.load_pool(pool_path)
    lines: list[str] = []
    if strategy == "random":
        lines.append(selection.select_random(pool, k, seed).to_json())
    elif strategy == "complexity":
        lines.append(selection.select_complex(pool, k).to_json())
    else:
        pool = selection.ensure_embeddings(pool, gateway)
        selection.save_pool(pool, pool_path)  # cache embeddings in the pool file
        if query_path is None:
            raise click.UsageError("similarity needs --query-from")
        for record in load_dataset(query_path, dataset):
            result = selection.select_similar(pool, record.question, k, gateway=gateway)
            lines.append(result.to_json())
    text = "\n".join(lines) + "\n"
    if out:
        Path(out).write_text(text, encoding="utf-8")
        click.echo(f"wrote {len(lines)} selection(s) -> {out}")
    else:
        click.echo(text, nl=False)


@main.command("eval")
@click.option("--config", "config_path", type=click.Path(exists=True), required=True)
@click.option("--out", "out_dir", type=click.Path(), default="runs/latest", show_default=True)
@gateway_options
def eval_cmd(config_path, out_dir, **gw):
    """Run one experiment cell from a TOML config."""
    gateway = build_gateway(**gw)
    config = evaluation.config_from_toml(config_path)
    run = evaluation.run_eval(config, gateway, out_dir)
    note = "  (non-comparable: >1% failures)" if run.non_comparable else ""
    click.echo(f"accuracy {run.accuracy_display} on {run.evaluated_count} items{note}")


@main.command("ablate")
@click.option("--config", "config_path", type=click.Path(exists=True), required=True)
@click.option("--out", "out_dir", type=click.Path(), default="runs/ablation", show_default=True)
@gateway_options
def ablate_cmd(config_path, out_dir, **gw):
    """Run the probing/proofreading/formatting ablation grid."""
    gateway = build_gateway(**gw)
    config, cells, variants_dir = evaluation.ablation_cells_from_toml(config_path)
    report = evaluation.ablation_grid(config, cells, variants_dir, gateway, out_dir)
    click.echo(evaluation.render_ablation_report(report))


@main.command("report")
@click.option("--runs", "runs_dir", type=click.Path(exists=True), required=True,
              help="directory of run output directories")
@click.option("--out", type=click.Path(), default=None)
def report_cmd(runs_dir, out):
    """Summarize finished runs into a comparison table."""
    summaries = sorted(Path(runs_dir).glob("*/summary.json"))
    if not summaries:
        raise click.UsageError(f"no summary.json files under {runs_dir}")
    rows = [json.loads(p.read_text(encoding="utf-8")) for p in summaries]
    lines = ["dataset       method        accuracy"]
    for row in rows:
        cfg = row["config"]
        source = cfg["prompt_source"]
        method = source["strategy"] or f"fixed:{Path(str(source['file'])).stem}"
        lines.append(f"{cfg['dataset']:<12}  {method:<12}  {row['accuracy_display']:>8}")
    text = "\n".join(lines)
    click.echo(text)
    if out:
        Path(out).write_text(
            json.dumps({"rows": rows}, indent=2, ensure_ascii=False) + "\n", encoding="utf-8"
        )


@main.group("recount")
def recount_group():
    """Independent recounts of persisted artifacts."""


@recount_group.command("eval")
@click.option("--run-dir", type=click.Path(exists=True), required=True)
def recount_eval_cmd(run_dir):
    result = recount.recount_eval(Path(run_dir) / "per_item.jsonl")
    click.echo(json.dumps(result, indent=2))


@recount_group.command("overwrite")
@click.option("--out", "out_path", type=click.Path(exists=True), required=True)
@click.option("--ledger", "ledger_path", type=click.Path(exists=True), required=True)
def recount_overwrite_cmd(out_path, ledger_path):
    result = recount.recount_overwrite(out_path, ledger_path)
    click.echo(json.dumps(result, indent=2))
    if not result["counts_match"]:
        sys.exit(1)


if __name__ == "__main__":
    main()
