"""Command-line pipeline: generate-reports, run, adjudicate, factuality, stats.

Stage boundaries mirror the pipeline: each command reads the previous
stage's consolidated artifacts and is safe to re-run (resume plus last-wins
consolidation). Exit codes: 0 success, 2 configuration problem, 3 missing
upstream artifact, 4 completed with per-question failures.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import persistence, tables
from .adjudication import (
    AdjudicationError,
    Verdict,
    adjudicate_exact,
    adjudicate_llm,
    correct_answer_text,
)
from .backends import BackendError
from .config import ConfigError, RunConfig, load_config
from .dataset import Dataset, DatasetError, load_dataset
from .factuality import factuality_row, load_labels, render_markdown_table, to_json_report
from .orchestrator import generate_reports_batch, load_reports
from .rag import rag_context
from .runner import load_run_records, run_batch, strategy_dir

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_MISSING_UPSTREAM = 3
EXIT_PARTIAL = 4


def _write_json(path: Path, payload) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")


def _write_text(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")


def _load_config_and_dataset(args) -> tuple[RunConfig, Dataset]:
    config = load_config(args.config)
    if args.out:
        config.output_dir = Path(args.out)
    if getattr(args, "parallelism", None):
        config.parallelism = args.parallelism
    if getattr(args, "seed", None) is not None:
        config.seed = args.seed
    dataset_path = Path(args.dataset) if getattr(args, "dataset", None) else config.dataset_path
    dataset = load_dataset(dataset_path)
    return config, dataset


def cmd_generate_reports(args) -> int:
    config, dataset = _load_config_and_dataset(args)
    out_dir = config.output_dir / "reports"
    result = generate_reports_batch(
        dataset,
        config.search,
        config.controller,
        config.summarizer,
        out_dir=out_dir,
        config=config.orchestrator,
        parallelism=config.parallelism,
    )
    _write_json(
        out_dir / "meta.json",
        {
            "seed": config.seed,
            "questions": len(dataset),
            "completed": len(result.completed),
            "skipped": len(result.skipped),
            "failed": [qid for qid, _ in result.failed],
            "overhead_s": result.elapsed_s,
        },
    )
    print(
        f"reports: {len(result.completed)} generated, {len(result.skipped)} resumed, "
        f"{len(result.failed)} failed -> {result.consolidated}"
    )
    for qid, error in result.failed:
        print(f"  failed {qid}: {error}", file=sys.stderr)
    return EXIT_PARTIAL if result.failed else EXIT_OK


def _ensure_contexts(config: RunConfig, dataset: Dataset) -> dict[str, str]:
    """Generate (or resume) the shared single-pass retrieval contexts."""
    out_dir = config.output_dir / "contexts"
    checkpoint = out_dir / "contexts.ndjson"
    writer = persistence.CheckpointWriter(checkpoint)
    done = persistence.completed_ids(checkpoint, "context")
    keyword_backend = config.rag_keyword_backend or config.controller
    embed_backend = config.rag_embed_backend or config.controller
    for question in dataset:
        if question.id in done:
            continue
        context = rag_context(
            question,
            config.search,
            keyword_backend,
            embed_backend,
            domain=config.orchestrator.domain,
            articles_per_keyword=config.rag_articles_per_keyword,
            chunk_size=config.rag_chunk_size,
            chunk_overlap=config.rag_chunk_overlap,
            k=config.rag_top_k,
        )
        writer.append({"kind": "context", "question_id": question.id, "context": context})
    records = persistence.consolidate(checkpoint, out_dir / "contexts.json")
    return {r["question_id"]: r["context"] for r in records if r.get("kind") == "context"}


def _assemble_timings(config: RunConfig, dataset: Dataset) -> None:
    """Collect elapsed_s vectors (dataset order) from every consolidated run file."""
    models: dict[str, dict[str, list[float]]] = {}
    for spec in config.models:
        for strategy in config.strategies:
            consolidated = strategy_dir(config.output_dir, spec.name, strategy) / "records.json"
            if not consolidated.exists():
                continue
            records = load_run_records(consolidated)
            vector = [records[q.id].elapsed_s for q in dataset if q.id in records]
            if vector:
                models.setdefault(spec.name, {})[strategy] = vector
    _write_json(
        config.output_dir / "timings.json",
        {"n": len(dataset), "overhead_s": 0.0, "models": models},
    )


def cmd_run(args) -> int:
    config, dataset = _load_config_and_dataset(args)
    reports = None
    if "rar" in config.strategies:
        consolidated = config.output_dir / "reports" / "reports.json"
        if not consolidated.exists():
            print(
                f"missing {consolidated}: run `ragbench generate-reports` first",
                file=sys.stderr,
            )
            return EXIT_MISSING_UPSTREAM
        reports = load_reports(consolidated)
    contexts = _ensure_contexts(config, dataset) if "rag" in config.strategies else None

    any_failed = False
    for spec in config.models:
        for strategy in config.strategies:
            result = run_batch(
                dataset,
                spec.backend,
                spec.name,
                strategy,
                config.output_dir,
                contexts=contexts,
                reports=reports,
                parallelism=config.parallelism,
            )
            print(
                f"run {spec.name}/{strategy}: {len(result.completed)} completed, "
                f"{len(result.skipped)} resumed, {len(result.failed)} failed"
            )
            any_failed = any_failed or bool(result.failed)
    _assemble_timings(config, dataset)
    return EXIT_PARTIAL if any_failed else EXIT_OK


def cmd_adjudicate(args) -> int:
    config, dataset = _load_config_and_dataset(args)
    method = args.method
    if method == "llm" and config.judge is None:
        print("llm adjudication requires a judge backend in the config", file=sys.stderr)
        return EXIT_CONFIG

    outcomes: dict[str, dict[str, list[bool]]] = {}
    question_ids = [q.id for q in dataset]
    missing_any = False
    for spec in config.models:
        for strategy in config.strategies:
            target = strategy_dir(config.output_dir, spec.name, strategy)
            consolidated = target / "records.json"
            if not consolidated.exists():
                print(
                    f"missing {consolidated}: run `ragbench run` first", file=sys.stderr
                )
                return EXIT_MISSING_UPSTREAM
            records = load_run_records(consolidated)
            checkpoint = target / "verdicts.ndjson"
            writer = persistence.CheckpointWriter(checkpoint)
            done = persistence.completed_ids(checkpoint, "verdict")
            for question in dataset:
                if question.id in done or question.id not in records:
                    continue
                response = records[question.id].response
                correct_text = question.options[question.correct_letter]
                if method == "llm":
                    correct = adjudicate_llm(
                        response,
                        correct_answer_text(question.correct_letter, correct_text),
                        config.judge,
                    )
                else:
                    correct = adjudicate_exact(
                        response, question.correct_letter, correct_text, question.options
                    )
                verdict = Verdict(
                    question_id=question.id,
                    model_id=spec.name,
                    strategy=strategy,
                    correct=correct,
                    method=method,
                )
                writer.append({"kind": "verdict", **verdict.to_json()})
            verdict_records = persistence.consolidate(checkpoint, target / "verdicts.json")
            by_qid = {
                r["question_id"]: r["correct"]
                for r in verdict_records
                if r.get("kind") == "verdict"
            }
            if all(qid in by_qid for qid in question_ids):
                outcomes.setdefault(spec.name, {})[strategy] = [
                    by_qid[qid] for qid in question_ids
                ]
            else:
                missing_any = True
    _write_json(
        config.output_dir / "outcomes.json",
        {"n": len(dataset), "question_ids": question_ids, "models": outcomes},
    )
    print(f"outcomes -> {config.output_dir / 'outcomes.json'}")
    return EXIT_PARTIAL if missing_any else EXIT_OK


def cmd_factuality(args) -> int:
    labels = load_labels(args.labels)
    outcomes = tables.load_json(args.outcomes)
    n = outcomes["n"]
    question_ids = outcomes["question_ids"]
    rows = []
    for model, vectors in outcomes["models"].items():
        if "rar" not in vectors or "zero_shot" not in vectors:
            continue
        rar = dict(zip(question_ids, vectors["rar"]))
        zs = dict(zip(question_ids, vectors["zero_shot"]))
        rows.append(factuality_row(labels, rar, zs, model, n))
    if not rows:
        print("no models with both zero_shot and rar outcomes", file=sys.stderr)
        return EXIT_MISSING_UPSTREAM
    out_dir = Path(args.out)
    _write_text(out_dir / "factuality.md", render_markdown_table(rows))
    _write_json(out_dir / "factuality.json", to_json_report(rows))
    if not args.no_figures:
        from .figures import factuality_figure

        factuality_figure(rows, out_dir / "factuality.png")
    print(f"factuality tables -> {out_dir}")
    return EXIT_OK


def cmd_stats(args) -> int:
    if not args.counts and not args.outcomes:
        print("stats requires --counts and/or --outcomes", file=sys.stderr)
        return EXIT_CONFIG
    out_dir = Path(args.out)
    metadata = {"seed": args.seed, "redraws": args.redraws}

    rows = None
    if args.outcomes:
        outcomes = tables.load_json(args.outcomes)
        rows = tables.accuracy_rows_from_outcomes(
            outcomes, seed=args.seed, redraws=args.redraws
        )
    elif args.counts:
        rows = tables.accuracy_rows_from_counts(tables.load_json(args.counts))
    _write_json(out_dir / "accuracy.json", {"metadata": metadata, "rows": rows})
    _write_text(out_dir / "accuracy.md", tables.render_accuracy_markdown(rows, metadata))

    groups = tables.load_json(args.groups) if args.groups else None
    if groups:
        report: dict = {"metadata": metadata}
        if "subgroups" in groups:
            report["subgroups"] = tables.subgroup_report(rows, groups["subgroups"])
            _write_text(
                out_dir / "subgroups.md", tables.render_subgroups_markdown(report["subgroups"])
            )
        if "scaling_family" in groups:
            report["scaling"] = tables.scaling_report(rows, groups["scaling_family"])
        _write_json(out_dir / "subgroups.json", report)

    timing_rows = None
    if args.timing:
        timing = tables.load_json(args.timing)
        timing_groups = (groups or {}).get("timing_groups")
        timing_rows = tables.timing_rows(timing, timing_groups)
        _write_json(
            out_dir / "timing.json",
            {"metadata": metadata, "rows": [r.to_json() for r in timing_rows]},
        )
        _write_text(out_dir / "timing.md", tables.render_timing_markdown(timing_rows))

    if not args.no_figures:
        from .figures import accuracy_figure, timing_figure

        if rows:
            accuracy_figure(rows, out_dir / "accuracy.png")
        if timing_rows:
            timing_figure(timing_rows, out_dir / "timing.png")
    print(f"stats tables -> {out_dir}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ragbench",
        description="Benchmark harness for evidence-grounded multiple-choice QA.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_pipeline_args(p):
        p.add_argument("--config", required=True, help="run configuration JSON")
        p.add_argument("--dataset", help="override the config's dataset path")
        p.add_argument("--out", help="override the config's output directory")
        p.add_argument("--parallelism", type=int, help="concurrent questions per stage")
        p.add_argument("--seed", type=int, help="override the config's seed")

    p = sub.add_parser("generate-reports", help="produce one research report per question")
    add_pipeline_args(p)
    p.set_defaults(func=cmd_generate_reports)

    p = sub.add_parser("run", help="run the configured strategies for every model")
    add_pipeline_args(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("adjudicate", help="score run records as correct/incorrect")
    add_pipeline_args(p)
    p.add_argument("--method", choices=("exact", "llm"), default="exact")
    p.set_defaults(func=cmd_adjudicate)

    p = sub.add_parser("factuality", help="factuality table from outcomes plus relevance labels")
    p.add_argument("--labels", required=True, help="question_id -> relevant JSON file")
    p.add_argument("--outcomes", required=True, help="consolidated outcomes JSON")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--no-figures", action="store_true")
    p.set_defaults(func=cmd_factuality)

    p = sub.add_parser("stats", help="accuracy, subgroup, scaling, and timing tables")
    p.add_argument("--counts", help="per-strategy correct-count JSON")
    p.add_argument("--outcomes", help="consolidated outcomes JSON")
    p.add_argument("--timing", help="timing vectors JSON")
    p.add_argument("--groups", help="model grouping JSON")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--redraws", type=int, default=1000)
    p.add_argument("--no-figures", action="store_true")
    p.set_defaults(func=cmd_stats)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, DatasetError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except persistence.PersistenceError as exc:
        print(f"artifact error: {exc}", file=sys.stderr)
        return EXIT_MISSING_UPSTREAM
    except (BackendError, AdjudicationError) as exc:
        print(f"backend error: {exc}", file=sys.stderr)
        return EXIT_PARTIAL


if __name__ == "__main__":
    sys.exit(main())
