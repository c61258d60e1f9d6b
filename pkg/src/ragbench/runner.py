"""Execute the three inference strategies per (model, question) with timing capture.

Prompt templates are fixed contracts covered by golden-file tests; the
option-letter range in each instruction adapts to the question's letters
(A-D or A-E). Run records stream into per-(model, strategy) NDJSON
checkpoints and batches resume from completed ids.
"""

from __future__ import annotations

import re
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, asdict
from pathlib import Path

from .backends import BackendError, ChatBackend, DecodingParams
from .dataset import Dataset, Question
from .orchestrator import DiagnosticReport
from . import persistence

STRATEGIES = ("zero_shot", "rag", "rar")

ZERO_SHOT_TEMPLATE = (
    "You are a highly knowledgeable medical expert. Below is a multiple-choice "
    "radiology question. Read the question carefully. Provide the correct answer "
    "by selecting the most appropriate option from {letter_range}.\n"
    "\n"
    "Question:\n"
    "\n"
    "{question}\n"
    "\n"
    "Options:\n"
    "\n"
    "{options}"
)

RAG_TEMPLATE = (
    "You are a highly knowledgeable medical expert. Below is a multiple-choice "
    "radiology question accompanied by relevant context (report). First, read the "
    "report, and then the question carefully. Use the retrieved context to answer "
    "the question by selecting the most appropriate option from {letter_range}. "
    "Otherwise, if you don't know the answer, just say that you don't know.\n"
    "\n"
    "Report:\n"
    "\n"
    "{report}\n"
    "\n"
    "Question:\n"
    "\n"
    "{question}\n"
    "\n"
    "Options:\n"
    "\n"
    "{options}"
)


class RunnerError(Exception):
    pass


@dataclass(frozen=True)
class RunRecord:
    question_id: str
    model_id: str
    strategy: str
    prompt: str
    response: str
    elapsed_s: float
    context_chars: int

    def to_json(self) -> dict:
        return asdict(self)


def letter_range(letters: list[str]) -> str:
    """'A, B, C, or D' style enumeration of the option letters."""
    if len(letters) == 1:
        return letters[0]
    return ", ".join(letters[:-1]) + ", or " + letters[-1]


def options_block(question: Question) -> str:
    return "\n".join(f"{letter}: {text}" for letter, text in question.options.items())


def render_zero_shot(question: Question) -> str:
    return ZERO_SHOT_TEMPLATE.format(
        letter_range=letter_range(question.letters),
        question=question.stem,
        options=options_block(question),
    )


def render_rag(question: Question, context: str) -> str:
    """Context may be empty; the Report section is then present but blank."""
    return RAG_TEMPLATE.format(
        letter_range=letter_range(question.letters),
        report=context,
        question=question.stem,
        options=options_block(question),
    )


def render_report_text(report: DiagnosticReport) -> str:
    """Plain-text rendering of a report for inclusion in a prompt."""
    parts = [f"Introduction:\n{report.introduction}"]
    for section in report.sections:
        lines = [f"Option {section.option_letter}:", section.body]
        if section.supporting_points:
            lines.append("Supporting:")
            lines.extend(f"- {p}" for p in section.supporting_points)
        if section.contradicting_points:
            lines.append("Contradicting:")
            lines.extend(f"- {p}" for p in section.contradicting_points)
        if section.citations:
            lines.append("Citations: " + ", ".join(section.citations))
        if section.limitation_note:
            lines.append(f"Limitation: {section.limitation_note}")
        parts.append("\n".join(lines))
    parts.append(f"Conclusion:\n{report.conclusion}")
    if report.all_sources:
        parts.append("Sources:\n" + "\n".join(report.all_sources))
    return "\n\n".join(parts)


def render_rar(question: Question, report: DiagnosticReport) -> str:
    """The structured report fills the context slot of the retrieval template."""
    if report.question_id != question.id:
        raise RunnerError(
            f"report {report.question_id} does not belong to question {question.id}"
        )
    return render_rag(question, render_report_text(report))


def run_strategy(
    model: ChatBackend,
    question: Question,
    strategy: str,
    context: str | None = None,
    report: DiagnosticReport | None = None,
    params: DecodingParams | None = None,
) -> RunRecord:
    """One chat call for one (model, question, strategy) with default decoding."""
    if strategy == "zero_shot":
        prompt, context_chars = render_zero_shot(question), 0
    elif strategy == "rag":
        if context is None:
            raise RunnerError("rag strategy requires a context")
        prompt, context_chars = render_rag(question, context), len(context)
    elif strategy == "rar":
        if report is None:
            raise RunnerError("rar strategy requires a report")
        rendered = render_report_text(report)
        prompt, context_chars = render_rar(question, report), len(rendered)
    else:
        raise RunnerError(f"unknown strategy: {strategy}")
    exchange = model.chat(prompt, params or DecodingParams())
    return RunRecord(
        question_id=question.id,
        model_id=exchange.model_id,
        strategy=strategy,
        prompt=prompt,
        response=exchange.response,
        elapsed_s=exchange.elapsed_s,
        context_chars=context_chars,
    )


def slugify(name: str) -> str:
    return re.sub(r"[^A-Za-z0-9._-]+", "_", name).strip("_")


def strategy_dir(out_dir: str | Path, model_name: str, strategy: str) -> Path:
    return Path(out_dir) / slugify(model_name) / strategy


@dataclass
class RunBatchResult:
    completed: list[str]
    failed: list[tuple[str, str]]
    skipped: list[str]
    checkpoint: Path
    consolidated: Path
    elapsed_s: float


def run_batch(
    dataset: Dataset,
    model: ChatBackend,
    model_name: str,
    strategy: str,
    out_dir: str | Path,
    contexts: dict[str, str] | None = None,
    reports: dict[str, DiagnosticReport] | None = None,
    parallelism: int = 1,
    after_append=None,
) -> RunBatchResult:
    """Run one (model, strategy) over a dataset, checkpointed and resumable.

    Backend failures become error records and the batch continues; a rerun
    picks up only missing or errored questions. Appends happen in dataset
    order regardless of parallelism.
    """
    target = strategy_dir(out_dir, model_name, strategy)
    checkpoint = target / "records.ndjson"
    writer = persistence.CheckpointWriter(checkpoint, after_append=after_append)
    done = persistence.completed_ids(checkpoint, "run")
    pending = [q for q in dataset if q.id not in done]
    skipped = [q.id for q in dataset if q.id in done]

    if strategy == "rag" and contexts is None:
        raise RunnerError("rag batch requires contexts")
    if strategy == "rar" and reports is None:
        raise RunnerError("rar batch requires reports; run generate-reports first")

    def _one(question: Question) -> RunRecord:
        context = contexts.get(question.id, "") if strategy == "rag" else None
        report = None
        if strategy == "rar":
            report = reports.get(question.id)
            if report is None:
                raise RunnerError(f"no report for question {question.id}; run generate-reports")
        return run_strategy(model, question, strategy, context=context, report=report)

    start = time.perf_counter()
    completed: list[str] = []
    failed: list[tuple[str, str]] = []
    with ThreadPoolExecutor(max_workers=max(1, parallelism)) as pool:
        futures = [(q, pool.submit(_one, q)) for q in pending]
        for question, future in futures:
            try:
                record = future.result()
            except (BackendError, RunnerError) as exc:
                writer.append(
                    {
                        "kind": "error",
                        "question_id": question.id,
                        "model_id": model_name,
                        "strategy": strategy,
                        "error": str(exc),
                    }
                )
                failed.append((question.id, str(exc)))
                continue
            writer.append({"kind": "run", **record.to_json()})
            completed.append(question.id)
    elapsed = time.perf_counter() - start

    consolidated = target / "records.json"
    persistence.consolidate(checkpoint, consolidated)
    return RunBatchResult(
        completed=completed,
        failed=failed,
        skipped=skipped,
        checkpoint=checkpoint,
        consolidated=consolidated,
        elapsed_s=elapsed,
    )


def load_run_records(consolidated: str | Path) -> dict[str, RunRecord]:
    """Non-error run records keyed by question id."""
    records = {}
    for obj in persistence.load_consolidated(consolidated):
        if obj.get("kind") == "run":
            records[obj["question_id"]] = RunRecord(
                question_id=obj["question_id"],
                model_id=obj["model_id"],
                strategy=obj["strategy"],
                prompt=obj["prompt"],
                response=obj["response"],
                elapsed_s=obj["elapsed_s"],
                context_chars=obj["context_chars"],
            )
    return records
