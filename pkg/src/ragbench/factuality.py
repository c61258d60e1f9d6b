"""Factuality metrics from verdicts plus human-supplied relevance labels.

Relevance labels are per-question and shared by every model. Hallucination
counts incorrect answers despite relevant context; the complementary column
counts correct answers despite irrelevant context; the rescue column counts
questions a model got wrong zero-shot but right with the report strategy.
Per-model cells render as integer percentages and the summary row averages
those integers, mirroring how the reference tables are laid out.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

from .adjudication import percent


class FactualityError(Exception):
    pass


@dataclass(frozen=True)
class FactualityRow:
    model_id: str
    context_relevant: tuple[int, int]
    hallucination: tuple[int, int]
    correct_despite_irrelevant: tuple[int, int]
    rescued: tuple[int, int]

    def percents(self) -> dict[str, int]:
        return {
            "context_relevant": percent(*self.context_relevant),
            "hallucination": percent(*self.hallucination),
            "correct_despite_irrelevant": percent(*self.correct_despite_irrelevant),
            "rescued": percent(*self.rescued),
        }

    def to_json(self) -> dict:
        return {
            "model_id": self.model_id,
            "context_relevant": list(self.context_relevant),
            "hallucination": list(self.hallucination),
            "correct_despite_irrelevant": list(self.correct_despite_irrelevant),
            "rescued": list(self.rescued),
            "percents": self.percents(),
        }


def load_labels(path: str | Path) -> dict[str, bool]:
    """Relevance labels file: a JSON object mapping question_id -> boolean."""
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    if not isinstance(data, dict) or not all(isinstance(v, bool) for v in data.values()):
        raise FactualityError(f"labels file must map question ids to booleans: {path}")
    return data


def factuality_row(
    labels: dict[str, bool],
    rar_verdicts: dict[str, bool],
    zs_verdicts: dict[str, bool],
    model_id: str,
    n: int,
) -> FactualityRow:
    """Counts for one model over all n questions; coverage gaps name missing ids."""
    question_ids = sorted(labels)
    if len(question_ids) != n:
        raise FactualityError(f"expected {n} labels, found {len(question_ids)}")
    for name, verdicts in (("rar", rar_verdicts), ("zero_shot", zs_verdicts)):
        missing = [qid for qid in question_ids if qid not in verdicts]
        if missing:
            raise FactualityError(
                f"model {model_id}: {name} verdicts missing questions: {missing[:5]}"
            )
    relevant = sum(1 for qid in question_ids if labels[qid])
    hallucination = sum(1 for qid in question_ids if labels[qid] and not rar_verdicts[qid])
    despite = sum(1 for qid in question_ids if not labels[qid] and rar_verdicts[qid])
    rescued = sum(1 for qid in question_ids if not zs_verdicts[qid] and rar_verdicts[qid])
    return FactualityRow(
        model_id=model_id,
        context_relevant=(relevant, n),
        hallucination=(hallucination, n),
        correct_despite_irrelevant=(despite, n),
        rescued=(rescued, n),
    )


def factuality_summary(rows: list[FactualityRow]) -> dict[str, tuple[float, float]]:
    """(mean, sample sd) of the per-model integer percentages, per column."""
    if len(rows) < 2:
        raise FactualityError("summary requires at least 2 rows")
    columns = ("context_relevant", "hallucination", "correct_despite_irrelevant", "rescued")
    out = {}
    for column in columns:
        values = [row.percents()[column] for row in rows]
        mean = sum(values) / len(values)
        var = sum((v - mean) ** 2 for v in values) / (len(values) - 1)
        out[column] = (mean, math.sqrt(var))
    return out


_COLUMN_TITLES = (
    ("context_relevant", "Context relevant"),
    ("hallucination", "Hallucination"),
    ("correct_despite_irrelevant", "Correct despite irrelevant context"),
    ("rescued", "Zero-shot incorrect, correct with report"),
)


def render_markdown_table(rows: list[FactualityRow]) -> str:
    """Markdown layout: one row per model plus an Average row of mean +/- sd."""
    lines = [
        "| Model | " + " | ".join(title for _, title in _COLUMN_TITLES) + " |",
        "|" + "---|" * (len(_COLUMN_TITLES) + 1),
    ]
    for row in rows:
        pct = row.percents()
        cells = [
            f"{pct[key]}% ({getattr(row, key)[0]}/{getattr(row, key)[1]})"
            for key, _ in _COLUMN_TITLES
        ]
        lines.append(f"| {row.model_id} | " + " | ".join(cells) + " |")
    summary = factuality_summary(rows)
    cells = [f"{mean:.1f}% ± {sd:.1f}%" for mean, sd in (summary[k] for k, _ in _COLUMN_TITLES)]
    lines.append("| Average | " + " | ".join(cells) + " |")
    return "\n".join(lines) + "\n"


def to_json_report(rows: list[FactualityRow]) -> dict:
    summary = factuality_summary(rows)
    return {
        "rows": [row.to_json() for row in rows],
        "average": {
            key: {"mean_pct": mean, "sd_pct": sd} for key, (mean, sd) in summary.items()
        },
    }
