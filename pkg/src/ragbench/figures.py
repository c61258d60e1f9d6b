"""Chart rendering for the report paths: accuracy, factuality, and timing figures.

Figures land next to the markdown/JSON tables as PNG files. The Agg backend
keeps rendering headless.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .factuality import FactualityRow
from .stats import TimingTableRow

_STRATEGY_LABELS = {"zero_shot": "Zero-shot", "rag": "Online RAG", "rar": "Research report"}


def accuracy_figure(rows: list[dict], out_path: str | Path) -> Path:
    """Grouped bars: accuracy percent per model for each strategy.

    Each row is {"model": ..., "<strategy>": {"pct": int, ...}, ...}.
    """
    out_path = Path(out_path)
    strategies = [s for s in ("zero_shot", "rag", "rar") if s in rows[0]]
    models = [r["model"] for r in rows]
    width = 0.8 / len(strategies)
    fig, ax = plt.subplots(figsize=(max(8, 0.45 * len(models)), 4.5))
    for i, strategy in enumerate(strategies):
        values = [r[strategy]["pct"] for r in rows]
        positions = [x + i * width for x in range(len(models))]
        ax.bar(positions, values, width=width, label=_STRATEGY_LABELS.get(strategy, strategy))
    ax.set_xticks([x + width * (len(strategies) - 1) / 2 for x in range(len(models))])
    ax.set_xticklabels(models, rotation=60, ha="right", fontsize=7)
    ax.set_ylabel("Accuracy (%)")
    ax.set_ylim(0, 100)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return out_path


_FACTUALITY_PANELS = (
    ("hallucination", "Hallucination rate"),
    ("correct_despite_irrelevant", "Correct despite irrelevant context"),
    ("rescued", "Zero-shot incorrect, correct with report"),
)


def factuality_figure(rows: list[FactualityRow], out_path: str | Path) -> Path:
    """Three panels of per-model rates, each ordered by descending percentage."""
    out_path = Path(out_path)
    fig, axes = plt.subplots(1, 3, figsize=(15, 0.32 * len(rows) + 2))
    for ax, (key, title) in zip(axes, _FACTUALITY_PANELS):
        ordered = sorted(rows, key=lambda r: (-r.percents()[key], r.model_id))
        names = [r.model_id for r in ordered]
        values = [r.percents()[key] for r in ordered]
        ax.barh(range(len(names)), values, color="#4878a8")
        ax.set_yticks(range(len(names)))
        ax.set_yticklabels(names, fontsize=7)
        ax.invert_yaxis()
        ax.set_xlabel("% of questions")
        ax.set_title(title, fontsize=9)
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return out_path


def timing_figure(rows: list[TimingTableRow], out_path: str | Path) -> Path:
    """Per-model relative slowdown of the report strategy over zero-shot."""
    out_path = Path(out_path)
    model_rows = [r for r in rows if not r.is_group and r.rel_increase is not None]
    ordered = sorted(model_rows, key=lambda r: -r.rel_increase)
    fig, ax = plt.subplots(figsize=(max(6, 0.4 * len(ordered)), 4))
    ax.bar(range(len(ordered)), [r.rel_increase for r in ordered], color="#a85448")
    ax.set_xticks(range(len(ordered)))
    ax.set_xticklabels([r.name for r in ordered], rotation=60, ha="right", fontsize=7)
    ax.set_ylabel("Relative increase (x)")
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return out_path
