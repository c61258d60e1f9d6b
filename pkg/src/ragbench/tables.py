"""Assembly of the accuracy, subgroup, scaling, and timing report tables.

Inputs are consolidated JSON artifacts: per-strategy correct counts, full
paired outcome matrices, or raw timing vectors. Outputs are row dicts ready
for markdown/JSON rendering; bootstrap seeds and redraw counts are embedded
so results are reproducible.
"""

from __future__ import annotations

import json
from pathlib import Path

from .adjudication import percent
from .stats import (
    amortize_overhead,
    bootstrap_paired,
    discordant_counts,
    fdr_bh,
    mcnemar_exact,
    paired_t,
    pearson,
    timing_table,
    tukey_clean,
    TimingTableRow,
)

STRATEGY_ORDER = ("zero_shot", "rag", "rar")


class TableError(Exception):
    pass


def load_json(path: str | Path) -> dict:
    return json.loads(Path(path).read_text(encoding="utf-8"))


def accuracy_rows_from_counts(counts: dict) -> list[dict]:
    """Accuracy rows from {n, rows: [{model, <strategy>: {count, ...}}]}."""
    n = counts["n"]
    rows = []
    for source in counts["rows"]:
        row: dict = {"model": source["model"], "n": n}
        for strategy in STRATEGY_ORDER:
            if strategy not in source:
                continue
            cell = source[strategy]
            entry = {"count": cell["count"], "pct": percent(cell["count"], n)}
            for passthrough in ("reported_pct", "reported_p_adj"):
                if passthrough in cell:
                    entry[passthrough] = cell[passthrough]
            row[strategy] = entry
        rows.append(row)
    return rows


def accuracy_rows_from_outcomes(outcomes: dict, seed: int = 0, redraws: int = 1000) -> list[dict]:
    """Full accuracy rows from paired boolean outcome vectors.

    Bootstrap uses identical redraws across all strategies of one model;
    McNemar compares each baseline strategy against the report strategy and
    p-values are FDR-adjusted across models within each comparison family.
    """
    n = outcomes["n"]
    models = outcomes["models"]
    rows = []
    raw_p: dict[str, dict[str, float]] = {s: {} for s in ("zero_shot", "rag")}
    for model, vectors in models.items():
        present = [s for s in STRATEGY_ORDER if s in vectors]
        boots = bootstrap_paired({s: vectors[s] for s in present}, redraws=redraws, seed=seed)
        row: dict = {"model": model, "n": n}
        for strategy in present:
            vec = vectors[strategy]
            if len(vec) != n:
                raise TableError(f"{model}/{strategy}: vector length {len(vec)} != n {n}")
            count = sum(1 for v in vec if v)
            boot = boots[strategy]
            row[strategy] = {
                "count": count,
                "pct": percent(count, n),
                "boot_mean": boot.mean,
                "boot_sd": boot.sd,
                "ci_low": boot.ci_low,
                "ci_high": boot.ci_high,
            }
        if "rar" in vectors:
            for strategy in ("zero_shot", "rag"):
                if strategy in vectors:
                    b, c = discordant_counts(vectors[strategy], vectors["rar"])
                    p = mcnemar_exact(b, c)
                    row[strategy]["p_raw"] = p
                    raw_p[strategy][model] = p
        rows.append(row)
    for strategy, by_model in raw_p.items():
        if not by_model:
            continue
        names = list(by_model)
        adjusted = fdr_bh([by_model[name] for name in names])
        for name, q in zip(names, adjusted):
            for row in rows:
                if row["model"] == name:
                    row[strategy]["p_adj"] = q
    return rows


def render_accuracy_markdown(rows: list[dict], metadata: dict | None = None) -> str:
    headers = ["Model"]
    strategies = [s for s in STRATEGY_ORDER if any(s in r for r in rows)]
    titles = {"zero_shot": "Zero-shot", "rag": "Online RAG", "rar": "Research report"}
    for strategy in strategies:
        headers.append(f"{titles[strategy]} % (n)")
        if any("p_adj" in r.get(strategy, {}) for r in rows) and strategy != "rar":
            headers.append("p (adj)")
    lines = ["| " + " | ".join(headers) + " |", "|" + "---|" * len(headers)]
    for row in rows:
        cells = [row["model"]]
        for strategy in strategies:
            entry = row.get(strategy)
            if entry is None:
                cells.append("-")
            elif "boot_sd" in entry:
                cells.append(
                    f"{entry['pct']} ± {entry['boot_sd']:.0f} "
                    f"[{entry['ci_low']:.0f}, {entry['ci_high']:.0f}] ({entry['count']})"
                )
            else:
                cells.append(f"{entry['pct']} ({entry['count']})")
            if f"{titles[strategy]} % (n)" in headers and strategy != "rar":
                if any("p_adj" in r.get(strategy, {}) for r in rows):
                    p_adj = entry.get("p_adj") if entry else None
                    cells.append(f"{p_adj:.3f}" if p_adj is not None else "-")
        lines.append("| " + " | ".join(cells) + " |")
    text = "\n".join(lines) + "\n"
    if metadata:
        text += "\n" + " ".join(f"{k}={v}" for k, v in metadata.items()) + "\n"
    return text


def _cell_pct(row: dict, strategy: str) -> float:
    """Accuracy for cross-model analyses; published integers take precedence
    over recomputed ones when a reference fixture carries both."""
    cell = row[strategy]
    return float(cell.get("reported_pct", cell["pct"]))


def subgroup_report(rows: list[dict], subgroups: dict[str, list[str]]) -> dict:
    """Paired t-tests of zero-shot vs report accuracy across each subgroup's models."""
    by_model = {row["model"]: row for row in rows}
    out = {}
    for name, members in subgroups.items():
        missing = [m for m in members if m not in by_model]
        if missing:
            raise TableError(f"subgroup {name}: missing accuracy rows for {missing}")
        rar = [_cell_pct(by_model[m], "rar") for m in members]
        zs = [_cell_pct(by_model[m], "zero_shot") for m in members]
        result = paired_t(rar, zs)
        out[name] = {
            "models": members,
            "mean_diff_pp": result.mean_diff,
            "ci_low": result.ci_low,
            "ci_high": result.ci_high,
            "t": result.t,
            "df": result.df,
            "p": result.p,
            "d_z": result.d_z,
        }
    return out


def render_subgroups_markdown(report: dict) -> str:
    lines = [
        "| Subgroup | n models | Mean diff (pp) | 95% CI | t | p | d_z |",
        "|---|---|---|---|---|---|---|",
    ]
    for name, row in report.items():
        lines.append(
            f"| {name} | {len(row['models'])} | {row['mean_diff_pp']:+.2f} "
            f"| [{row['ci_low']:.2f}, {row['ci_high']:.2f}] | {row['t']:.2f} "
            f"| {row['p']:.3f} | {row['d_z']:.2f} |"
        )
    return "\n".join(lines) + "\n"


def scaling_report(rows: list[dict], family: dict) -> dict:
    """Pearson correlation of parameter count vs accuracy inside one model family."""
    by_model = {row["model"]: row for row in rows}
    sizes = [float(s) for s in family["sizes_b"]]
    members = family["models"]
    if len(sizes) != len(members):
        raise TableError("scaling family sizes and models differ in length")
    out = {"family": family.get("name", "family"), "sizes_b": sizes, "r": {}}
    for strategy in STRATEGY_ORDER:
        if all(strategy in by_model.get(m, {}) for m in members):
            accuracies = [_cell_pct(by_model[m], strategy) for m in members]
            out["r"][strategy] = pearson(sizes, accuracies)
    return out


def timing_rows(timing: dict, groups: dict[str, list[str]] | None = None) -> list[TimingTableRow]:
    """Tukey-clean both vectors, amortize the fixed overhead into the report times.

    Groups apply only when every member has timing data; partially covered
    groups are dropped rather than silently computed over a subset.
    """
    n = timing["n"]
    overhead = float(timing.get("overhead_s", 0.0))
    model_times = {}
    for model, vectors in timing["models"].items():
        zs = tukey_clean([float(v) for v in vectors["zero_shot"]])
        rar = tukey_clean([float(v) for v in vectors["rar"]])
        rar = amortize_overhead(rar, overhead, n)
        model_times[model] = (zs, rar)
    usable_groups = {
        name: members
        for name, members in (groups or {}).items()
        if members and all(m in model_times for m in members)
    }
    return timing_table(model_times, usable_groups)


def render_timing_markdown(rows: list[TimingTableRow]) -> str:
    lines = [
        "| Model / group | Zero-shot (s) | Report (s) | Abs diff (s) | Rel increase |",
        "|---|---|---|---|---|",
    ]
    for row in rows:
        name = f"**{row.name}**" if row.is_group else row.name
        rel = f"{row.rel_increase:.1f} x" if row.rel_increase is not None else "-"
        lines.append(
            f"| {name} | {row.zs_mean:.1f} ± {row.zs_sd:.1f} "
            f"| {row.rar_mean:.1f} ± {row.rar_sd:.1f} "
            f"| {row.abs_diff:.1f} | {rel} |"
        )
    return "\n".join(lines) + "\n"
