"""Factuality metrics: hand-enumerated oracle, fixture rows, and the summary."""

import json

import pytest

from ragbench.factuality import (
    FactualityError,
    factuality_row,
    factuality_summary,
    load_labels,
    render_markdown_table,
)


def test_hand_enumerated_six_question_case():
    # Worked out by hand: labels R R R I I I; rar correct on q1,q2,q4;
    # zero-shot correct on q1,q6.
    labels = {f"q{i}": i <= 3 for i in range(1, 7)}
    rar = {"q1": True, "q2": True, "q3": False, "q4": True, "q5": False, "q6": False}
    zs = {"q1": True, "q2": False, "q3": False, "q4": False, "q5": False, "q6": True}
    row = factuality_row(labels, rar, zs, "m", 6)
    assert row.context_relevant == (3, 6)
    assert row.hallucination == (1, 6)            # q3: relevant, rar wrong
    assert row.correct_despite_irrelevant == (1, 6)  # q4: irrelevant, rar right
    assert row.rescued == (2, 6)                  # q2, q4: zs wrong -> rar right


def test_all_correct_all_relevant_has_no_failures():
    labels = {f"q{i}": True for i in range(4)}
    full = {f"q{i}": True for i in range(4)}
    row = factuality_row(labels, full, full, "m", 4)
    assert row.hallucination == (0, 4)
    assert row.correct_despite_irrelevant == (0, 4)


def test_coverage_gap_names_missing_questions():
    labels = {"q1": True, "q2": False}
    with pytest.raises(FactualityError, match="q2"):
        factuality_row(labels, {"q1": True}, {"q1": True, "q2": True}, "m", 2)


def test_reference_fixture_reproduces_first_row(fixtures_dir):
    outcomes = json.loads((fixtures_dir / "reference" / "outcomes_104.json").read_text())
    labels = load_labels(fixtures_dir / "reference" / "labels_104.json")
    qids = outcomes["question_ids"]
    vectors = outcomes["models"]["Ministral-8B"]
    row = factuality_row(
        labels,
        dict(zip(qids, vectors["rar"])),
        dict(zip(qids, vectors["zero_shot"])),
        "Ministral-8B",
        outcomes["n"],
    )
    assert row.hallucination == (15, 104)
    assert row.correct_despite_irrelevant == (36, 104)
    assert row.rescued == (27, 104)
    assert row.percents() == {
        "context_relevant": 46,
        "hallucination": 14,
        "correct_despite_irrelevant": 35,
        "rescued": 26,
    }


def _rows_from_reference(fixtures_dir):
    outcomes = json.loads((fixtures_dir / "reference" / "outcomes_104.json").read_text())
    labels = load_labels(fixtures_dir / "reference" / "labels_104.json")
    qids = outcomes["question_ids"]
    rows = []
    for model, vectors in outcomes["models"].items():
        rows.append(
            factuality_row(
                labels,
                dict(zip(qids, vectors["rar"])),
                dict(zip(qids, vectors["zero_shot"])),
                model,
                outcomes["n"],
            )
        )
    return rows


def test_relevance_column_identical_across_models(fixtures_dir):
    rows = _rows_from_reference(fixtures_dir)
    assert {row.context_relevant for row in rows} == {(48, 104)}


def test_hallucination_partition_invariant(fixtures_dir):
    # hallucination + (relevant and correct) = relevant, per model
    outcomes = json.loads((fixtures_dir / "reference" / "outcomes_104.json").read_text())
    labels = load_labels(fixtures_dir / "reference" / "labels_104.json")
    qids = outcomes["question_ids"]
    for model, vectors in outcomes["models"].items():
        rar = dict(zip(qids, vectors["rar"]))
        relevant_correct = sum(1 for q in qids if labels[q] and rar[q])
        row = factuality_row(labels, rar, dict(zip(qids, vectors["zero_shot"])), model, 104)
        assert row.hallucination[0] + relevant_correct == 48


def test_summary_two_hand_rows():
    rows = _make_rows_with_hallucination_percents([10, 20])
    mean, sd = factuality_summary(rows)["hallucination"]
    assert mean == pytest.approx(15.0)
    assert sd == pytest.approx(7.0710678, abs=1e-6)


def test_summary_identical_rows_sd_zero():
    rows = _make_rows_with_hallucination_percents([12, 12, 12])
    mean, sd = factuality_summary(rows)["hallucination"]
    assert (mean, sd) == (12.0, 0.0)


def test_summary_requires_two_rows():
    rows = _make_rows_with_hallucination_percents([10])
    with pytest.raises(FactualityError):
        factuality_summary(rows)


def _make_rows_with_hallucination_percents(percents):
    from ragbench.factuality import FactualityRow

    return [
        FactualityRow(
            model_id=f"m{i}",
            context_relevant=(50, 100),
            hallucination=(p, 100),
            correct_despite_irrelevant=(0, 100),
            rescued=(0, 100),
        )
        for i, p in enumerate(percents)
    ]


def test_markdown_renders_average_row(fixtures_dir):
    rows = _rows_from_reference(fixtures_dir)
    table = render_markdown_table(rows)
    assert "| Ministral-8B | 46% (48/104) | 14% (15/104) | 35% (36/104) | 26% (27/104) |" in table
    assert "9.2% ± 6.1%" in table


def test_load_labels_validates(tmp_path):
    path = tmp_path / "labels.json"
    path.write_text(json.dumps({"q1": "yes"}))
    with pytest.raises(FactualityError):
        load_labels(path)
