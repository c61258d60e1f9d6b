"""Shared fixtures and the acceptance-suite summary reporter."""

from __future__ import annotations

from collections import defaultdict
from pathlib import Path

import pytest

ROOT = Path(__file__).resolve().parent.parent
FIXTURES = ROOT / "fixtures"
GOLDENS = Path(__file__).resolve().parent / "goldens"

CRITERIA_LABELS = {
    "c01": "accuracy-table regression from shipped counts",
    "c02": "scaling-family Pearson reproduction",
    "c03": "subgroup paired t-test reproduction",
    "c04": "factuality-table reproduction",
    "c05": "timing arithmetic reproduction",
    "c06": "statistics oracles",
    "c07": "orchestrator end-to-end determinism",
    "c08": "crash-safety resume sweep",
    "c09": "prompt fidelity golden files",
    "c10": "retrieval baseline oracles",
}


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture(scope="session")
def goldens_dir() -> Path:
    return GOLDENS


@pytest.fixture(scope="session")
def mock_config_path() -> Path:
    return FIXTURES / "mock" / "config.json"


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """Print one pass/fail line per acceptance criterion."""
    outcomes: dict[str, list[bool]] = defaultdict(list)
    for status in ("passed", "failed", "error"):
        for report in terminalreporter.stats.get(status, []):
            nodeid = getattr(report, "nodeid", "")
            if "test_acceptance.py::test_" not in nodeid:
                continue
            name = nodeid.split("::test_", 1)[1]
            criterion = name.split("_", 1)[0]
            if criterion in CRITERIA_LABELS:
                outcomes[criterion].append(status == "passed")
    if not outcomes:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for criterion in sorted(CRITERIA_LABELS):
        if criterion not in outcomes:
            continue
        results = outcomes[criterion]
        verdict = "PASS" if all(results) else "FAIL"
        detail = f"{sum(results)}/{len(results)} checks"
        terminalreporter.write_line(
            f"{verdict}  {criterion.upper()}  {CRITERIA_LABELS[criterion]} ({detail})"
        )
