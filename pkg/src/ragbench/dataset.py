"""Loading, validation, and serialization of multiple-choice QA datasets.

Canonical on-disk form is a single UTF-8 JSON file per dataset:

    {"name": ..., "questions": [{"id", "stem", "options": {"A": ...},
                                 "correct_letter", "subspecialties": [...]}]}

Option letters are stored explicitly so 4- and 5-option datasets coexist
without special-casing.
"""

from __future__ import annotations

import json
import string
from dataclasses import dataclass, field
from pathlib import Path


class DatasetError(Exception):
    """Raised when a dataset file is missing, unreadable, or violates the schema."""


@dataclass(frozen=True)
class Question:
    """One multiple-choice item."""

    id: str
    stem: str
    options: dict[str, str]  # letter -> option text, insertion-ordered
    correct_letter: str
    subspecialties: frozenset[str] = frozenset()
    dataset_tag: str = ""

    @property
    def letters(self) -> list[str]:
        return list(self.options.keys())

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "stem": self.stem,
            "options": dict(self.options),
            "correct_letter": self.correct_letter,
            "subspecialties": sorted(self.subspecialties),
        }


@dataclass(frozen=True)
class Dataset:
    """An ordered, validated collection of questions."""

    name: str
    questions: tuple[Question, ...] = field(default_factory=tuple)

    def __len__(self) -> int:
        return len(self.questions)

    def __iter__(self):
        return iter(self.questions)

    def by_id(self, question_id: str) -> Question:
        for q in self.questions:
            if q.id == question_id:
                return q
        raise KeyError(question_id)

    def to_json(self) -> dict:
        return {"name": self.name, "questions": [q.to_json() for q in self.questions]}


def _question_violations(q: Question) -> list[str]:
    out = []
    letters = q.letters
    if len(letters) < 2:
        out.append(f"question {q.id}: options: fewer than 2 options")
    expected = list(string.ascii_uppercase[: len(letters)])
    if letters != expected:
        out.append(
            f"question {q.id}: options: letters {letters} are not consecutive from 'A'"
        )
    if q.correct_letter not in q.options:
        out.append(
            f"question {q.id}: correct_letter: {q.correct_letter!r} is not an option letter"
        )
    if not q.stem.strip():
        out.append(f"question {q.id}: stem: empty")
    for letter, text in q.options.items():
        if not str(text).strip():
            out.append(f"question {q.id}: options: option {letter} has empty text")
    return out


def validate(dataset: Dataset) -> list[str]:
    """Return a list of invariant violations; empty iff the dataset is well-formed."""
    violations = []
    if len(dataset.questions) == 0:
        violations.append(f"dataset {dataset.name}: questions: empty dataset")
    seen: set[str] = set()
    for q in dataset.questions:
        if q.id in seen:
            violations.append(f"question {q.id}: id: duplicate id")
        seen.add(q.id)
        violations.extend(_question_violations(q))
    return violations


def _parse_question(obj: dict, name: str) -> Question:
    qid = obj.get("id")
    if not isinstance(qid, str) or not qid:
        raise DatasetError(f"dataset {name}: question with missing or non-string id: {obj!r}")
    for fld in ("stem", "options", "correct_letter"):
        if fld not in obj:
            raise DatasetError(f"question {qid}: missing field {fld!r}")
    options = obj["options"]
    if not isinstance(options, dict) or not all(
        isinstance(k, str) and isinstance(v, str) for k, v in options.items()
    ):
        raise DatasetError(f"question {qid}: options: must map letters to strings")
    subs = obj.get("subspecialties", [])
    if not isinstance(subs, list):
        raise DatasetError(f"question {qid}: subspecialties: must be a list")
    return Question(
        id=qid,
        stem=str(obj["stem"]),
        options=dict(options),
        correct_letter=str(obj["correct_letter"]),
        subspecialties=frozenset(str(s) for s in subs),
        dataset_tag=name,
    )


def load_dataset(path: str | Path, name: str | None = None) -> Dataset:
    """Load and validate a dataset from its canonical JSON file.

    Raises DatasetError on missing files, schema violations (naming the
    offending question and field), and duplicate ids. Question order is
    preserved from the file.
    """
    path = Path(path)
    if not path.is_file():
        raise DatasetError(f"dataset file not found: {path}")
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise DatasetError(f"unreadable dataset file {path}: {exc}") from exc
    if not isinstance(raw, dict) or "questions" not in raw:
        raise DatasetError(f"dataset file {path}: top-level object with 'questions' required")
    resolved = name or raw.get("name") or path.stem
    questions = [_parse_question(obj, resolved) for obj in raw["questions"]]
    ds = Dataset(name=resolved, questions=tuple(questions))
    violations = validate(ds)
    if violations:
        raise DatasetError("; ".join(violations))
    return ds


def save_dataset(dataset: Dataset, path: str | Path) -> None:
    """Serialize a dataset back to its canonical JSON form."""
    Path(path).write_text(
        json.dumps(dataset.to_json(), indent=2, ensure_ascii=False) + "\n",
        encoding="utf-8",
    )
