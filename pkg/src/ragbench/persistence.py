"""Crash-safe NDJSON checkpointing with resume and consolidation.

One JSON object per line, flushed and fsynced per record so an interrupted
process loses at most the line being written. A truncated final line is
tolerated on read and treated as absent.
"""

from __future__ import annotations

import json
import os
import threading
from pathlib import Path
from typing import Callable, Iterator


class PersistenceError(Exception):
    pass


def _dumps(record: dict) -> str:
    return json.dumps(record, ensure_ascii=False, separators=(", ", ": "))


class CheckpointWriter:
    """Serialized appender for one NDJSON checkpoint file.

    `after_append` is a test hook invoked (under the writer lock) after each
    durable append; raising from it simulates a crash at a record boundary.
    """

    def __init__(self, path: str | Path, after_append: Callable[[dict], None] | None = None):
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()
        self._after_append = after_append

    def append(self, record: dict) -> None:
        if "question_id" not in record or "kind" not in record:
            raise PersistenceError(
                f"checkpoint record requires question_id and kind: {sorted(record)}"
            )
        line = _dumps(record) + "\n"
        with self._lock:
            with open(self.path, "a", encoding="utf-8") as fh:
                fh.write(line)
                fh.flush()
                os.fsync(fh.fileno())
            if self._after_append is not None:
                self._after_append(record)


def append_record(path: str | Path, record: dict) -> None:
    CheckpointWriter(path).append(record)


def iter_records(path: str | Path) -> Iterator[dict]:
    """Yield well-formed records in file order; skip a truncated final line."""
    path = Path(path)
    if not path.exists():
        return
    with open(path, "r", encoding="utf-8") as fh:
        pending = None
        for raw in fh:
            if pending is not None:
                # An unparseable line that was not the last one is corruption,
                # not an interrupted write.
                raise PersistenceError(f"corrupt checkpoint line in {path}: {pending[:80]!r}")
            try:
                record = json.loads(raw)
            except json.JSONDecodeError:
                pending = raw
                continue
            if not isinstance(record, dict):
                raise PersistenceError(f"non-object checkpoint line in {path}")
            yield record


def completed_ids(path: str | Path, kind: str) -> set[str]:
    """Question ids of all well-formed records of the given kind; {} if the file is missing."""
    return {
        record["question_id"]
        for record in iter_records(path)
        if record.get("kind") == kind and "question_id" in record
    }


def consolidate(path: str | Path, out: str | Path) -> list[dict]:
    """Collapse a checkpoint into one JSON array.

    Duplicate (question_id, kind) pairs resolve to the last occurrence's
    content, kept at the position of the first occurrence so a repaired
    record does not reorder the batch.
    """
    order: list[tuple[str, str]] = []
    latest: dict[tuple[str, str], dict] = {}
    for record in iter_records(path):
        key = (record.get("question_id", ""), record.get("kind", ""))
        if key not in latest:
            order.append(key)
        latest[key] = record
    records = [latest[key] for key in order]
    out = Path(out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(
        json.dumps(records, ensure_ascii=False, indent=2) + "\n", encoding="utf-8"
    )
    return records


def load_consolidated(path: str | Path) -> list[dict]:
    path = Path(path)
    if not path.exists():
        raise PersistenceError(f"consolidated file not found: {path}")
    data = json.loads(path.read_text(encoding="utf-8"))
    if not isinstance(data, list):
        raise PersistenceError(f"consolidated file is not a JSON array: {path}")
    return data
