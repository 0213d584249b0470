"""Append-only stage journal stored as JSON lines beside the stage outputs.

Every stage appends a ``started`` record and, once all of its outputs are in
place, a ``completed`` record. The latest record per stage is authoritative,
so a crash mid-stage leaves that stage incomplete and it is re-run.
"""

from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path

JOURNAL_NAME = "journal.jsonl"


def now_iso() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="milliseconds")


@dataclass
class StageRecord:
    stage: str
    inputs_digest: str
    outputs: list[str] = field(default_factory=list)
    produced: int = 0
    duplicates: int = 0
    failures: int = 0
    running_total: int | None = None
    accounting: list[dict] = field(default_factory=list)
    started: str = ""
    finished: str = ""
    completed: bool = False


class Journal:
    def __init__(self, directory: str | os.PathLike[str]) -> None:
        self.directory = Path(directory)
        self.path = self.directory / JOURNAL_NAME

    def records(self) -> list[StageRecord]:
        if not self.path.exists():
            return []
        out = []
        with open(self.path, encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                try:
                    out.append(StageRecord(**json.loads(line)))
                except (ValueError, TypeError):
                    # A torn final line from a crash mid-append.
                    continue
        return out

    def latest(self) -> dict[str, StageRecord]:
        return {r.stage: r for r in self.records()}

    def append(self, record: StageRecord) -> None:
        self.directory.mkdir(parents=True, exist_ok=True)
        with open(self.path, "a", encoding="utf-8") as fh:
            fh.write(json.dumps(asdict(record), sort_keys=True) + "\n")
            fh.flush()
            os.fsync(fh.fileno())
