"""JSONL run logs, replay cassettes, and atomic file writes.

Every artifact a command produces is written via a temp file plus rename so
that interrupted runs never leave half-written outputs behind.
"""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
from pathlib import Path
from typing import Any, Iterable, Iterator

from .errors import CorruptLogError


def dumps_record(record: dict[str, Any]) -> str:
    """Serialize one log record compactly with stable field order."""
    return json.dumps(record, separators=(",", ":"), ensure_ascii=False)


def atomic_write_text(path: str | Path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_jsonl(path: str | Path, records: Iterable[dict[str, Any]]) -> None:
    atomic_write_text(path, "".join(dumps_record(r) + "\n" for r in records))


def read_jsonl(path: str | Path) -> list[dict[str, Any]]:
    """Read a JSONL file, raising CorruptLogError on any bad line."""
    out: list[dict[str, Any]] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                row = json.loads(line)
            except json.JSONDecodeError as e:
                raise CorruptLogError(f"{path}:{lineno}: {e}") from e
            if not isinstance(row, dict):
                raise CorruptLogError(f"{path}:{lineno}: record is not an object")
            out.append(row)
    return out


def iter_jsonl(path: str | Path) -> Iterator[dict[str, Any]]:
    yield from read_jsonl(path)


def sha256_hex(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def prompt_sha(system_text: str, user_text: str) -> str:
    """Stable digest for keying cassette entries to prompts."""
    return sha256_hex(system_text + "\x00" + user_text)


class JsonlSink:
    """Collects records in memory; flush() writes them atomically."""

    def __init__(self, path: str | Path | None = None):
        self.path = Path(path) if path is not None else None
        self.records: list[dict[str, Any]] = []

    def emit(self, record: dict[str, Any]) -> None:
        self.records.append(record)

    def flush(self) -> None:
        if self.path is not None:
            write_jsonl(self.path, self.records)
