"""Append-only persistence for samples and sessions.

Default backend is newline-delimited JSON under a root directory:

    samples/ch{ID}/{YYYY-MM-DD}.ndjson     one line per pressure frame
    sessions/{YYYY-MM-DD}.ndjson           one line per closed session

Records are never mutated; replay reads them back in insertion order. A
document database can be swapped in behind the same interface.
"""

from __future__ import annotations

import json
import threading
from abc import ABC, abstractmethod
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

from .report import SessionRecord
from .model import SmartChairError


class StoreError(SmartChairError):
    """Persistence failure; live processing continues without it."""


@dataclass(frozen=True)
class SampleRecord:
    """One stored pressure frame."""

    chair_id: int
    data: tuple[float, ...]
    sum: float
    ts: float

    def to_dict(self) -> dict:
        return {"chairId": self.chair_id, "data": list(self.data), "sum": self.sum, "ts": self.ts}

    @classmethod
    def from_dict(cls, raw: dict) -> "SampleRecord":
        return cls(
            chair_id=raw["chairId"],
            data=tuple(float(v) for v in raw["data"]),
            sum=float(raw["sum"]),
            ts=float(raw["ts"]),
        )


def day_of(ts: float) -> str:
    return datetime.fromtimestamp(ts, tz=timezone.utc).strftime("%Y-%m-%d")


class ChairStore(ABC):
    """Storage contract: append-only writes, ordered reads."""

    @abstractmethod
    def append_sample(self, record: SampleRecord) -> None:
        ...

    @abstractmethod
    def close_session(self, record: SessionRecord) -> None:
        ...

    @abstractmethod
    def query(self, chair_id: int, t0: float, t1: float) -> list[SampleRecord]:
        """Samples with ts in [t0, t1], insertion order."""

    @abstractmethod
    def sessions(self, chair_id: int, day: str) -> list[SessionRecord]:
        ...

    def close(self) -> None:
        pass


class MemoryStore(ChairStore):
    """List-backed store for tests and storeless scenario runs."""

    def __init__(self):
        self._samples: list[SampleRecord] = []
        self._sessions: list[SessionRecord] = []
        self._lock = threading.Lock()

    def append_sample(self, record: SampleRecord) -> None:
        with self._lock:
            self._samples.append(record)

    def close_session(self, record: SessionRecord) -> None:
        with self._lock:
            self._sessions.append(record)

    def query(self, chair_id: int, t0: float, t1: float) -> list[SampleRecord]:
        if t0 > t1:
            raise ValueError(f"query range reversed: {t0} > {t1}")
        with self._lock:
            return [r for r in self._samples if r.chair_id == chair_id and t0 <= r.ts <= t1]

    def sessions(self, chair_id: int, day: str) -> list[SessionRecord]:
        with self._lock:
            return [
                r for r in self._sessions if r.chair_id == chair_id and day_of(r.start_time) == day
            ]


class NdjsonStore(ChairStore):
    """Segment files of JSON lines, one per chair-day plus a session log."""

    def __init__(self, root: str | Path):
        self.root = Path(root)
        (self.root / "samples").mkdir(parents=True, exist_ok=True)
        (self.root / "sessions").mkdir(parents=True, exist_ok=True)
        self._handles: dict[Path, object] = {}
        self._lock = threading.Lock()

    def _append_line(self, path: Path, doc: dict) -> None:
        line = json.dumps(doc, separators=(",", ":"))
        with self._lock:
            fh = self._handles.get(path)
            if fh is None:
                try:
                    path.parent.mkdir(parents=True, exist_ok=True)
                    fh = path.open("a", encoding="utf-8")
                except OSError as err:
                    raise StoreError(f"cannot open {path}: {err}") from err
                self._handles[path] = fh
            try:
                fh.write(line + "\n")
                fh.flush()
            except OSError as err:
                raise StoreError(f"write to {path} failed: {err}") from err

    def _sample_path(self, chair_id: int, day: str) -> Path:
        return self.root / "samples" / f"ch{chair_id}" / f"{day}.ndjson"

    def _session_path(self, day: str) -> Path:
        return self.root / "sessions" / f"{day}.ndjson"

    def append_sample(self, record: SampleRecord) -> None:
        self._append_line(self._sample_path(record.chair_id, day_of(record.ts)), record.to_dict())

    def close_session(self, record: SessionRecord) -> None:
        self._append_line(self._session_path(day_of(record.start_time)), record.to_dict())

    def query(self, chair_id: int, t0: float, t1: float) -> list[SampleRecord]:
        if t0 > t1:
            raise ValueError(f"query range reversed: {t0} > {t1}")
        chair_dir = self.root / "samples" / f"ch{chair_id}"
        if not chair_dir.is_dir():
            return []
        out: list[SampleRecord] = []
        for path in sorted(chair_dir.glob("*.ndjson")):
            if not (day_of(t0) <= path.stem <= day_of(t1)):
                continue
            for doc in _read_lines(path):
                if t0 <= doc["ts"] <= t1:
                    out.append(SampleRecord.from_dict(doc))
        return out

    def sessions(self, chair_id: int, day: str) -> list[SessionRecord]:
        path = self._session_path(day)
        if not path.is_file():
            return []
        return [
            SessionRecord.from_dict(doc)
            for doc in _read_lines(path)
            if doc.get("chairId") == chair_id
        ]

    def sample_days(self, chair_id: int) -> list[str]:
        chair_dir = self.root / "samples" / f"ch{chair_id}"
        if not chair_dir.is_dir():
            return []
        return sorted(p.stem for p in chair_dir.glob("*.ndjson"))

    def compact(self, cutoff_day: str) -> int:
        """Drop raw sample files for days before cutoff; sessions are kept."""
        removed = 0
        with self._lock:
            for path in sorted((self.root / "samples").glob("ch*/*.ndjson")):
                if path.stem < cutoff_day:
                    fh = self._handles.pop(path, None)
                    if fh is not None:
                        fh.close()
                    path.unlink()
                    removed += 1
        return removed

    def close(self) -> None:
        with self._lock:
            for fh in self._handles.values():
                fh.close()
            self._handles.clear()


def _read_lines(path: Path):
    with path.open("r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                yield json.loads(line)
