"""Append-only persistence: event ledger, reading trace, calibration store.

The ledger is JSON Lines, one entry per line, with a gapless monotone `seq`.
Alert and SMS entries are fsynced before `append` returns; reading entries are
only flushed (they are high-volume and tolerably lossy on crash, alerts are
not). On open, a file truncated mid-line by a crash is recovered to its last
complete entry and numbering continues from there.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from pathlib import Path

from .errors import NotCalibrated, ReplayError, StorageError
from .sensors import CalibrationRecord

# Entry kinds that must hit the disk before the gateway moves on.
DURABLE_KINDS = frozenset({"alert", "sms"})


@dataclass(frozen=True)
class LedgerEntry:
    seq: int
    kind: str
    t_ms: int
    wall: str
    payload: dict

    def to_dict(self) -> dict:
        return {
            "seq": self.seq,
            "kind": self.kind,
            "t_ms": self.t_ms,
            "wall": self.wall,
            "payload": self.payload,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "LedgerEntry":
        return cls(
            seq=int(d["seq"]),
            kind=str(d["kind"]),
            t_ms=int(d["t_ms"]),
            wall=str(d["wall"]),
            payload=dict(d["payload"]),
        )


def _parse_line(line: str, line_no: int) -> LedgerEntry:
    try:
        return LedgerEntry.from_dict(json.loads(line))
    except (ValueError, KeyError, TypeError) as exc:
        raise ReplayError(f"corrupt ledger line {line_no}: {exc}", line_no) from exc


class Ledger:
    """Single-writer append-only event log backed by one JSONL file."""

    def __init__(self, path: str | os.PathLike):
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self.entries: list[LedgerEntry] = []
        self._recover()
        self._file = open(self.path, "a", encoding="utf-8")

    def _recover(self) -> None:
        """Load the valid prefix of an existing file; drop a torn tail line."""
        if not self.path.exists():
            return
        good_bytes = 0
        with open(self.path, "rb") as f:
            data = f.read()
        for raw in data.splitlines(keepends=True):
            if not raw.endswith(b"\n"):
                break  # torn tail: crash mid-write
            try:
                entry = _parse_line(raw.decode("utf-8"), len(self.entries) + 1)
            except (ReplayError, UnicodeDecodeError):
                break
            if self.entries and entry.seq != self.entries[-1].seq + 1:
                break  # out-of-sequence tail is not ours
            self.entries.append(entry)
            good_bytes += len(raw)
        if good_bytes < len(data):
            with open(self.path, "r+b") as f:
                f.truncate(good_bytes)

    @property
    def last_seq(self) -> int:
        return self.entries[-1].seq if self.entries else 0

    def append(self, kind: str, payload: dict, t_ms: int, wall: str) -> int:
        entry = LedgerEntry(self.last_seq + 1, kind, t_ms, wall, payload)
        try:
            self._file.write(json.dumps(entry.to_dict(), separators=(",", ":")) + "\n")
            self._file.flush()
            if kind in DURABLE_KINDS:
                os.fsync(self._file.fileno())
        except OSError as exc:
            raise StorageError(f"ledger append failed: {exc}") from exc
        self.entries.append(entry)
        return entry.seq

    def replay(self, from_seq: int = 1) -> list[LedgerEntry]:
        """Strict re-read from disk; raises ReplayError naming a corrupt line."""
        if from_seq < 1:
            raise ReplayError(f"from_seq must be >= 1, got {from_seq}", 0)
        return replay_file(self.path, from_seq)

    def since(self, seq: int, kinds: frozenset[str] | None = None) -> list[LedgerEntry]:
        """In-memory query: entries with seq > `seq`, optionally kind-filtered."""
        out = [e for e in self.entries if e.seq > seq]
        if kinds is not None:
            out = [e for e in out if e.kind in kinds]
        return out

    def close(self) -> None:
        if not self._file.closed:
            self._file.flush()
            self._file.close()


def replay_file(path: str | os.PathLike, from_seq: int = 1) -> list[LedgerEntry]:
    """Parse a ledger file; every line must be a complete entry."""
    path = Path(path)
    if not path.exists():
        return []
    out = []
    with open(path, "r", encoding="utf-8") as f:
        for i, line in enumerate(f, start=1):
            entry = _parse_line(line.rstrip("\n") if line.endswith("\n") else line, i)
            if not line.endswith("\n"):
                raise ReplayError(f"corrupt ledger line {i}: truncated", i)
            if entry.seq >= from_seq:
                out.append(entry)
    return out


class ReadingLog:
    """Trace export: one reading per line, rotated when it outgrows max_bytes."""

    def __init__(self, path: str | os.PathLike, max_bytes: int = 50_000_000):
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self.max_bytes = max_bytes
        self._file = open(self.path, "a", encoding="utf-8")
        self._bytes = self.path.stat().st_size

    def write(self, reading: dict) -> None:
        if self._bytes >= self.max_bytes:
            self._rotate()
        try:
            line = json.dumps(reading, separators=(",", ":")) + "\n"
            self._file.write(line)
            self._bytes += len(line)
        except OSError as exc:
            raise StorageError(f"reading append failed: {exc}") from exc

    def flush(self) -> None:
        self._file.flush()

    def _rotate(self) -> None:
        self._file.close()
        self.path.replace(self.path.with_suffix(self.path.suffix + ".1"))
        self._file = open(self.path, "a", encoding="utf-8")
        self._bytes = 0

    def close(self) -> None:
        if not self._file.closed:
            self._file.flush()
            self._file.close()


class CalibrationStore:
    """Last-write-wins calibration records, one JSON document keyed by device."""

    def __init__(self, path: str | os.PathLike):
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)

    def _read_all(self) -> dict:
        if not self.path.exists():
            return {}
        with open(self.path, "r", encoding="utf-8") as f:
            return json.load(f)

    def save(self, device_id: str, record: CalibrationRecord) -> None:
        doc = self._read_all()
        doc[device_id] = record.to_dict()
        tmp = self.path.with_suffix(".tmp")
        try:
            with open(tmp, "w", encoding="utf-8") as f:
                json.dump(doc, f, indent=2, sort_keys=True)
                f.flush()
                os.fsync(f.fileno())
            tmp.replace(self.path)
        except OSError as exc:
            raise StorageError(f"calibration save failed: {exc}") from exc

    def load(self, device_id: str) -> CalibrationRecord:
        doc = self._read_all()
        if device_id not in doc:
            raise NotCalibrated(f"no calibration stored for {device_id!r}")
        return CalibrationRecord.from_dict(doc[device_id])
