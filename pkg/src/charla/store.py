"""Append-only JSONL persistence for turns, sensitivity, alerts and profiles.

Turn records land in per-day files (turns-YYYYMMDD.jsonl) under one log
directory, together with sensitivity.jsonl, alerts.jsonl, profiles.jsonl and
a compact index.json written on close. Readers tolerate a truncated final
line, so a crash mid-write loses at most the last record.
"""

from __future__ import annotations

import csv
import glob
import json
import logging
import threading
from dataclasses import asdict
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterator

from . import commands
from .model import (
    AlertRecord,
    Engine,
    SensitivityLevel,
    SensitivityOrigin,
    SensitivityRecord,
    Speaker,
    TurnRecord,
)

log = logging.getLogger(__name__)


def iso_utc(epoch: float) -> str:
    return datetime.fromtimestamp(epoch, tz=timezone.utc).isoformat()


def parse_iso(stamp: str) -> float:
    return datetime.fromisoformat(stamp).timestamp()


def day_bucket(epoch: float) -> str:
    return datetime.fromtimestamp(epoch, tz=timezone.utc).strftime("%Y%m%d")


def iter_jsonl(path: Path) -> Iterator[dict]:
    """Yield parsed records, skipping blanks and a torn final line."""
    if not path.exists():
        return
    with path.open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            stripped = line.strip()
            if not stripped:
                continue
            try:
                yield json.loads(stripped)
            except json.JSONDecodeError:
                log.warning("skipping unparseable line %d in %s", lineno, path.name)


def _append_jsonl(fh, record: dict) -> None:
    fh.write(json.dumps(record, ensure_ascii=False) + "\n")
    fh.flush()


class LogStore:
    """Per-day JSONL files of TurnRecords with per-alias turn indices."""

    def __init__(self, root: str | Path) -> None:
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()
        self._handles: dict[str, object] = {}
        self._next_index: dict[str, int] = {}
        self._rebuild_index()

    # -- index ------------------------------------------------------------
    def _rebuild_index(self) -> None:
        self._next_index.clear()
        self._total = 0
        for record in self._iter_raw():
            alias = record["alias"]
            idx = int(record["turn_index"])
            self._total += 1
            if idx >= self._next_index.get(alias, 0):
                self._next_index[alias] = idx + 1

    def next_index(self, alias: str) -> int:
        return self._next_index.get(alias, 0)

    @property
    def total_appended(self) -> int:
        return self._total

    # -- writes -----------------------------------------------------------
    def append(self, record: TurnRecord) -> TurnRecord:
        with self._lock:
            expected = self._next_index.get(record.alias, 0)
            if record.turn_index < 0:
                record.turn_index = expected
            elif record.turn_index < expected:
                raise ValueError(
                    f"turn_index regression for {record.alias}: "
                    f"{record.turn_index} < {expected}"
                )
            self._next_index[record.alias] = record.turn_index + 1
            self._total += 1
            payload = asdict(record)
            payload["engine"] = record.engine.value
            payload["speaker"] = record.speaker.value
            payload["at"] = iso_utc(record.at)
            fh = self._handle_for_day(day_bucket(record.at))
            _append_jsonl(fh, payload)
        return record

    def _handle_for_day(self, day: str):
        fh = self._handles.get(day)
        if fh is None:
            fh = (self.root / f"turns-{day}.jsonl").open("a", encoding="utf-8")
            self._handles[day] = fh
        return fh

    # -- reads ------------------------------------------------------------
    def _day_files(self) -> list[Path]:
        return sorted(Path(p) for p in glob.glob(str(self.root / "turns-*.jsonl")))

    def _iter_raw(self) -> Iterator[dict]:
        for path in self._day_files():
            yield from iter_jsonl(path)

    @staticmethod
    def _to_record(raw: dict) -> TurnRecord:
        return TurnRecord(
            alias=raw["alias"],
            persona_id=raw.get("persona_id"),
            topic=raw.get("topic"),
            engine=Engine(raw["engine"]),
            speaker=Speaker(raw["speaker"]),
            text_original=raw["text_original"],
            text_translated=raw.get("text_translated"),
            at=parse_iso(raw["at"]),
            turn_index=int(raw["turn_index"]),
        )

    def iter_records(self) -> Iterator[TurnRecord]:
        for raw in self._iter_raw():
            yield self._to_record(raw)

    def load_session_log(self, alias: str) -> list[TurnRecord]:
        records = [r for r in self.iter_records() if r.alias == alias]
        records.sort(key=lambda r: (r.turn_index, r.at))
        return records

    def export_corpus(self, out_path: str | Path) -> int:
        """Write one merged, time-sorted JSONL corpus file; returns count."""
        rows = sorted(self._iter_raw(), key=lambda r: (r["at"], r["alias"], r["turn_index"]))
        out = Path(out_path)
        out.parent.mkdir(parents=True, exist_ok=True)
        with out.open("w", encoding="utf-8") as fh:
            for row in rows:
                fh.write(json.dumps(row, ensure_ascii=False) + "\n")
        return len(rows)

    # -- aggregation ------------------------------------------------------
    def ranking(self, top_n: int | None = None) -> list[tuple[str, int]]:
        """Aliases by number of non-command user messages, desc, ties by alias."""
        counts: dict[str, int] = {}
        for record in self.iter_records():
            if record.speaker is not Speaker.USER:
                continue
            if commands.is_command_text(record.text_original):
                continue
            counts[record.alias] = counts.get(record.alias, 0) + 1
        ordered = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
        return ordered if top_n is None else ordered[:top_n]

    def close(self) -> None:
        with self._lock:
            for fh in self._handles.values():
                fh.close()
            self._handles.clear()
            index = {
                "next_index": dict(sorted(self._next_index.items())),
                "files": [p.name for p in self._day_files()],
            }
            (self.root / "index.json").write_text(
                json.dumps(index, ensure_ascii=False, indent=2, sort_keys=True) + "\n",
                encoding="utf-8",
            )


class SensitivityStore:
    """Latest sensitivity level per (alias, topic); append-only on disk."""

    def __init__(self, root: str | Path) -> None:
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self.path = self.root / "sensitivity.jsonl"
        self._lock = threading.Lock()
        self._latest: dict[tuple[str, int], SensitivityRecord] = {}
        for raw in iter_jsonl(self.path):
            rec = SensitivityRecord(
                alias=raw["alias"],
                topic_id=int(raw["topic_id"]),
                level=SensitivityLevel(raw["level"]),
                origin=SensitivityOrigin(raw["origin"]),
                at=parse_iso(raw["at"]),
            )
            self._latest[(rec.alias, rec.topic_id)] = rec

    def put(self, record: SensitivityRecord) -> None:
        with self._lock:
            self._latest[(record.alias, record.topic_id)] = record
            payload = asdict(record)
            payload["level"] = record.level.value
            payload["origin"] = record.origin.value
            payload["at"] = iso_utc(record.at)
            with self.path.open("a", encoding="utf-8") as fh:
                _append_jsonl(fh, payload)

    def get(self, alias: str, topic_id: int) -> SensitivityRecord | None:
        return self._latest.get((alias, topic_id))

    def has_record(self, alias: str, topic_id: int) -> bool:
        return (alias, topic_id) in self._latest

    def records(self) -> list[SensitivityRecord]:
        return list(self._latest.values())

    def user_criterion(self, alias: str) -> str | None:
        """'indicated' if any topic is indicated, 'healthy' if screened clean."""
        levels = [r.level for r in self._latest.values() if r.alias == alias]
        if not levels:
            return None
        if any(level is SensitivityLevel.INDICATED for level in levels):
            return SensitivityLevel.INDICATED.value
        return SensitivityLevel.HEALTHY.value

    def import_interviews_csv(self, csv_path: str | Path, at: float) -> int:
        """Load clinician interview outcomes; header: alias,topic_id,level."""
        count = 0
        with Path(csv_path).open("r", encoding="utf-8", newline="") as fh:
            reader = csv.DictReader(fh)
            required = {"alias", "topic_id", "level"}
            if reader.fieldnames is None or not required.issubset(set(reader.fieldnames)):
                raise ValueError("interviews csv needs header alias,topic_id,level")
            for row in reader:
                level = row["level"].strip().lower()
                if level not in ("healthy", "indicated"):
                    raise ValueError(f"bad level {row['level']!r} for {row['alias']!r}")
                self.put(
                    SensitivityRecord(
                        alias=row["alias"].strip(),
                        topic_id=int(row["topic_id"]),
                        level=SensitivityLevel(level),
                        origin=SensitivityOrigin.INTERVIEW,
                        at=at,
                    )
                )
                count += 1
        return count


class AlertStore:
    """Persisted risk alerts with delivery status, ordered by arrival."""

    def __init__(self, root: str | Path) -> None:
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self.path = self.root / "alerts.jsonl"
        self._lock = threading.Lock()
        self._records: list[AlertRecord] = []
        for raw in iter_jsonl(self.path):
            self._records.append(
                AlertRecord(
                    alias=raw["alias"],
                    matched_pattern=raw["matched_pattern"],
                    message_excerpt=raw["message_excerpt"],
                    at=parse_iso(raw["at"]),
                    delivered=bool(raw.get("delivered", False)),
                )
            )

    def append(self, record: AlertRecord) -> int:
        with self._lock:
            self._records.append(record)
            self._rewrite()
            return len(self._records) - 1

    def mark_delivered(self, index: int) -> None:
        with self._lock:
            self._records[index].delivered = True
            self._rewrite()

    def _rewrite(self) -> None:
        # small ops file; rewriting keeps delivery flags durable
        with self.path.open("w", encoding="utf-8") as fh:
            for rec in self._records:
                payload = asdict(rec)
                payload["at"] = iso_utc(rec.at)
                _append_jsonl(fh, payload)

    def records(self) -> list[AlertRecord]:
        return list(self._records)

    def count(self) -> int:
        return len(self._records)

    def since(self, cursor: int) -> tuple[list[AlertRecord], int]:
        return self._records[cursor:], len(self._records)

    def undelivered(self) -> list[tuple[int, AlertRecord]]:
        return [(i, r) for i, r in enumerate(self._records) if not r.delivered]


class ProfileStore:
    """Survey answers keyed by alias (persona, gender, age); alias-only identity."""

    def __init__(self, root: str | Path) -> None:
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self.path = self.root / "profiles.jsonl"
        self._lock = threading.Lock()
        self._profiles: dict[str, dict] = {}
        for raw in iter_jsonl(self.path):
            self._profiles[raw["alias"]] = raw

    def put(
        self,
        alias: str,
        persona_id: str,
        gender: str | None,
        age_years: int | None,
        age_flagged: bool,
        created_at: float,
    ) -> None:
        payload = {
            "alias": alias,
            "persona_id": persona_id,
            "gender": gender,
            "age_years": age_years,
            "age_flagged": age_flagged,
            "created_at": iso_utc(created_at),
        }
        with self._lock:
            self._profiles[alias] = payload
            with self.path.open("a", encoding="utf-8") as fh:
                _append_jsonl(fh, payload)

    def get(self, alias: str) -> dict | None:
        return self._profiles.get(alias)

    def has_alias(self, alias: str) -> bool:
        return alias in self._profiles

    def all(self) -> dict[str, dict]:
        return dict(self._profiles)


class StoreBundle:
    """All stores rooted in one log directory."""

    def __init__(self, root: str | Path) -> None:
        self.root = Path(root)
        self.turns = LogStore(self.root)
        self.sensitivity = SensitivityStore(self.root)
        self.alerts = AlertStore(self.root)
        self.profiles = ProfileStore(self.root)

    def close(self) -> None:
        self.turns.close()


def repair_report(root: str | Path) -> dict[str, int]:
    """Count readable vs damaged lines across all JSONL files in a log dir."""
    ok = bad = 0
    for path in sorted(Path(root).glob("*.jsonl")):
        with path.open("r", encoding="utf-8") as fh:
            for line in fh:
                if not line.strip():
                    continue
                try:
                    json.loads(line)
                    ok += 1
                except json.JSONDecodeError:
                    bad += 1
    return {"readable": ok, "damaged": bad}
