"""Debounce and reminder scheduling against an injectable clock.

All timing decisions work on epoch seconds with one-second resolution.
A manual clock drives tests and simulations; the wall clock drives serving.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

from .model import InboundItem


class Clock:
    def now(self) -> float:
        raise NotImplementedError

    def sleep(self, seconds: float) -> None:
        raise NotImplementedError


class WallClock(Clock):
    def now(self) -> float:
        return time.time()

    def sleep(self, seconds: float) -> None:
        time.sleep(seconds)


class ManualClock(Clock):
    """Deterministic clock advanced explicitly; sleeping advances it too."""

    def __init__(self, start: float = 0.0) -> None:
        self._now = float(start)

    def now(self) -> float:
        return self._now

    def sleep(self, seconds: float) -> None:
        self.advance(seconds)

    def advance(self, seconds: float) -> float:
        if seconds < 0:
            raise ValueError("clock cannot run backwards")
        self._now += seconds
        return self._now


@dataclass
class _Pending:
    items: list[InboundItem] = field(default_factory=list)
    flush_at: float = 0.0


class DebounceBuffer:
    """Groups rapid-fire messages per session into one batch.

    Each arrival pushes the flush deadline to arrival + window, so a batch
    flushes only after the user has stayed quiet for the whole window.
    """

    def __init__(self, window_seconds: float = 10.0) -> None:
        self.window_seconds = float(window_seconds)
        self._pending: dict[str, _Pending] = {}

    def on_inbound(self, key: str, item: InboundItem) -> None:
        slot = self._pending.setdefault(key, _Pending())
        slot.items.append(item)
        slot.flush_at = item.at + self.window_seconds

    def pending_count(self, key: str) -> int:
        slot = self._pending.get(key)
        return len(slot.items) if slot else 0

    def due_flushes(self, now: float) -> list[tuple[str, list[InboundItem]]]:
        """Return and clear every batch whose quiet window has elapsed."""
        due: list[tuple[str, list[InboundItem]]] = []
        for key in list(self._pending):
            slot = self._pending[key]
            if slot.flush_at <= now and slot.items:
                due.append((key, slot.items))
                del self._pending[key]
        return due

    def flush_all(self) -> list[tuple[str, list[InboundItem]]]:
        """Drain everything regardless of deadlines (shutdown path)."""
        out = [(key, slot.items) for key, slot in self._pending.items() if slot.items]
        self._pending.clear()
        return out


@dataclass
class _ReminderSlot:
    last_activity: float
    reminded: bool = False


class ReminderLedger:
    """Tracks per-session silence and owes at most one nudge per silence."""

    def __init__(self, silence_hours: float = 23.0) -> None:
        self.silence_seconds = float(silence_hours) * 3600.0
        self._slots: dict[str, _ReminderSlot] = {}

    def on_activity(self, key: str, at: float) -> None:
        self._slots[key] = _ReminderSlot(last_activity=at, reminded=False)

    def due_reminders(self, now: float) -> list[str]:
        due = []
        for key, slot in self._slots.items():
            if not slot.reminded and now - slot.last_activity >= self.silence_seconds:
                due.append(key)
        return due

    def mark_reminded(self, key: str) -> None:
        slot = self._slots.get(key)
        if slot is not None:
            slot.reminded = True

    def silence_seconds_for(self, key: str, now: float) -> float | None:
        slot = self._slots.get(key)
        return None if slot is None else now - slot.last_activity

    def forget(self, key: str) -> None:
        self._slots.pop(key, None)
