"""Clocks, debounce batching and reminder bookkeeping."""

from __future__ import annotations

import random

import pytest

from charla.model import InboundItem
from charla.temporal import DebounceBuffer, ManualClock, ReminderLedger


def _item(text: str, at: float) -> InboundItem:
    return InboundItem(text=text, at=at)


def test_manual_clock_advances_and_rejects_reverse():
    clock = ManualClock(start=100.0)
    assert clock.now() == 100.0
    clock.advance(5.5)
    clock.sleep(4.5)
    assert clock.now() == 110.0
    with pytest.raises(ValueError):
        clock.advance(-1)


def test_single_message_flushes_after_quiet_window():
    buf = DebounceBuffer(window_seconds=10)
    buf.on_inbound("s1", _item("hola", 0.0))
    assert buf.due_flushes(9.0) == []
    flushed = buf.due_flushes(10.0)
    assert len(flushed) == 1
    key, items = flushed[0]
    assert key == "s1" and [i.text for i in items] == ["hola"]
    assert buf.due_flushes(11.0) == []  # drained, nothing left


def test_each_arrival_extends_the_deadline():
    buf = DebounceBuffer(window_seconds=10)
    buf.on_inbound("s1", _item("a", 0.0))
    buf.on_inbound("s1", _item("b", 4.0))
    buf.on_inbound("s1", _item("c", 9.0))
    assert buf.due_flushes(18.0) == []
    flushed = buf.due_flushes(19.0)
    assert [i.text for i in flushed[0][1]] == ["a", "b", "c"]


def test_sessions_debounce_independently():
    buf = DebounceBuffer(window_seconds=10)
    buf.on_inbound("s1", _item("a", 0.0))
    buf.on_inbound("s2", _item("b", 5.0))
    first = buf.due_flushes(10.0)
    assert [key for key, _ in first] == ["s1"]
    second = buf.due_flushes(15.0)
    assert [key for key, _ in second] == ["s2"]


def test_pending_count_and_flush_all():
    buf = DebounceBuffer(window_seconds=10)
    buf.on_inbound("s1", _item("a", 0.0))
    buf.on_inbound("s1", _item("b", 1.0))
    assert buf.pending_count("s1") == 2
    assert buf.pending_count("ghost") == 0
    drained = buf.flush_all()
    assert len(drained) == 1 and len(drained[0][1]) == 2
    assert buf.pending_count("s1") == 0


def test_random_schedules_deliver_once_and_in_order():
    rng = random.Random(42)
    for _ in range(25):
        buf = DebounceBuffer(window_seconds=10)
        sent: dict[str, list[str]] = {"a": [], "b": [], "c": []}
        got: dict[str, list[str]] = {"a": [], "b": [], "c": []}
        t = 0.0
        counter = 0
        for _ in range(rng.randrange(5, 40)):
            t += rng.uniform(0.0, 20.0)
            key = rng.choice("abc")
            text = f"m{counter}"
            counter += 1
            sent[key].append(text)
            buf.on_inbound(key, _item(text, t))
            if rng.random() < 0.5:
                for flushed_key, items in buf.due_flushes(t):
                    got[flushed_key].extend(i.text for i in items)
        for flushed_key, items in buf.due_flushes(t + 60.0):
            got[flushed_key].extend(i.text for i in items)
        assert got == sent


def test_reminder_due_only_after_full_silence():
    ledger = ReminderLedger(silence_hours=23)
    ledger.on_activity("s1", 0.0)
    assert ledger.due_reminders(23 * 3600 - 60) == []
    assert ledger.due_reminders(23 * 3600) == ["s1"]


def test_reminder_owed_at_most_once_per_silence():
    ledger = ReminderLedger(silence_hours=23)
    ledger.on_activity("s1", 0.0)
    due = 23 * 3600.0
    assert ledger.due_reminders(due) == ["s1"]
    ledger.mark_reminded("s1")
    assert ledger.due_reminders(due + 9999) == []
    ledger.on_activity("s1", due + 100)  # a reply re-arms the nudge
    assert ledger.due_reminders(due + 100 + 23 * 3600) == ["s1"]


def test_reminder_silence_query_and_forget():
    ledger = ReminderLedger(silence_hours=23)
    ledger.on_activity("s1", 50.0)
    assert ledger.silence_seconds_for("s1", 80.0) == 30.0
    assert ledger.silence_seconds_for("ghost", 80.0) is None
    ledger.forget("s1")
    assert ledger.due_reminders(10**9) == []
