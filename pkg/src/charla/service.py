"""Orchestration: sessions, debounce, effects, provider calls, events.

The service owns the mutable world the pure state machine cannot touch:
stores, gateways, clocks and the per-session event feeds the HTTP layer
long-polls. All mutation happens under one lock; `pump` is safe to call
from a timer thread and from tests driving a manual clock.
"""

from __future__ import annotations

import logging
import os
import random
import threading
import time
import uuid
from dataclasses import dataclass, field
from typing import Any

from . import openchat, risk, session
from .config import Config
from .gateways import (
    ALERT_WEBHOOK_ENV,
    CompletionGateway,
    TranslationGateway,
    completion_from_env,
    translation_from_env,
)
from .model import (
    AppendTurn,
    BotMessage,
    CallProvider,
    Effect,
    Engine,
    InboundItem,
    Phase,
    RiskScanRequest,
    SessionState,
    Speaker,
    TurnRecord,
    WriteProfile,
    WriteSensitivity,
)
from .openchat import PROVIDER_TO_USER, USER_TO_PROVIDER, ProviderUnavailable
from .session import EngineDeps
from .store import StoreBundle, iso_utc
from .temporal import Clock, DebounceBuffer, ReminderLedger, WallClock

log = logging.getLogger(__name__)

LONG_POLL_SECONDS = 25.0


@dataclass
class _LiveSession:
    state: SessionState
    events: list[dict[str, Any]] = field(default_factory=list)
    next_seq: int = 1
    reminder_count: int = 0


class ChatService:
    """Binds the dialogue engines to stores, gateways and the clock."""

    def __init__(
        self,
        cfg: Config,
        data_root: str,
        completion: CompletionGateway | None = None,
        translation: TranslationGateway | None = None,
        clock: Clock | None = None,
        rng: random.Random | None = None,
        alert_sink: risk.WebhookSink | None = None,
        id_factory=None,
    ) -> None:
        self.cfg = cfg
        self.clock = clock or WallClock()
        self.rng = rng or random.Random()
        self.stores = StoreBundle(data_root)
        self.completion = completion or completion_from_env(cfg.default_mock_replies)
        self.translation = translation or translation_from_env()
        if alert_sink is None and os.environ.get(ALERT_WEBHOOK_ENV):
            alert_sink = risk.WebhookSink(os.environ[ALERT_WEBHOOK_ENV])
        self.alert_sink = alert_sink
        self.lexicon = risk.RiskLexicon(cfg.raw["risk_lexicon"])
        self._id_factory = id_factory or (lambda: "s-" + uuid.uuid4().hex[:12])

        self._lock = threading.Lock()
        self._events_cond = threading.Condition(self._lock)
        self._sessions: dict[str, _LiveSession] = {}
        self.debounce = DebounceBuffer(cfg.debounce_seconds)
        self.reminders = ReminderLedger(cfg.reminder_hours)
        self._closed = False

    # -- deps -----------------------------------------------------------------
    def _deps(self) -> EngineDeps:
        return EngineDeps(
            cfg=self.cfg,
            rng=self.rng,
            sensitivity=self.stores.sensitivity,
            profiles=self.stores.profiles,
        )

    # -- session lifecycle ----------------------------------------------------
    def create_session(self, session_id: str | None = None) -> str:
        with self._lock:
            sid = session_id or self._id_factory()
            if sid in self._sessions:
                raise ValueError(f"session exists: {sid}")
            state = session.new_session(sid, guest_tag=f"guest-{sid}")
            live = _LiveSession(state=state)
            self._sessions[sid] = live
            outbound, effects = session.start_session(state, self._deps(), self.clock.now())
            extra = self._execute_effects(state, effects)
            self._push_events(live, outbound + extra)
            return sid

    def has_session(self, session_id: str) -> bool:
        with self._lock:
            return session_id in self._sessions

    def session_state(self, session_id: str) -> SessionState:
        with self._lock:
            return self._sessions[session_id].state

    def submit(self, session_id: str, text: str, kind: str = "text") -> None:
        """Queue one inbound item; it is processed when its debounce lapses."""
        with self._lock:
            if session_id not in self._sessions:
                raise KeyError(session_id)
            at = self.clock.now()
            item = InboundItem(text=text, at=at, kind=kind)
            self.debounce.on_inbound(session_id, item)
            self.reminders.on_activity(session_id, at)

    # -- the pump -------------------------------------------------------------
    def pump(self) -> int:
        """Process everything due at the current clock reading.

        Returns the number of batches handled, which lets callers loop
        until quiescent.
        """
        with self._lock:
            return self._pump_locked()

    def _pump_locked(self) -> int:
        now = self.clock.now()
        handled = 0
        for sid, items in self.debounce.due_flushes(now):
            self._process_batch(sid, items, now)
            handled += 1
        self._send_due_reminders(now)
        self._park_expired(now)
        self._retry_alerts()
        return handled

    def _retry_alerts(self) -> None:
        if self.alert_sink is None:
            return
        for index, record in self.stores.alerts.undelivered():
            if self.alert_sink.push(record):
                self.stores.alerts.mark_delivered(index)

    def _process_batch(self, sid: str, items: list[InboundItem], now: float) -> None:
        live = self._sessions.get(sid)
        if live is None:
            return
        outbound, effects = session.advance(live.state, items, now, self._deps())
        extra = self._execute_effects(live.state, effects)
        self._push_events(live, outbound + extra)

    def _send_due_reminders(self, now: float) -> None:
        nudges = self.cfg.nudges
        for sid in self.reminders.due_reminders(now):
            live = self._sessions.get(sid)
            if live is None:
                self.reminders.forget(sid)
                continue
            state = live.state
            if state.phase in (Phase.WELCOME, Phase.PERSONA_CHOICE):
                self.reminders.mark_reminded(sid)
                continue
            text = nudges[live.reminder_count % len(nudges)]
            live.reminder_count += 1
            message = BotMessage(text=text, engine=Engine.CONTROLLED)
            if state.alias is not None:
                self._append_turn_record(
                    AppendTurn(
                        alias=state.alias,
                        persona_id=state.persona.value if state.persona else None,
                        topic=state.active_topic,
                        engine=message.engine,
                        speaker=Speaker.BOT,
                        text_original=text,
                        text_translated=None,
                        at=now,
                    )
                )
            self._push_events(live, [message])
            self.reminders.mark_reminded(sid)

    def _park_expired(self, now: float) -> None:
        ttl_hours = self.cfg.session_ttl_hours
        if not ttl_hours:
            return
        horizon = ttl_hours * 3600.0
        for live in self._sessions.values():
            state = live.state
            if state.phase is Phase.IDLE or not state.last_user_activity:
                continue
            if now - state.last_user_activity >= horizon:
                session.park_idle(state)

    # -- effects --------------------------------------------------------------
    def _execute_effects(
        self, state: SessionState, effects: list[Effect]
    ) -> list[BotMessage]:
        produced: list[BotMessage] = []
        for effect in effects:
            if isinstance(effect, AppendTurn):
                self._append_turn_record(effect)
            elif isinstance(effect, RiskScanRequest):
                self._run_risk_scan(effect)
            elif isinstance(effect, WriteSensitivity):
                self.stores.sensitivity.put(effect.record)
            elif isinstance(effect, WriteProfile):
                self.stores.profiles.put(
                    alias=effect.alias,
                    persona_id=effect.persona_id,
                    gender=effect.gender,
                    age_years=effect.age_years,
                    age_flagged=effect.age_flagged,
                    created_at=effect.created_at,
                )
            elif isinstance(effect, CallProvider):
                produced.extend(self._run_provider(state))
        return produced

    def _append_turn_record(self, effect: AppendTurn) -> None:
        self.stores.turns.append(
            TurnRecord(
                alias=effect.alias,
                persona_id=effect.persona_id,
                topic=effect.topic,
                engine=effect.engine,
                speaker=effect.speaker,
                text_original=effect.text_original,
                text_translated=effect.text_translated,
                at=effect.at,
                turn_index=-1,
            )
        )

    def _run_risk_scan(self, effect: RiskScanRequest) -> None:
        findings = self.lexicon.scan(effect.text)
        if not findings:
            return
        record = risk.dispatch(
            findings, effect.identity, effect.text, effect.at, self.alert_sink
        )
        if record is not None:
            self.stores.alerts.append(record)

    # -- provider pipeline ----------------------------------------------------
    def _run_provider(self, state: SessionState) -> list[BotMessage]:
        now = self.clock.now()
        try:
            needed = session.entries_needing_bridge(state)
            translated = {
                index: openchat.bridge(text, USER_TO_PROVIDER, self.translation, self.cfg)
                for index, text in needed.items()
            }
            session.attach_provider_texts(state, translated)
            request = openchat.build_prompt(state, self.cfg)
            result = openchat.generate_reply(
                request,
                self.completion,
                self.cfg,
                bot_name=state.persona.value if state.persona else "Bot",
                alias=state.alias or state.guest_tag,
                sleep=self.clock.sleep,
            )
            reply_provider = result.text
            reply_user = openchat.bridge(
                reply_provider, PROVIDER_TO_USER, self.translation, self.cfg
            )
        except ProviderUnavailable:
            log.warning("provider unavailable; falling back to controlled question")
            outbound, effects = session.provider_fallback(state, self._deps(), now)
            self._execute_effects(state, effects)
            return outbound
        outbound, effects = session.complete_open_reply(
            state, reply_user, reply_provider, now
        )
        self._execute_effects(state, effects)
        return outbound

    # -- events ---------------------------------------------------------------
    def _push_events(self, live: _LiveSession, messages: list[BotMessage]) -> None:
        if not messages:
            return
        at = iso_utc(self.clock.now())
        for message in messages:
            live.events.append(
                {
                    "seq": live.next_seq,
                    "at": at,
                    "type": "bot_message",
                    "engine": message.engine.value,
                    "text": message.text,
                    "keyboard": list(message.keyboard) if message.keyboard else None,
                }
            )
            live.next_seq += 1
        self._events_cond.notify_all()

    def events_since(self, session_id: str, since: int) -> list[dict[str, Any]]:
        with self._lock:
            if session_id not in self._sessions:
                raise KeyError(session_id)
            return [e for e in self._sessions[session_id].events if e["seq"] > since]

    def wait_events(
        self, session_id: str, since: int, timeout: float = LONG_POLL_SECONDS
    ) -> list[dict[str, Any]]:
        """Long-poll: block until an event newer than `since` lands."""
        deadline = None
        with self._events_cond:
            if session_id not in self._sessions:
                raise KeyError(session_id)
            while True:
                fresh = [
                    e for e in self._sessions[session_id].events if e["seq"] > since
                ]
                if fresh or timeout <= 0:
                    return fresh
                if deadline is None:
                    deadline = time.monotonic() + timeout
                remaining = deadline - time.monotonic()
                if remaining <= 0:
                    return []
                self._events_cond.wait(remaining)

    # -- ops views ------------------------------------------------------------
    def alerts_since(self, cursor: int) -> tuple[list[dict[str, Any]], int]:
        with self._lock:
            records, new_cursor = self.stores.alerts.since(cursor)
            payload = [
                {
                    "alias": r.alias,
                    "pattern": r.matched_pattern,
                    "excerpt": r.message_excerpt,
                    "at": iso_utc(r.at),
                    "delivered": r.delivered,
                }
                for r in records
            ]
            return payload, new_cursor

    def ranking(self, top_n: int = 10) -> list[dict[str, Any]]:
        with self._lock:
            return [
                {"alias": alias, "messages": count}
                for alias, count in self.stores.turns.ranking(top_n)
            ]

    def stats(self) -> dict[str, Any]:
        with self._lock:
            phases: dict[str, int] = {}
            for live in self._sessions.values():
                key = live.state.phase.value
                phases[key] = phases.get(key, 0) + 1
            return {
                "sessions": len(self._sessions),
                "turns_logged": self.stores.turns.total_appended,
                "alerts_total": self.stores.alerts.count(),
                "profiles": len(self.stores.profiles.all()),
                "phases": phases,
            }

    # -- shutdown -------------------------------------------------------------
    def flush_all(self) -> None:
        """Force every pending debounce slot through, ignoring timers."""
        with self._lock:
            now = self.clock.now()
            for sid, items in self.debounce.flush_all():
                self._process_batch(sid, items, now)

    def close(self) -> None:
        with self._lock:
            if self._closed:
                return
            self._closed = True
        self.flush_all()
        self.stores.close()
