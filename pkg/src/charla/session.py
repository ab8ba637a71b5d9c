"""Session state machine joining the four dialogue engines.

`advance` consumes one debounced batch and returns outbound messages plus
effects (turn appends, risk scans, sensitivity writes, provider calls) for
the caller to execute. It mutates only the given state and draws randomness
only from the injected RNG, so replaying a logged batch sequence against
mocked gateways reproduces identical output.

Open dialogue is reachable solely through a controlled opener: topics enter
via the menu, pass triage when the user is unknown for that topic, and the
opener's reply is the first free turn. Every fifth free user message parks
the session at a semi-controlled checkpoint until the user continues,
changes topic or asks for another controlled question.
"""

from __future__ import annotations

import random
import re
from dataclasses import dataclass, field

from . import commands, controlled, triage
from .commands import Command, CommandKind, FreeText, UnknownCommand
from .config import Config, fold
from .model import (
    AddressingGender,
    AppendTurn,
    BotMessage,
    CallProvider,
    ContextEntry,
    Effect,
    Engine,
    InboundItem,
    Phase,
    RiskScanRequest,
    SensitivityLevel,
    SessionState,
    Speaker,
    WriteProfile,
    WriteSensitivity,
)

FREE_TURNS_PER_CHECKPOINT = 5
ALIAS_MAX_LEN = 32


class NotLoggedIn(Exception):
    """Topic operations need an alias on record."""

YESNO_KEYBOARD = ("Sí", "No")
SCALE_KEYBOARD = tuple(str(i) for i in range(9))
GENDER_KEYBOARD = ("Femenino", "Masculino")
CHECKPOINT_KEYBOARD = ("/cambioTema", "/dimeOtraCosa")
PERSONA_KEYBOARD = ("/Ada", "/Hugo", "/Big", "/ayuda")

_FEMININE_WORDS = {"femenino", "femenina", "female", "fem", "f", "chica", "mujer"}
_MASCULINE_WORDS = {"masculino", "male", "masc", "m", "chico", "hombre"}

_TOPIC_FLOW_PHASES = frozenset(
    {
        Phase.TOPIC_MENU,
        Phase.TRIAGE,
        Phase.CONTROLLED_OPENER,
        Phase.OPEN_DIALOGUE,
        Phase.SEMI_CONTROLLED_CHECKPOINT,
        Phase.IDLE,
    }
)

_ONBOARDING_PHASES = frozenset(
    {
        Phase.WELCOME,
        Phase.PERSONA_CHOICE,
        Phase.LOGIN,
        Phase.ALIAS_CREATION,
        Phase.AGE_QUESTION,
        Phase.GENDER_QUESTION,
    }
)


@dataclass
class EngineDeps:
    """Read-only collaborators the state machine consults while advancing."""

    cfg: Config
    rng: random.Random
    sensitivity: object  # has_record(alias, topic) / get(alias, topic)
    profiles: object     # has_alias(alias) / get(alias)


@dataclass
class _TurnOutput:
    outbound: list[BotMessage] = field(default_factory=list)
    effects: list[Effect] = field(default_factory=list)
    provider_needed: bool = False


def new_session(session_id: str, guest_tag: str) -> SessionState:
    return SessionState(session_id=session_id, guest_tag=guest_tag)


def topic_menu_text(cfg: Config) -> str:
    lines = [cfg.text("topic_menu_header")]
    for tid in sorted(cfg.topics):
        lines.append(f"/Tema{tid} - {cfg.topics[tid].soft_name}")
    return "\n".join(lines)


def topic_menu_keyboard(cfg: Config) -> tuple[str, ...]:
    return tuple(f"/Tema{tid}" for tid in sorted(cfg.topics))


def help_text(cfg: Config) -> str:
    lines = [
        cfg.text("help_header"),
        "/empezar o /start - empieza la conversación",
        "/Ada, /Hugo, /Big - elige con quién hablar",
        "/ayuda o /help - muestra esta ayuda",
        "/noTengoAlias o /noAliases - crea un alias nuevo",
        "/cambioTema o /changeTopic - cambia de tema",
        "/dimeOtraCosa o /tellMeOtherThing - te pregunto otra cosa del mismo tema",
        f"/Tema0 a /Tema{commands.TOPIC_MAX} (o /Topic0 a /Topic{commands.TOPIC_MAX}) - abre un tema concreto",
    ]
    return "\n".join(lines)


def _engine_for_phase(phase: Phase) -> Engine:
    if phase in _ONBOARDING_PHASES:
        return Engine.ONBOARDING
    if phase is Phase.TRIAGE:
        return Engine.TRIAGE
    if phase is Phase.OPEN_DIALOGUE:
        return Engine.OPEN
    return Engine.CONTROLLED


class _Turn:
    """Working set for advancing one batch against one session."""

    def __init__(self, state: SessionState, deps: EngineDeps, now: float) -> None:
        self.state = state
        self.deps = deps
        self.cfg = deps.cfg
        self.now = now
        self.out = _TurnOutput()

    # -- emission helpers -------------------------------------------------
    def say(
        self,
        text: str,
        engine: Engine,
        keyboard: tuple[str, ...] | None = None,
        at: float | None = None,
        to_context: bool = False,
        context_speaker: Speaker = Speaker.BOT,
    ) -> None:
        message = BotMessage(text=text, engine=engine, keyboard=keyboard)
        self.out.outbound.append(message)
        state = self.state
        if state.alias is not None:
            self.out.effects.append(
                AppendTurn(
                    alias=state.alias,
                    persona_id=state.persona.value if state.persona else None,
                    topic=state.active_topic,
                    engine=engine,
                    speaker=Speaker.BOT,
                    text_original=text,
                    text_translated=None,
                    at=at if at is not None else self.now,
                )
            )
        if to_context:
            state.append_context(
                ContextEntry(
                    speaker=context_speaker,
                    engine=engine,
                    text_user_language=text,
                    at=at if at is not None else self.now,
                )
            )

    def log_user(self, text: str, at: float) -> None:
        state = self.state
        if state.alias is None:
            return
        self.out.effects.append(
            AppendTurn(
                alias=state.alias,
                persona_id=state.persona.value if state.persona else None,
                topic=state.active_topic,
                engine=_engine_for_phase(state.phase),
                speaker=Speaker.USER,
                text_original=text,
                text_translated=None,
                at=at,
            )
        )

    def write_profile(self) -> None:
        state = self.state
        assert state.alias is not None and state.persona is not None
        self.out.effects.append(
            WriteProfile(
                alias=state.alias,
                persona_id=state.persona.value,
                gender=state.addressing_gender.value if state.addressing_gender else None,
                age_years=state.age_years,
                age_flagged=state.age_flagged,
                created_at=self.now,
            )
        )

    # -- shared moves -----------------------------------------------------
    def show_welcome(self) -> None:
        self.state.phase = Phase.PERSONA_CHOICE
        self.say(self.cfg.text("welcome"), Engine.ONBOARDING)
        self.say(self.cfg.text("persona_menu"), Engine.ONBOARDING, keyboard=PERSONA_KEYBOARD)

    def show_topic_menu(self) -> None:
        self.say(
            topic_menu_text(self.cfg),
            Engine.CONTROLLED,
            keyboard=topic_menu_keyboard(self.cfg),
        )

    def ask_triage(self, at: float, with_intro: bool) -> None:
        state = self.state
        question = triage.next_triage_question(self.cfg, state.active_topic, state.triage_answers)
        assert question is not None
        keyboard = YESNO_KEYBOARD if question.kind == "yes_no" else SCALE_KEYBOARD
        if with_intro:
            self.say(self.cfg.text("triage_intro"), Engine.TRIAGE, at=at)
        self.say(question.text, Engine.TRIAGE, keyboard=keyboard, at=at)

    def emit_opener(self, level: SensitivityLevel, at: float) -> None:
        state = self.state
        opener = controlled.opener_for(
            self.cfg, state.active_topic, level, state.persona, state.alias
        )
        state.phase = Phase.CONTROLLED_OPENER
        state.free_turn_count = 0
        self.say(
            opener,
            Engine.CONTROLLED,
            at=at,
            to_context=True,
            context_speaker=Speaker.CONTROLLED_SYSTEM,
        )

    def enter_topic(self, topic_id: int, at: float) -> None:
        state = self.state
        _clear_topic(state, at)
        state.active_topic = topic_id
        if triage.needs_triage(state.alias, topic_id, self.deps.sensitivity):
            state.phase = Phase.TRIAGE
            self.ask_triage(at, with_intro=True)
            return
        record = self.deps.sensitivity.get(state.alias, topic_id)
        self.emit_opener(record.level, at)

    def inject_followup(self, at: float) -> None:
        state = self.state
        question = controlled.pick_followup(
            self.cfg, state.active_topic, state.recent_followups, self.deps.rng
        )
        state.recent_followups.append(question)
        self.say(
            question,
            Engine.CONTROLLED,
            at=at,
            to_context=True,
            context_speaker=Speaker.CONTROLLED_SYSTEM,
        )

    def emit_checkpoint(self, at: float) -> None:
        state = self.state
        state.phase = Phase.SEMI_CONTROLLED_CHECKPOINT
        state.free_turn_count = 0
        self.out.provider_needed = False
        topic = self.cfg.topic(state.active_topic)
        control_line = self.cfg.reanchor_template.format(focus=topic.focus)
        state.append_context(
            ContextEntry(
                speaker=Speaker.CONTROLLED_SYSTEM,
                engine=Engine.CONTROLLED,
                text_user_language=control_line,
                text_provider_language=control_line,
                at=at,
                is_control=True,
            )
        )
        self.say(
            controlled.checkpoint_message(self.cfg, state.active_topic),
            Engine.CONTROLLED,
            keyboard=CHECKPOINT_KEYBOARD,
            at=at,
        )

    def add_open_user_message(self, text: str, at: float) -> None:
        """One free user message inside open dialogue; fires the checkpoint
        on the fifth since the last one."""
        state = self.state
        state.phase = Phase.OPEN_DIALOGUE
        state.append_context(
            ContextEntry(
                speaker=Speaker.USER,
                engine=Engine.OPEN,
                text_user_language=text,
                at=at,
            )
        )
        state.free_turn_count += 1
        if state.free_turn_count >= FREE_TURNS_PER_CHECKPOINT:
            self.emit_checkpoint(at)
        else:
            self.out.provider_needed = True

    # -- per-item dispatch ------------------------------------------------
    def handle_item(self, item: InboundItem) -> None:
        state = self.state
        state.last_user_activity = item.at
        state.reminder_sent = False

        if not item.is_text or not item.text.strip():
            engine = _engine_for_phase(state.phase)
            self.say(self.cfg.text("nontext_fallback"), engine, at=item.at)
            return

        self.out.effects.append(
            RiskScanRequest(identity=state.log_identity, text=item.text, at=item.at)
        )
        self.log_user(item.text, item.at)

        parsed = commands.parse_input(item.text)
        if isinstance(parsed, UnknownCommand):
            engine = _engine_for_phase(state.phase)
            self.say(self.cfg.text("unknown_command"), engine, at=item.at)
            return
        if isinstance(parsed, Command):
            self.handle_command(parsed, item)
        else:
            self.handle_free_text(parsed, item)

    def handle_command(self, cmd: Command, item: InboundItem) -> None:
        state = self.state
        at = item.at
        kind = cmd.kind
        engine = _engine_for_phase(state.phase)

        if kind is CommandKind.HELP:
            self.say(help_text(self.cfg), engine, at=at)
            return

        if state.phase is Phase.IDLE:
            self.resume_from_idle(at)
            return

        if kind is CommandKind.START:
            if state.phase is Phase.WELCOME:
                self.show_welcome()
            elif state.phase is Phase.PERSONA_CHOICE:
                self.say(
                    self.cfg.text("persona_menu"),
                    Engine.ONBOARDING,
                    keyboard=PERSONA_KEYBOARD,
                    at=at,
                )
            else:
                self.say(self.cfg.text("not_now"), engine, at=at)
            return

        if kind is CommandKind.PERSONA:
            if state.phase is Phase.WELCOME:
                self.show_welcome()
                return
            if state.phase is Phase.PERSONA_CHOICE:
                state.persona = cmd.persona
                state.phase = Phase.LOGIN
                self.say(self.cfg.persona_intro(cmd.persona.value), Engine.ONBOARDING, at=at)
                self.say(self.cfg.text("intro_purpose"), Engine.ONBOARDING, at=at)
                self.say(self.cfg.text("login_prompt"), Engine.ONBOARDING, at=at)
            else:
                self.say(self.cfg.text("persona_locked"), engine, at=at)
            return

        if kind is CommandKind.NO_ALIAS:
            if state.phase in (Phase.LOGIN, Phase.ALIAS_CREATION):
                state.phase = Phase.ALIAS_CREATION
                self.say(self.cfg.text("signup_explainer"), Engine.ONBOARDING, at=at)
            else:
                self.say(self.cfg.text("not_now"), engine, at=at)
            return

        if kind is CommandKind.CHANGE_TOPIC:
            if state.phase in _TOPIC_FLOW_PHASES and state.alias is not None:
                reset_topic(state, at)
                self.out.provider_needed = False
                self.show_topic_menu()
            else:
                self.say(self.cfg.text("not_now"), engine, at=at)
            return

        if kind is CommandKind.TELL_ME_OTHER:
            if state.phase in (
                Phase.CONTROLLED_OPENER,
                Phase.OPEN_DIALOGUE,
                Phase.SEMI_CONTROLLED_CHECKPOINT,
            ):
                if state.phase is Phase.SEMI_CONTROLLED_CHECKPOINT:
                    state.phase = Phase.OPEN_DIALOGUE
                    state.free_turn_count = 0
                self.out.provider_needed = False
                self.inject_followup(at)
            elif state.phase is Phase.TRIAGE:
                self.say(self.cfg.text("triage_wait"), Engine.TRIAGE, at=at)
                self.ask_triage(at, with_intro=False)
            elif state.phase is Phase.TOPIC_MENU:
                self.say(self.cfg.text("menu_nudge"), Engine.CONTROLLED, at=at)
            else:
                self.say(self.cfg.text("not_now"), engine, at=at)
            return

        if kind is CommandKind.TOPIC:
            if state.phase is Phase.TOPIC_MENU:
                self.enter_topic(cmd.topic_id, at)
            elif state.phase in _TOPIC_FLOW_PHASES:
                self.say(self.cfg.text("topic_cmd_hint"), engine, at=at)
            else:
                self.say(self.cfg.text("not_now"), engine, at=at)
            return

    def handle_free_text(self, parsed: FreeText, item: InboundItem) -> None:
        state = self.state
        at = item.at
        text = parsed.text.strip()
        phase = state.phase

        if phase is Phase.WELCOME:
            self.show_welcome()
        elif phase is Phase.PERSONA_CHOICE:
            self.say(
                self.cfg.text("persona_nudge"),
                Engine.ONBOARDING,
                keyboard=PERSONA_KEYBOARD,
                at=at,
            )
        elif phase is Phase.LOGIN:
            self.handle_login_alias(text, at)
        elif phase is Phase.ALIAS_CREATION:
            self.handle_alias_creation(text, at)
        elif phase is Phase.AGE_QUESTION:
            self.handle_age_answer(text, at)
        elif phase is Phase.GENDER_QUESTION:
            self.handle_gender_answer(text, at)
        elif phase is Phase.TOPIC_MENU:
            self.say(
                self.cfg.text("menu_nudge"),
                Engine.CONTROLLED,
                keyboard=topic_menu_keyboard(self.cfg),
                at=at,
            )
        elif phase is Phase.TRIAGE:
            self.handle_triage_answer(text, at)
        elif phase in (Phase.CONTROLLED_OPENER, Phase.OPEN_DIALOGUE, Phase.SEMI_CONTROLLED_CHECKPOINT):
            self.add_open_user_message(parsed.text, at)
        elif phase is Phase.IDLE:
            self.resume_from_idle(at)

    # -- onboarding handlers ----------------------------------------------
    def _register_alias(self, alias: str, at: float) -> None:
        state = self.state
        state.alias = alias
        self.log_user(alias, at)  # the registering message itself, now attributable
        self.write_profile()
        state.phase = Phase.AGE_QUESTION
        self.say(self.cfg.text("alias_created_age_q", alias=alias), Engine.ONBOARDING, at=at)

    def handle_login_alias(self, text: str, at: float) -> None:
        state = self.state
        if not text or " " in text or "\t" in text or len(text) > ALIAS_MAX_LEN:
            self.say(self.cfg.text("alias_spaces"), Engine.ONBOARDING, at=at)
            return
        if self.deps.profiles.has_alias(text):
            state.alias = text
            profile = self.deps.profiles.get(text) or {}
            gender = profile.get("gender")
            if gender:
                state.addressing_gender = AddressingGender(gender)
            state.age_years = profile.get("age_years")
            state.age_flagged = bool(profile.get("age_flagged", False))
            self.log_user(text, at)
            state.phase = Phase.TOPIC_MENU
            self.say(self.cfg.text("welcome_back", alias=text), Engine.ONBOARDING, at=at)
            self.show_topic_menu()
            return
        self._register_alias(text, at)

    def handle_alias_creation(self, text: str, at: float) -> None:
        if not text or " " in text or "\t" in text or len(text) > ALIAS_MAX_LEN:
            self.say(self.cfg.text("alias_spaces"), Engine.ONBOARDING, at=at)
            return
        if self.deps.profiles.has_alias(text):
            self.say(self.cfg.text("alias_taken"), Engine.ONBOARDING, at=at)
            return
        self._register_alias(text, at)

    def handle_age_answer(self, text: str, at: float) -> None:
        state = self.state
        match = re.search(r"\d{1,3}", text)
        low, high = self.cfg.age_bounds
        if match:
            state.age_years = int(match.group())
            state.age_flagged = not (low <= state.age_years <= high)
        else:
            state.age_years = None
            state.age_flagged = True
        state.phase = Phase.GENDER_QUESTION
        self.say(
            self.cfg.text("age_ack_gender_q"),
            Engine.ONBOARDING,
            keyboard=GENDER_KEYBOARD,
            at=at,
        )

    def handle_gender_answer(self, text: str, at: float) -> None:
        state = self.state
        folded = fold(text.strip().rstrip(".!"))
        if folded in _FEMININE_WORDS:
            state.addressing_gender = AddressingGender.FEMININE
        elif folded in _MASCULINE_WORDS:
            state.addressing_gender = AddressingGender.MASCULINE
        else:
            self.say(
                self.cfg.text("gender_invalid"),
                Engine.ONBOARDING,
                keyboard=GENDER_KEYBOARD,
                at=at,
            )
            return
        self.write_profile()
        state.phase = Phase.TOPIC_MENU
        self.show_topic_menu()

    # -- triage handler ---------------------------------------------------
    def handle_triage_answer(self, text: str, at: float) -> None:
        state = self.state
        question = triage.next_triage_question(self.cfg, state.active_topic, state.triage_answers)
        assert question is not None
        try:
            triage.parse_answer(question, text)
        except triage.AnswerError:
            key = "triage_invalid_yesno" if question.kind == "yes_no" else "triage_invalid_scale"
            keyboard = YESNO_KEYBOARD if question.kind == "yes_no" else SCALE_KEYBOARD
            self.say(self.cfg.text(key), Engine.TRIAGE, keyboard=keyboard, at=at)
            return
        state.triage_answers.append(text)
        nxt = triage.next_triage_question(self.cfg, state.active_topic, state.triage_answers)
        if nxt is not None:
            self.ask_triage(at, with_intro=False)
            return
        record = triage.score_sensitivity(
            self.cfg, state.alias, state.active_topic, state.triage_answers, at
        )
        self.out.effects.append(WriteSensitivity(record))
        state.triage_answers = []
        self.emit_opener(record.level, at)

    # -- idle -------------------------------------------------------------
    def resume_from_idle(self, at: float) -> None:
        state = self.state
        if state.alias is None:
            state.phase = Phase.WELCOME
            self.show_welcome()
            return
        reset_topic(state, at)
        self.say(self.cfg.text("idle_resume"), Engine.CONTROLLED, at=at)
        self.show_topic_menu()

    # -- batch wrap-up ----------------------------------------------------
    def finish(self) -> None:
        state = self.state
        if not self.out.provider_needed or state.phase is not Phase.OPEN_DIALOGUE:
            return
        user_texts = [
            e.text_user_language
            for e in state.topic_context()
            if e.speaker is Speaker.USER
        ]
        if controlled.low_motivation(user_texts, self.cfg.low_motivation_word_threshold):
            # terse streak: nudge with a controlled question, skip the provider
            self.out.provider_needed = False
            self.inject_followup(self.now)
            return
        self.out.effects.append(CallProvider(session_id=state.session_id))


def advance(
    state: SessionState,
    batch: list[InboundItem],
    now: float,
    deps: EngineDeps,
) -> tuple[list[BotMessage], list[Effect]]:
    """Advance one session by one debounced batch."""
    turn = _Turn(state, deps, now)
    for item in batch:
        turn.handle_item(item)
    turn.finish()
    return turn.out.outbound, turn.out.effects


def start_session(
    state: SessionState, deps: EngineDeps, now: float
) -> tuple[list[BotMessage], list[Effect]]:
    """Greet a fresh session; a second call is a no-op."""
    if state.phase is not Phase.WELCOME:
        return [], []
    turn = _Turn(state, deps, now)
    turn.show_welcome()
    return turn.out.outbound, turn.out.effects


def _clear_topic(state: SessionState, at: float) -> None:
    if state.dialogue_context and not state.dialogue_context[-1].is_boundary:
        state.append_context(
            ContextEntry(
                speaker=Speaker.CONTROLLED_SYSTEM,
                engine=Engine.CONTROLLED,
                text_user_language="",
                at=at,
                is_boundary=True,
            )
        )
    state.active_topic = None
    state.free_turn_count = 0
    state.triage_answers = []
    state.recent_followups = []


def reset_topic(state: SessionState, at: float) -> None:
    """Back to the topic menu: topic cleared, counter zeroed, a context
    boundary appended. Identity, persona and sensitivity survive."""
    if state.alias is None:
        raise NotLoggedIn(state.session_id)
    _clear_topic(state, at)
    state.phase = Phase.TOPIC_MENU


def park_idle(state: SessionState) -> None:
    state.phase = Phase.IDLE


def attach_provider_texts(state: SessionState, texts: dict[int, str]) -> None:
    """Fill provider-language renderings for context entries by index."""
    for index, text in texts.items():
        state.dialogue_context[index].text_provider_language = text


def entries_needing_bridge(state: SessionState) -> dict[int, str]:
    """Context entries (by index) still lacking a provider-language text."""
    needed: dict[int, str] = {}
    base = len(state.dialogue_context) - len(state.topic_context())
    for offset, entry in enumerate(state.topic_context()):
        if entry.is_boundary or entry.is_control:
            continue
        if entry.text_provider_language is None:
            needed[base + offset] = entry.text_user_language
    return needed


def complete_open_reply(
    state: SessionState,
    user_text: str,
    provider_text: str,
    now: float,
) -> tuple[list[BotMessage], list[Effect]]:
    """Absorb a provider reply: context entry, outbound message, log effect."""
    state.append_context(
        ContextEntry(
            speaker=Speaker.BOT,
            engine=Engine.OPEN,
            text_user_language=user_text,
            text_provider_language=provider_text,
            at=now,
        )
    )
    message = BotMessage(text=user_text, engine=Engine.OPEN)
    effects: list[Effect] = []
    if state.alias is not None:
        effects.append(
            AppendTurn(
                alias=state.alias,
                persona_id=state.persona.value if state.persona else None,
                topic=state.active_topic,
                engine=Engine.OPEN,
                speaker=Speaker.BOT,
                text_original=user_text,
                text_translated=provider_text if provider_text != user_text else None,
                at=now,
            )
        )
    return [message], effects


def provider_fallback(
    state: SessionState, deps: EngineDeps, now: float
) -> tuple[list[BotMessage], list[Effect]]:
    """Swap a failed provider call for a controlled follow-up question."""
    turn = _Turn(state, deps, now)
    turn.inject_followup(now)
    return turn.out.outbound, turn.out.effects
