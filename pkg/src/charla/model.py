"""Domain types shared by the dialogue engines, stores and adapters."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Union


class Phase(str, Enum):
    WELCOME = "welcome"
    PERSONA_CHOICE = "persona_choice"
    LOGIN = "login"
    ALIAS_CREATION = "alias_creation"
    AGE_QUESTION = "age_question"
    GENDER_QUESTION = "gender_question"
    TOPIC_MENU = "topic_menu"
    TRIAGE = "triage"
    CONTROLLED_OPENER = "controlled_opener"
    OPEN_DIALOGUE = "open_dialogue"
    SEMI_CONTROLLED_CHECKPOINT = "semi_controlled_checkpoint"
    IDLE = "idle"


# Phases a session may visit before an alias is on record.
PRE_ALIAS_PHASES = frozenset(
    {Phase.WELCOME, Phase.PERSONA_CHOICE, Phase.LOGIN, Phase.ALIAS_CREATION}
)


class Persona(str, Enum):
    ADA = "Ada"
    HUGO = "Hugo"
    BIG = "Big"

    @property
    def voice_gender(self) -> str:
        return _PERSONA_GENDER[self.value]


_PERSONA_GENDER = {"Ada": "female", "Hugo": "male", "Big": "neutral"}


class AddressingGender(str, Enum):
    FEMININE = "feminine"
    MASCULINE = "masculine"


class Engine(str, Enum):
    ONBOARDING = "onboarding"
    TRIAGE = "triage"
    CONTROLLED = "controlled"
    OPEN = "open"


class Speaker(str, Enum):
    BOT = "bot"
    USER = "user"
    CONTROLLED_SYSTEM = "controlled_system"


class SensitivityLevel(str, Enum):
    HEALTHY = "healthy"
    INDICATED = "indicated"


class SensitivityOrigin(str, Enum):
    INTERVIEW = "interview"
    TRIAGE = "triage"


class Severity(str, Enum):
    WATCH = "watch"
    ALERT = "alert"


@dataclass
class InboundItem:
    """One raw message received from the user channel."""

    text: str
    at: float
    kind: str = "text"  # text | sticker | image | voice

    @property
    def is_text(self) -> bool:
        return self.kind == "text"


@dataclass
class BotMessage:
    """Outbound message; keyboards are short option lists rendered as buttons."""

    text: str
    engine: Engine
    keyboard: tuple[str, ...] | None = None

    def __post_init__(self) -> None:
        if self.keyboard is not None:
            self.keyboard = tuple(self.keyboard)
            if not (2 <= len(self.keyboard) <= 16):
                raise ValueError(f"keyboard needs 2..16 options, got {len(self.keyboard)}")
            for opt in self.keyboard:
                if not opt or len(opt) > 32:
                    raise ValueError(f"keyboard option out of bounds: {opt!r}")


@dataclass
class ContextEntry:
    """One line of the in-session dialogue context used to build provider prompts."""

    speaker: Speaker
    engine: Engine
    text_user_language: str
    at: float
    text_provider_language: str | None = None
    is_boundary: bool = False  # topic-change marker, never rendered
    is_control: bool = False   # re-anchoring line, rendered without speaker prefix


@dataclass
class SessionState:
    session_id: str
    guest_tag: str
    phase: Phase = Phase.WELCOME
    persona: Persona | None = None
    alias: str | None = None
    addressing_gender: AddressingGender | None = None
    age_years: int | None = None
    age_flagged: bool = False
    active_topic: int | None = None
    free_turn_count: int = 0
    dialogue_context: list[ContextEntry] = field(default_factory=list)
    triage_answers: list[str] = field(default_factory=list)
    recent_followups: list[str] = field(default_factory=list)
    last_user_activity: float = 0.0
    reminder_sent: bool = False

    @property
    def log_identity(self) -> str:
        return self.alias if self.alias is not None else self.guest_tag

    def append_context(self, entry: ContextEntry) -> None:
        # context stays time ordered; clamp rather than fail on clock jitter
        if self.dialogue_context and entry.at < self.dialogue_context[-1].at:
            entry.at = self.dialogue_context[-1].at
        self.dialogue_context.append(entry)

    def topic_context(self) -> list[ContextEntry]:
        """Entries since the last topic boundary (the active topic's context)."""
        cut = 0
        for i, entry in enumerate(self.dialogue_context):
            if entry.is_boundary:
                cut = i + 1
        return self.dialogue_context[cut:]


@dataclass
class TurnRecord:
    """One persisted conversation turn. Identity is the alias, nothing else."""

    alias: str
    persona_id: str | None
    topic: int | None
    engine: Engine
    speaker: Speaker
    text_original: str
    text_translated: str | None
    at: float
    turn_index: int

    def __post_init__(self) -> None:
        if self.speaker not in (Speaker.BOT, Speaker.USER):
            raise ValueError("turn records hold bot or user turns only")


@dataclass
class SensitivityRecord:
    alias: str
    topic_id: int
    level: SensitivityLevel
    origin: SensitivityOrigin
    at: float


@dataclass
class AlertRecord:
    alias: str
    matched_pattern: str
    message_excerpt: str
    at: float
    delivered: bool = False

    def __post_init__(self) -> None:
        self.message_excerpt = self.message_excerpt[:200]


# --- Effects returned by the session engine; the caller executes them. ---


@dataclass(frozen=True)
class AppendTurn:
    alias: str
    persona_id: str | None
    topic: int | None
    engine: Engine
    speaker: Speaker
    text_original: str
    text_translated: str | None
    at: float


@dataclass(frozen=True)
class RiskScanRequest:
    identity: str
    text: str
    at: float


@dataclass(frozen=True)
class CallProvider:
    session_id: str


@dataclass(frozen=True)
class WriteSensitivity:
    record: SensitivityRecord


@dataclass(frozen=True)
class WriteProfile:
    alias: str
    persona_id: str
    gender: str | None
    age_years: int | None
    age_flagged: bool
    created_at: float


Effect = Union[AppendTurn, RiskScanRequest, CallProvider, WriteSensitivity, WriteProfile]
