"""Slash-command parsing and rendering.

Every command has a Spanish and an English surface form; matching is
case-insensitive and anything that does not match exactly one known form
is either free text (no leading slash) or an unknown command.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum

from .model import Persona

TOPIC_MIN = 0
TOPIC_MAX = 13


class CommandKind(Enum):
    START = "start"
    PERSONA = "persona"
    HELP = "help"
    NO_ALIAS = "no_alias"
    CHANGE_TOPIC = "change_topic"
    TELL_ME_OTHER = "tell_me_other"
    TOPIC = "topic"


@dataclass(frozen=True)
class Command:
    kind: CommandKind
    persona: Persona | None = None
    topic_id: int | None = None


@dataclass(frozen=True)
class FreeText:
    text: str


@dataclass(frozen=True)
class UnknownCommand:
    raw: str


ParsedInput = Command | FreeText | UnknownCommand

# canonical surface forms, Spanish first
_FORMS: dict[CommandKind, tuple[str, str]] = {
    CommandKind.START: ("/empezar", "/start"),
    CommandKind.HELP: ("/ayuda", "/help"),
    CommandKind.NO_ALIAS: ("/noTengoAlias", "/noAliases"),
    CommandKind.CHANGE_TOPIC: ("/cambioTema", "/changeTopic"),
    CommandKind.TELL_ME_OTHER: ("/dimeOtraCosa", "/tellMeOtherThing"),
}

# tolerated extra spellings seen in the wild
_EXTRA_FORMS: dict[str, CommandKind] = {
    "/noalias": CommandKind.NO_ALIAS,
    "/tellmeanotherthing": CommandKind.TELL_ME_OTHER,
}

_TOPIC_RE = re.compile(r"^/(?:tema|topic)(\d+)$", re.IGNORECASE)

_LOOKUP: dict[str, Command] = {}
for _kind, _pair in _FORMS.items():
    for _form in _pair:
        _LOOKUP[_form.lower()] = Command(_kind)
for _form, _kind in _EXTRA_FORMS.items():
    _LOOKUP[_form] = Command(_kind)
for _p in Persona:
    _LOOKUP[f"/{_p.value.lower()}"] = Command(CommandKind.PERSONA, persona=_p)


def parse_input(text: str) -> ParsedInput:
    """Classify one inbound text as command, unknown command or free text."""
    stripped = text.strip()
    if not stripped.startswith("/"):
        return FreeText(text)
    token = stripped.split()[0] if stripped.split() else stripped
    if len(stripped.split()) > 1:
        # commands are single tokens; trailing words make it unknown
        return UnknownCommand(text)
    hit = _LOOKUP.get(token.lower())
    if hit is not None:
        return hit
    m = _TOPIC_RE.match(token)
    if m:
        topic_id = int(m.group(1))
        if TOPIC_MIN <= topic_id <= TOPIC_MAX:
            return Command(CommandKind.TOPIC, topic_id=topic_id)
    return UnknownCommand(text)


def canonical_form(cmd: Command, language: str = "es") -> str:
    """Render the canonical surface form of a command for a language."""
    idx = 0 if language == "es" else 1
    if cmd.kind is CommandKind.PERSONA:
        assert cmd.persona is not None
        return f"/{cmd.persona.value}"
    if cmd.kind is CommandKind.TOPIC:
        assert cmd.topic_id is not None
        word = "Tema" if language == "es" else "Topic"
        return f"/{word}{cmd.topic_id}"
    return _FORMS[cmd.kind][idx]


def all_command_variants() -> list[tuple[str, Command]]:
    """Every accepted surface form with the command it parses to."""
    out: list[tuple[str, Command]] = [(form, cmd) for form, cmd in _LOOKUP.items()]
    for n in range(TOPIC_MIN, TOPIC_MAX + 1):
        out.append((f"/Tema{n}", Command(CommandKind.TOPIC, topic_id=n)))
        out.append((f"/Topic{n}", Command(CommandKind.TOPIC, topic_id=n)))
    return out


def is_command_text(text: str) -> bool:
    return isinstance(parse_input(text), Command)
