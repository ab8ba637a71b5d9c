"""Command parsing: every surface form, both languages, and near misses."""

from __future__ import annotations

import random

import pytest

from charla.commands import (
    Command,
    CommandKind,
    FreeText,
    UnknownCommand,
    all_command_variants,
    canonical_form,
    is_command_text,
    parse_input,
)
from charla.model import Persona

BOTH_LANGUAGE_FORMS = {
    CommandKind.START: ("/empezar", "/start"),
    CommandKind.HELP: ("/ayuda", "/help"),
    CommandKind.NO_ALIAS: ("/noTengoAlias", "/noAliases"),
    CommandKind.CHANGE_TOPIC: ("/cambioTema", "/changeTopic"),
    CommandKind.TELL_ME_OTHER: ("/dimeOtraCosa", "/tellMeOtherThing"),
}


def test_every_family_parses_in_both_languages():
    for kind, (spanish, english) in BOTH_LANGUAGE_FORMS.items():
        for form in (spanish, english):
            parsed = parse_input(form)
            assert isinstance(parsed, Command)
            assert parsed.kind is kind
    for persona in Persona:
        parsed = parse_input(f"/{persona.value}")
        assert parsed == Command(CommandKind.PERSONA, persona=persona)
    for n in (0, 7, 13):
        assert parse_input(f"/Tema{n}") == Command(CommandKind.TOPIC, topic_id=n)
        assert parse_input(f"/Topic{n}") == Command(CommandKind.TOPIC, topic_id=n)


def test_all_published_variants_round_trip():
    for form, expected in all_command_variants():
        assert parse_input(form) == expected


def test_matching_is_case_insensitive_and_ignores_edges():
    assert parse_input("/EMPEZAR") == Command(CommandKind.START)
    assert parse_input("  /ada  ") == Command(CommandKind.PERSONA, persona=Persona.ADA)
    assert parse_input("/tOpIc12") == Command(CommandKind.TOPIC, topic_id=12)


def test_plain_text_is_free_text():
    parsed = parse_input("hola, me llamo juan")
    assert isinstance(parsed, FreeText)
    assert parsed.text == "hola, me llamo juan"
    assert not is_command_text("hola")
    assert is_command_text("/ayuda")


def test_trailing_words_make_a_command_unknown():
    assert isinstance(parse_input("/empezar ya mismo"), UnknownCommand)


def test_topic_ids_outside_catalog_are_unknown():
    assert isinstance(parse_input("/Tema14"), UnknownCommand)
    assert isinstance(parse_input("/Topic99"), UnknownCommand)
    assert isinstance(parse_input("/Tema-1"), UnknownCommand)


@pytest.mark.parametrize(
    "raw",
    ["/", "/empeza", "/ayudame", "/noTengoAlia", "/cambioTemas", "/Adas", "/Tema", "/Topic"],
)
def test_close_misspellings_are_unknown(raw):
    assert isinstance(parse_input(raw), UnknownCommand)


def test_fuzzed_near_misses_never_parse_and_never_raise():
    accepted = {form.lower() for form, _ in all_command_variants()}
    rng = random.Random(20260823)
    base_forms = [form for form, _ in all_command_variants()]
    cases = []
    while len(cases) < 100:
        form = rng.choice(base_forms)
        mutation = rng.randrange(4)
        if mutation == 0:
            pos = rng.randrange(1, len(form))
            candidate = form[:pos] + chr(rng.randrange(97, 123)) + form[pos:]
        elif mutation == 1 and len(form) > 2:
            pos = rng.randrange(1, len(form))
            candidate = form[:pos] + form[pos + 1 :]
        elif mutation == 2:
            candidate = form + rng.choice(["x", "9", "!", "_", "es"])
        else:
            candidate = "/" + "".join(
                chr(rng.randrange(97, 123)) for _ in range(rng.randrange(2, 12))
            )
        if candidate.lower().split()[0] in accepted:
            continue  # mutation landed on a real form, not a near miss
        cases.append(candidate)
    for candidate in cases:
        parsed = parse_input(candidate)  # must classify, never raise
        assert isinstance(parsed, UnknownCommand)
    assert len(cases) == 100


def test_canonical_forms_render_per_language():
    assert canonical_form(Command(CommandKind.CHANGE_TOPIC), "es") == "/cambioTema"
    assert canonical_form(Command(CommandKind.CHANGE_TOPIC), "en") == "/changeTopic"
    assert canonical_form(Command(CommandKind.TOPIC, topic_id=5), "es") == "/Tema5"
    assert canonical_form(Command(CommandKind.TOPIC, topic_id=5), "en") == "/Topic5"
    assert canonical_form(Command(CommandKind.PERSONA, persona=Persona.BIG)) == "/Big"
