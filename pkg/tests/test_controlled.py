"""Controlled battery: openers, follow-up rotation, checkpoints, motivation."""

from __future__ import annotations

import random

from charla import controlled
from charla.model import Persona, SensitivityLevel


def test_opener_is_deterministic_per_alias_and_topic(cfg):
    first = controlled.opener_for(cfg, 12, SensitivityLevel.HEALTHY, Persona.ADA, "croquette13")
    again = controlled.opener_for(cfg, 12, SensitivityLevel.HEALTHY, Persona.ADA, "croquette13")
    assert first == again
    assert "{" not in first  # all placeholders resolved


def test_opener_respects_sensitivity_level(cfg):
    healthy = controlled.opener_for(cfg, 9, SensitivityLevel.HEALTHY, Persona.HUGO, "ana")
    indicated = controlled.opener_for(cfg, 9, SensitivityLevel.INDICATED, Persona.HUGO, "ana")
    assert healthy in cfg.topic(9).openers_healthy
    assert indicated in cfg.topic(9).openers_indicated


def test_openers_cover_variants_across_aliases(cfg):
    variants = set(cfg.topic(12).openers_healthy)
    seen = {
        controlled.opener_for(cfg, 12, SensitivityLevel.HEALTHY, Persona.ADA, alias)
        for alias in (f"user{i}" for i in range(40))
    }
    assert seen <= variants
    assert len(seen) > 1  # the hash spreads users over the battery


def test_checkpoint_message_names_both_commands(cfg):
    text = controlled.checkpoint_message(cfg, 12)
    assert cfg.topic(12).soft_name in text
    assert "/cambioTema" in text and "/dimeOtraCosa" in text
    assert "/changeTopic" in text and "/tellMeOtherThing" in text


def test_followup_avoids_recent_window(cfg):
    rng = random.Random(5)
    recent: list[str] = []
    window = cfg.followup_recent_window
    for _ in range(60):
        pick = controlled.pick_followup(cfg, 12, recent, rng)
        assert pick in cfg.topic(12).followups
        assert pick not in recent[-window:]
        recent.append(pick)


def test_followup_survives_poisoned_recent_list(cfg):
    rng = random.Random(5)
    recent = list(cfg.topic(12).followups)  # everything marked as just used
    pick = controlled.pick_followup(cfg, 12, recent, rng)
    assert pick in cfg.topic(12).followups


def test_followup_golden_draw_is_reproducible(cfg):
    a = controlled.pick_followup(cfg, 3, [], random.Random(2024))
    b = controlled.pick_followup(cfg, 3, [], random.Random(2024))
    assert a == b


def test_low_motivation_needs_two_terse_messages():
    assert not controlled.low_motivation([])
    assert not controlled.low_motivation(["si"])
    assert controlled.low_motivation(["si", "no se"])
    assert not controlled.low_motivation(["me pasa algo parecido a eso", "si"])
    assert controlled.low_motivation(
        ["cuenta larga con muchas palabras aqui", "ya", "claro"]
    )


def test_low_motivation_threshold_is_strict():
    exactly_at = ["cuatro palabras justas aqui", "otras cuatro palabras mas"]
    assert not controlled.low_motivation(exactly_at, word_threshold=4)
    assert controlled.low_motivation(exactly_at, word_threshold=5)
