"""Controlled-dialogue battery: openers, follow-ups, checkpoints, motivation.

Opener choice is deterministic per (alias, topic) so replays reproduce the
same text; follow-up choice is uniform over the variants not used recently,
driven by the injected RNG.
"""

from __future__ import annotations

import random

from .config import Config
from .model import Persona, SensitivityLevel


def opener_for(
    cfg: Config,
    topic_id: int,
    level: SensitivityLevel,
    persona: Persona,
    alias: str,
) -> str:
    topic = cfg.topic(topic_id)
    variants = (
        topic.openers_indicated
        if level is SensitivityLevel.INDICATED
        else topic.openers_healthy
    )
    # stable per-user variant, no RNG involved
    idx = (sum(ord(ch) for ch in alias) + topic_id) % len(variants)
    return variants[idx].format(bot=persona.value, alias=alias, topic_soft=topic.soft_name)


def checkpoint_message(cfg: Config, topic_id: int) -> str:
    topic = cfg.topic(topic_id)
    return cfg.checkpoint_template.format(topic_soft=topic.soft_name)


def pick_followup(
    cfg: Config,
    topic_id: int,
    recent: list[str],
    rng: random.Random,
) -> str:
    """Uniform draw over the topic's variants, excluding recently used ones."""
    variants = cfg.topic(topic_id).followups
    window = min(cfg.followup_recent_window, len(variants) - 1)
    blocked = set(recent[-window:]) if window > 0 else set()
    candidates = [v for v in variants if v not in blocked]
    if not candidates:  # window misconfigured or recent list poisoned
        candidates = list(variants)
    return rng.choice(candidates)


def low_motivation(last_user_texts: list[str], word_threshold: int = 4) -> bool:
    """True when the two newest user messages are both terse."""
    if len(last_user_texts) < 2:
        return False
    return all(len(text.split()) < word_threshold for text in last_user_texts[-2:])
