"""Configuration loading and validation.

The whole conversational battery lives in one JSON document: topic catalog,
triage questions, openers, follow-up variants, nudges, risk lexicon and the
analytics lexicons. A user-supplied file is deep-merged over the packaged
defaults, then linted; content problems fail fast at load time.
"""

from __future__ import annotations

import json
import unicodedata
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any


class ConfigError(Exception):
    """Raised when the configuration document is structurally unsound."""


MIN_FOLLOWUP_VARIANTS = 100
TOPIC_COUNT = 14


def fold(text: str) -> str:
    """Casefold and strip diacritics, for accent-insensitive comparisons."""
    decomposed = unicodedata.normalize("NFD", text.casefold())
    return "".join(ch for ch in decomposed if not unicodedata.combining(ch))


@dataclass(frozen=True)
class TriageQuestion:
    topic_id: int
    text: str
    kind: str  # yes_no | scale_0_8
    weight: float = 1.0


@dataclass(frozen=True)
class Topic:
    id: int
    soft_name: str
    clinical_name: str
    focus: str
    openers_healthy: tuple[str, ...]
    openers_indicated: tuple[str, ...]
    followups: tuple[str, ...]
    triage: tuple[TriageQuestion, ...]
    open_prompt: str


@dataclass
class Config:
    raw: dict[str, Any]
    topics: dict[int, Topic] = field(default_factory=dict)

    # -- convenience accessors -------------------------------------------
    @property
    def user_language(self) -> str:
        return self.raw["language"]["user_language"]

    @property
    def provider_language(self) -> str:
        return self.raw["language"]["provider_language"]

    @property
    def bridge_enabled(self) -> bool:
        return bool(self.raw["language"]["bridge_enabled"])

    @property
    def max_tokens(self) -> int:
        return int(self.raw["provider"]["max_tokens"])

    @property
    def temperature(self) -> float:
        return float(self.raw["provider"]["temperature"])

    @property
    def context_token_budget(self) -> int:
        return int(self.raw["provider"]["context_token_budget"])

    @property
    def provider_retries(self) -> int:
        return int(self.raw["provider"]["retries"])

    @property
    def backoff_seconds(self) -> list[float]:
        return [float(x) for x in self.raw["provider"]["backoff_seconds"]]

    @property
    def debounce_seconds(self) -> float:
        return float(self.raw["timing"]["debounce_seconds"])

    @property
    def reminder_hours(self) -> float:
        return float(self.raw["timing"]["reminder_hours"])

    @property
    def session_ttl_hours(self) -> float | None:
        v = self.raw["timing"].get("session_ttl_hours")
        return None if v is None else float(v)

    @property
    def low_motivation_word_threshold(self) -> int:
        return int(self.raw["engagement"]["low_motivation_word_threshold"])

    @property
    def followup_recent_window(self) -> int:
        return int(self.raw["engagement"]["followup_recent_window"])

    @property
    def age_bounds(self) -> tuple[int, int]:
        p = self.raw["profile"]
        return int(p["age_min"]), int(p["age_max"])

    @property
    def checkpoint_template(self) -> str:
        return self.raw["checkpoint_template"]

    @property
    def nudges(self) -> list[str]:
        return list(self.raw["nudges"])

    @property
    def preamble_template(self) -> str:
        return self.raw["open_dialogue"]["preamble_template"]

    @property
    def reanchor_template(self) -> str:
        return self.raw["open_dialogue"]["reanchor_template"]

    def text(self, key: str, **kwargs: Any) -> str:
        template = self.raw["texts"][key]
        return template.format(**kwargs) if kwargs else template

    def persona_intro(self, persona_name: str) -> str:
        return self.raw["personas"][persona_name]["intro"]

    @property
    def default_mock_replies(self) -> list[str]:
        return list(self.raw["gateways"]["mock_replies"])

    def scale_threshold(self, topic_id: int) -> int:
        overrides = self.raw["triage"].get("per_topic_thresholds", {})
        return int(overrides.get(str(topic_id), self.raw["triage"]["scale_threshold"]))

    def topic(self, topic_id: int) -> Topic:
        try:
            return self.topics[topic_id]
        except KeyError:
            raise ConfigError(f"unknown topic id {topic_id}") from None


def _deep_merge(base: dict, override: dict) -> dict:
    merged = dict(base)
    for key, value in override.items():
        if key in merged and isinstance(merged[key], dict) and isinstance(value, dict):
            merged[key] = _deep_merge(merged[key], value)
        else:
            merged[key] = value
    return merged


def _parse_topics(raw: dict[str, Any]) -> dict[int, Topic]:
    topics: dict[int, Topic] = {}
    for entry in raw["topics"]:
        tid = int(entry["id"])
        triage = tuple(
            TriageQuestion(
                topic_id=tid,
                text=q["text"],
                kind=q["kind"],
                weight=float(q.get("weight", 1.0)),
            )
            for q in entry["triage"]
        )
        topics[tid] = Topic(
            id=tid,
            soft_name=entry["soft_name"],
            clinical_name=entry["clinical_name"],
            focus=entry["focus"],
            openers_healthy=tuple(entry["openers"]["healthy"]),
            openers_indicated=tuple(entry["openers"]["indicated"]),
            followups=tuple(entry["followups"]),
            triage=triage,
            open_prompt=entry["open_prompt"],
        )
    return topics


def _lint(cfg: Config) -> None:
    problems: list[str] = []
    topics = cfg.topics

    if len(topics) != TOPIC_COUNT:
        problems.append(f"expected {TOPIC_COUNT} topics, found {len(topics)}")
    if set(topics) != set(range(TOPIC_COUNT)) and len(topics) == TOPIC_COUNT:
        problems.append("topic ids must be exactly 0..13")

    markers = [m.casefold() for m in cfg.raw.get("self_disclosure_markers", [])]
    if not markers:
        problems.append("self_disclosure_markers must not be empty")

    total_followups = 0
    for topic in topics.values():
        total_followups += len(topic.followups)
        if not (1 <= len(topic.triage) <= 3):
            problems.append(f"topic {topic.id}: needs 1..3 triage questions")
        for q in topic.triage:
            if q.kind not in ("yes_no", "scale_0_8"):
                problems.append(f"topic {topic.id}: bad triage kind {q.kind!r}")
        if not topic.openers_healthy or not topic.openers_indicated:
            problems.append(f"topic {topic.id}: needs openers for both levels")
        clinical = fold(topic.clinical_name)
        for opener in topic.openers_healthy + topic.openers_indicated:
            low = opener.casefold()
            if not any(m in low for m in markers):
                problems.append(f"topic {topic.id}: opener lacks a self-disclosure marker: {opener[:40]!r}")
            if not opener.rstrip().endswith("?"):
                problems.append(f"topic {topic.id}: opener does not end with a question: {opener[:40]!r}")
            if clinical and clinical in fold(opener):
                problems.append(f"topic {topic.id}: opener leaks the clinical name")
        if "{bot}" not in topic.open_prompt:
            problems.append(f"topic {topic.id}: open_prompt is missing the {{bot}} placeholder")

    if total_followups < MIN_FOLLOWUP_VARIANTS:
        problems.append(
            f"follow-up battery too small: {total_followups} variants, need >= {MIN_FOLLOWUP_VARIANTS}"
        )

    checkpoint = cfg.raw.get("checkpoint_template", "")
    if "/cambioTema" not in checkpoint or "/dimeOtraCosa" not in checkpoint:
        problems.append("checkpoint_template must mention /cambioTema and /dimeOtraCosa")
    if "/changeTopic" not in checkpoint or "/tellMeOtherThing" not in checkpoint:
        problems.append("checkpoint_template must mention /changeTopic and /tellMeOtherThing")

    if not cfg.raw.get("nudges"):
        problems.append("nudges must not be empty")

    preamble = cfg.raw["open_dialogue"].get("preamble_template", "")
    if "{bot}" not in preamble or "{alias}" not in preamble:
        problems.append("preamble_template needs {bot} and {alias} placeholders")

    lexicon = cfg.raw.get("risk_lexicon", [])
    if not lexicon:
        problems.append("risk_lexicon must not be empty")
    for entry in lexicon:
        if not entry.get("pattern", "").strip():
            problems.append("risk_lexicon contains an empty pattern")
        if entry.get("severity") not in ("watch", "alert"):
            problems.append(f"risk_lexicon severity invalid: {entry.get('severity')!r}")

    if problems:
        raise ConfigError("; ".join(problems))


def default_config_dict() -> dict[str, Any]:
    payload = resources.files("charla.data").joinpath("default_config.json").read_text("utf-8")
    return json.loads(payload)


def load_config(path: str | Path | None = None) -> Config:
    """Load the packaged defaults, optionally merged with a user file."""
    raw = default_config_dict()
    if path is not None:
        try:
            user_raw = json.loads(Path(path).read_text("utf-8"))
        except FileNotFoundError as exc:
            raise ConfigError(f"config file not found: {path}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file is not valid JSON: {exc}") from exc
        raw = _deep_merge(raw, user_raw)
    cfg = Config(raw=raw, topics=_parse_topics(raw))
    _lint(cfg)
    return cfg
