"""Usage aggregates over the turn log: activity, demographics, vocabulary.

Command messages are excluded everywhere below; they are navigation, not
conversation, and would distort both volumes and vocabularies.
"""

from __future__ import annotations

from collections import Counter, defaultdict

from .. import commands
from ..model import SensitivityOrigin, Speaker, TurnRecord
from ..store import day_bucket
from .textstats import tokenize


def _user_messages(records: list[TurnRecord]) -> list[TurnRecord]:
    return [
        r
        for r in records
        if r.speaker is Speaker.USER and not commands.is_command_text(r.text_original)
    ]


def usage_report(
    records: list[TurnRecord],
    profiles: dict[str, dict],
    sensitivity,
    stopwords: frozenset[str],
    top_k: int = 10,
) -> dict:
    messages = _user_messages(records)

    users_per_day: dict[str, set[str]] = defaultdict(set)
    messages_per_day: Counter[str] = Counter()
    per_user: Counter[str] = Counter()
    for record in messages:
        day = day_bucket(record.at)
        users_per_day[day].add(record.alias)
        messages_per_day[day] += 1
        per_user[record.alias] += 1

    words_per_user: Counter[str] = Counter()
    for record in messages:
        words_per_user[record.alias] += len(tokenize(record.text_original))

    # message and word volume by screening origin: clinician interview,
    # in-chat triage, or never screened
    aliases = sorted({r.alias for r in messages})
    origin_groups: dict[str, list[str]] = {"interview": [], "triage": [], "unscreened": []}
    for alias in aliases:
        topic_records = [r for r in sensitivity.records() if r.alias == alias]
        if any(r.origin is SensitivityOrigin.INTERVIEW for r in topic_records):
            group = "interview"
        elif topic_records:
            group = "triage"
        else:
            group = "unscreened"
        origin_groups[group].append(alias)

    means_by_origin = {}
    for group, members in origin_groups.items():
        message_total = sum(per_user[a] for a in members)
        word_total = sum(words_per_user[a] for a in members)
        means_by_origin[group] = {
            "users": len(members),
            "mean_messages": message_total / len(members) if members else 0.0,
            "mean_words_per_message": (
                word_total / message_total if message_total else 0.0
            ),
        }

    gender_stats: dict[str, dict] = {}
    for alias in aliases:
        profile = profiles.get(alias) or {}
        gender = profile.get("gender") or "unknown"
        slot = gender_stats.setdefault(gender, {"users": 0, "messages": 0, "words": 0})
        slot["users"] += 1
        slot["messages"] += per_user[alias]
        slot["words"] += words_per_user[alias]
    for slot in gender_stats.values():
        slot["mean_messages"] = slot["messages"] / slot["users"] if slot["users"] else 0.0
        slot["mean_words_per_message"] = (
            slot["words"] / slot["messages"] if slot["messages"] else 0.0
        )

    vocabulary: Counter[str] = Counter()
    tokens_by_criterion: dict[str, Counter] = defaultdict(Counter)
    for record in messages:
        tokens = tokenize(record.text_original)
        vocabulary.update(tokens)
        criterion = sensitivity.user_criterion(record.alias) or "unscreened"
        tokens_by_criterion[criterion].update(
            t for t in tokens if t not in stopwords
        )

    topic_interactions: dict[int, Counter] = defaultdict(Counter)
    for record in messages:
        if record.topic is None:
            continue
        criterion = sensitivity.user_criterion(record.alias) or "unscreened"
        topic_interactions[record.topic][criterion] += 1

    top_tokens = {
        criterion: [
            [token, count]
            for token, count in sorted(counter.items(), key=lambda kv: (-kv[1], kv[0]))[:top_k]
        ]
        for criterion, counter in sorted(tokens_by_criterion.items())
    }

    return {
        "total_user_messages": len(messages),
        "total_users": len(aliases),
        "users_per_day": {
            day: len(users) for day, users in sorted(users_per_day.items())
        },
        "messages_per_day": dict(sorted(messages_per_day.items())),
        "messages_per_user_mean": (
            sum(per_user.values()) / len(per_user) if per_user else 0.0
        ),
        "means_by_origin": means_by_origin,
        "genders": dict(sorted(gender_stats.items())),
        "distinct_words": len(vocabulary),
        "topic_interactions": {
            str(topic): dict(sorted(counts.items()))
            for topic, counts in sorted(topic_interactions.items())
        },
        "top_tokens": top_tokens,
    }
