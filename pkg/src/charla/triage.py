"""Triage question flow and sensitivity scoring.

A topic needs triage until some sensitivity record exists for the user,
whether it came from a clinician interview import or from answering the
topic's one-to-three screening questions here.
"""

from __future__ import annotations

from .config import Config, TriageQuestion, fold
from .model import SensitivityLevel, SensitivityOrigin, SensitivityRecord

YES_WORDS = {"si", "yes", "claro", "sip"}  # compared accent-folded
NO_WORDS = {"no", "nop", "que va"}


class AnswerError(ValueError):
    """The free-text answer does not fit the question kind."""


def needs_triage(alias: str, topic_id: int, sensitivity_reader) -> bool:
    return not sensitivity_reader.has_record(alias, topic_id)


def question_count(cfg: Config, topic_id: int) -> int:
    return len(cfg.topic(topic_id).triage)


def next_triage_question(cfg: Config, topic_id: int, answers: list[str]) -> TriageQuestion | None:
    """The next unanswered question, or None once the set is exhausted."""
    questions = cfg.topic(topic_id).triage
    if len(answers) >= len(questions):
        return None
    return questions[len(answers)]


def parse_answer(question: TriageQuestion, text: str):
    """Normalize one answer; bool for yes/no, int for the 0..8 scale."""
    folded = fold(text.strip().rstrip(".!"))
    if question.kind == "yes_no":
        if folded in YES_WORDS:
            return True
        if folded in NO_WORDS:
            return False
        raise AnswerError(f"expected yes/no, got {text!r}")
    if question.kind == "scale_0_8":
        if folded.isdigit():
            value = int(folded)
            if 0 <= value <= 8:
                return value
        raise AnswerError(f"expected 0..8, got {text!r}")
    raise AnswerError(f"unknown question kind {question.kind!r}")


def score_sensitivity(
    cfg: Config,
    alias: str,
    topic_id: int,
    raw_answers: list[str],
    at: float,
) -> SensitivityRecord:
    """Indicated iff any yes answer or any scale answer at/over the threshold."""
    questions = cfg.topic(topic_id).triage
    if len(raw_answers) != len(questions):
        raise ValueError(
            f"topic {topic_id} expects {len(questions)} answers, got {len(raw_answers)}"
        )
    threshold = cfg.scale_threshold(topic_id)
    indicated = False
    for question, raw in zip(questions, raw_answers):
        value = parse_answer(question, raw)
        if question.kind == "yes_no" and value is True:
            indicated = True
        elif question.kind == "scale_0_8" and value >= threshold:
            indicated = True
    level = SensitivityLevel.INDICATED if indicated else SensitivityLevel.HEALTHY
    return SensitivityRecord(
        alias=alias,
        topic_id=topic_id,
        level=level,
        origin=SensitivityOrigin.TRIAGE,
        at=at,
    )
