"""Triage answers, scoring and the screening gate."""

from __future__ import annotations

import random

import pytest

from charla import triage
from charla.config import TriageQuestion
from charla.model import SensitivityLevel, SensitivityOrigin
from charla.store import SensitivityStore
from charla.triage import AnswerError, parse_answer, score_sensitivity
from conftest import T0

YESNO = TriageQuestion(topic_id=0, text="q", kind="yes_no")
SCALE = TriageQuestion(topic_id=0, text="q", kind="scale_0_8")


@pytest.mark.parametrize("raw", ["Sí", "si", "SI", "sí.", "claro", "yes", " Sip! "])
def test_yes_variants(raw):
    assert parse_answer(YESNO, raw) is True


@pytest.mark.parametrize("raw", ["No", "no", "NO.", "nop", "que va"])
def test_no_variants(raw):
    assert parse_answer(YESNO, raw) is False


@pytest.mark.parametrize("raw", ["quizas", "3", "", "nunca jamas"])
def test_unparseable_yesno_raises(raw):
    with pytest.raises(AnswerError):
        parse_answer(YESNO, raw)


@pytest.mark.parametrize("raw,expected", [("0", 0), ("8", 8), (" 4.", 4)])
def test_scale_accepts_in_range_integers(raw, expected):
    assert parse_answer(SCALE, raw) == expected


@pytest.mark.parametrize("raw", ["9", "-1", "mucho", "3.5", ""])
def test_scale_rejects_out_of_range(raw):
    with pytest.raises(AnswerError):
        parse_answer(SCALE, raw)


def test_every_topic_has_one_to_three_questions(cfg):
    for tid in cfg.topics:
        assert 1 <= triage.question_count(cfg, tid) <= 3


def test_next_question_walks_the_set_then_none(cfg):
    questions = cfg.topic(12).triage
    answers: list[str] = []
    for expected in questions:
        assert triage.next_triage_question(cfg, 12, answers) == expected
        answers.append("No" if expected.kind == "yes_no" else "0")
    assert triage.next_triage_question(cfg, 12, answers) is None


def test_all_clear_answers_score_healthy(cfg):
    record = score_sensitivity(cfg, "ana", 12, ["No", "No", "1"], T0)
    assert record.level is SensitivityLevel.HEALTHY
    assert record.origin is SensitivityOrigin.TRIAGE
    assert (record.alias, record.topic_id) == ("ana", 12)


def test_any_yes_scores_indicated(cfg):
    record = score_sensitivity(cfg, "ana", 12, ["No", "Sí", "0"], T0)
    assert record.level is SensitivityLevel.INDICATED


def test_scale_at_threshold_scores_indicated(cfg):
    below = score_sensitivity(cfg, "ana", 12, ["No", "No", "3"], T0)
    at = score_sensitivity(cfg, "ana", 12, ["No", "No", "4"], T0)
    assert below.level is SensitivityLevel.HEALTHY
    assert at.level is SensitivityLevel.INDICATED


def test_answer_count_mismatch_raises(cfg):
    with pytest.raises(ValueError, match="expects"):
        score_sensitivity(cfg, "ana", 12, ["No"], T0)


def test_scoring_is_monotone_in_answers(cfg):
    """Raising any single answer can never flip Indicated back to Healthy."""
    rng = random.Random(7)
    questions = cfg.topic(12).triage
    for _ in range(200):
        answers = [
            rng.choice(["Sí", "No"]) if q.kind == "yes_no" else str(rng.randrange(9))
            for q in questions
        ]
        level = score_sensitivity(cfg, "ana", 12, answers, T0).level
        slot = rng.randrange(len(answers))
        bumped = list(answers)
        if questions[slot].kind == "yes_no":
            bumped[slot] = "Sí"
        else:
            bumped[slot] = str(min(8, int(bumped[slot]) + rng.randrange(1, 5)))
        bumped_level = score_sensitivity(cfg, "ana", 12, bumped, T0).level
        if level is SensitivityLevel.INDICATED:
            assert bumped_level is SensitivityLevel.INDICATED


def test_needs_triage_tracks_store(tmp_path, cfg):
    store = SensitivityStore(tmp_path)
    assert triage.needs_triage("ana", 12, store)
    store.put(score_sensitivity(cfg, "ana", 12, ["No", "No", "0"], T0))
    assert not triage.needs_triage("ana", 12, store)
    assert triage.needs_triage("ana", 11, store)  # per topic, not per user
