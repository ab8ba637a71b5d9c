"""Shared fixtures: config, engine deps, scripted session drivers."""

from __future__ import annotations

import json
import random

import pytest

from charla import session
from charla.config import Config, load_config
from charla.gateways import MockCompletionGateway, MockTranslationGateway
from charla.model import BotMessage, Effect, InboundItem
from charla.service import ChatService
from charla.session import EngineDeps
from charla.store import ProfileStore, SensitivityStore
from charla.temporal import ManualClock

T0 = 1_767_571_200.0  # 2026-01-05T00:00:00Z, keeps day buckets stable


@pytest.fixture(scope="session")
def cfg() -> Config:
    """Packaged defaults; treat as read-only."""
    return load_config()


def cfg_with(tmp_path, overrides: dict) -> Config:
    """Defaults merged with an override document written to disk."""
    path = tmp_path / "override.json"
    path.write_text(json.dumps(overrides, ensure_ascii=False), "utf-8")
    return load_config(path)


def make_deps(tmp_path, cfg: Config, seed: int = 1234) -> EngineDeps:
    root = tmp_path / "deps-store"
    return EngineDeps(
        cfg=cfg,
        rng=random.Random(seed),
        sensitivity=SensitivityStore(root),
        profiles=ProfileStore(root),
    )


def drive(
    state, deps: EngineDeps, text: str, at: float, kind: str = "text"
) -> tuple[list[BotMessage], list[Effect]]:
    """Advance one session by a single-item batch."""
    item = InboundItem(text=text, at=at, kind=kind)
    return session.advance(state, [item], at, deps)


def onboard(state, deps: EngineDeps, alias: str = "croquette13", t: float = T0) -> float:
    """Walk a fresh session to the topic menu; returns the next timestamp."""
    for text in ("/empezar", "/Ada", "/noTengoAlias", alias, "14", "Femenino"):
        drive(state, deps, text, t)
        t += 30.0
    return t


def enter_open(state, deps: EngineDeps, t: float, topic: int = 12) -> float:
    """From the topic menu into the controlled opener via clean triage."""
    for text in (f"/Tema{topic}", "No", "No", "1"):
        drive(state, deps, text, t)
        t += 30.0
    return t


class RecordingSink:
    """Alert sink capturing every pushed record; delivery is scripted."""

    def __init__(self, ok: bool = True) -> None:
        self.ok = ok
        self.pushed = []

    def push(self, record) -> bool:
        self.pushed.append(record)
        return self.ok


def build_service(
    tmp_path,
    cfg: Config,
    replies: list[str] | None = None,
    fail_times: int = 0,
    translation=None,
    sink=None,
    seed: int = 99,
    start: float = T0,
) -> tuple[ChatService, ManualClock]:
    clock = ManualClock(start=start)
    service = ChatService(
        cfg,
        tmp_path / "svc-logs",
        completion=MockCompletionGateway(
            replies or cfg.default_mock_replies, fail_times=fail_times
        ),
        translation=translation or MockTranslationGateway(),
        clock=clock,
        rng=random.Random(seed),
        alert_sink=sink,
    )
    return service, clock
