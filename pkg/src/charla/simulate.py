"""Deterministic multi-user simulation against mocked gateways.

Everything that could wobble is pinned: a manual clock starting at a fixed
epoch, explicit session ids, one seeded RNG per simulated user derived from
the master seed, and a cycling mock completion gateway. The same seed must
produce a byte-identical analysis report, which the acceptance tests check.
"""

from __future__ import annotations

import heapq
import json
import random
from pathlib import Path

from .config import Config
from .gateways import MockCompletionGateway, MockTranslationGateway
from .service import ChatService
from .temporal import ManualClock

SIM_EPOCH = 1767571200.0  # 2026-01-05T00:00:00Z, keeps day buckets stable

PERSONA_COMMANDS = ["/Ada", "/Hugo", "/Big"]
GENDER_ANSWERS = ["Femenino", "Masculino", "chica", "chico"]

LONG_PHRASES = [
    "pues la verdad es que últimamente me cuesta concentrarme en clase",
    "no sé, a veces siento que nadie me entiende en casa",
    "mis amigos dicen que exagero pero yo lo paso fatal",
    "cuando llego del insti me encierro en mi cuarto y no salgo",
    "me gustaría contárselo a mis padres pero no sé cómo empezar",
    "ayer dormí fatal pensando en el examen de mates",
    "en el recreo me quedo sola casi siempre y es un rollo",
    "hay un grupo de clase que se mete conmigo por el móvil",
    "cuando juego online se me pasa el tiempo volando sin darme cuenta",
    "a veces como mucho de golpe y luego me siento culpable",
    "me pongo muy nervioso cuando tengo que hablar delante de todos",
    "el finde estuve con mi prima y me lo pasé genial",
    "mi madre dice que estoy todo el día enganchado a la consola",
    "últimamente lloro por cualquier tontería y no sé por qué",
    "me da miedo ir en ascensor desde lo que pasó en el centro comercial",
    "en verano me agobia muchísimo ir a la playa con tanta gente",
    "no me gusta mirarme al espejo casi nunca, la verdad",
    "hoy en clase me he reído un montón con mi mejor amiga",
    "mi tutor me preguntó si estaba bien y no supe qué decirle",
    "llevo unos días comiendo poco porque no tengo hambre",
]

TERSE_PHRASES = ["si", "no se", "vale", "puede", "ya", "ok", "no", "claro", "bueno", "jaja"]

RISK_PHRASES = [
    "a veces pienso que no quiero vivir",
    "estoy fatal y me odio mucho",
]


def _user_plan(user_rng: random.Random, alias: str, days: int, index: int) -> list[str]:
    """The full ordered message script for one simulated user."""
    plan: list[str] = ["/empezar", user_rng.choice(PERSONA_COMMANDS)]
    plan.append(alias)
    plan.append(str(user_rng.randint(11, 19)))
    plan.append(user_rng.choice(GENDER_ANSWERS))

    screened: set[int] = set()
    topic_count = 1 if user_rng.random() < 0.55 else 2
    topics = user_rng.sample(range(14), topic_count)
    for pos, topic_id in enumerate(topics):
        if pos > 0:
            plan.append("/cambioTema")
        plan.append(f"/Tema{topic_id}")
        if topic_id not in screened:
            screened.add(topic_id)
            plan.append(user_rng.choice(["Sí", "No", "si", "no"]))
            plan.append(user_rng.choice(["Sí", "No", "no", "si"]))
            plan.append(str(user_rng.randint(0, 8)))
        free_count = user_rng.randint(4, 9)
        for i in range(free_count):
            if user_rng.random() < 0.18:
                plan.append(user_rng.choice(TERSE_PHRASES))
            else:
                plan.append(user_rng.choice(LONG_PHRASES))
        if user_rng.random() < 0.25:
            plan.append("/dimeOtraCosa")
            plan.append(user_rng.choice(LONG_PHRASES))
    if index % 7 == 3:
        plan.append(user_rng.choice(RISK_PHRASES))
    return plan


def _gap_for(user_rng: random.Random, step: int, long_gap_user: bool) -> float:
    if long_gap_user and step == 9:
        # a day of silence so the reminder path gets exercised
        return 24 * 3600.0 + user_rng.uniform(0, 1800)
    if user_rng.random() < 0.2:
        return user_rng.uniform(2.0, 8.0)  # quick doublet, lands in one batch
    return user_rng.uniform(20.0, 240.0)


def load_script(path: str | Path) -> list[dict]:
    """Persona script: explicit user scripts instead of generated plans.

    Schema: {"users": [{"alias", "messages": [...], optional "persona",
    "age", "gender", "start_offset_hours", "think_time": {"min","max"}}]}.
    The onboarding exchange is derived from the profile fields; "messages"
    holds everything after it (topic commands, answers, free text).
    """
    try:
        payload = json.loads(Path(path).read_text("utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ValueError(f"script unreadable: {exc}") from exc
    users = payload.get("users")
    if not isinstance(users, list) or not users:
        raise ValueError("script needs a non-empty 'users' list")
    seen: set[str] = set()
    for i, user in enumerate(users):
        if not isinstance(user, dict):
            raise ValueError(f"script user #{i} is not an object")
        alias = user.get("alias")
        if not isinstance(alias, str) or not alias or " " in alias:
            raise ValueError(f"script user #{i}: bad alias {alias!r}")
        if alias in seen:
            raise ValueError(f"script user #{i}: duplicate alias {alias!r}")
        seen.add(alias)
        messages = user.get("messages")
        if not isinstance(messages, list) or not all(
            isinstance(m, str) and m for m in messages
        ):
            raise ValueError(f"script user {alias!r}: 'messages' must be non-empty strings")
        persona = user.get("persona", "/Ada")
        if persona not in PERSONA_COMMANDS:
            raise ValueError(f"script user {alias!r}: persona must be one of {PERSONA_COMMANDS}")
        think = user.get("think_time", {})
        if think and not (
            isinstance(think, dict)
            and float(think.get("min", 0)) >= 0
            and float(think.get("max", 0)) >= float(think.get("min", 0))
        ):
            raise ValueError(f"script user {alias!r}: bad think_time")
    return users


def _scripted_plan(user: dict) -> list[str]:
    return [
        "/empezar",
        user.get("persona", "/Ada"),
        user["alias"],
        str(user.get("age", "14")),
        str(user.get("gender", "Femenino")),
        *user["messages"],
    ]


def run_simulation(
    cfg: Config,
    out_root: str,
    seed: int,
    users: int = 10,
    days: int = 3,
    script_path: str | Path | None = None,
) -> dict:
    clock = ManualClock(start=SIM_EPOCH)
    service = ChatService(
        cfg,
        out_root,
        completion=MockCompletionGateway(cfg.default_mock_replies),
        translation=MockTranslationGateway(),
        clock=clock,
        rng=random.Random(seed),
    )

    script_users = load_script(script_path) if script_path is not None else None
    if script_users is not None:
        users = len(script_users)

    heap: list[tuple[float, int, str, str, str]] = []
    seq = 0
    for k in range(1, users + 1):
        user_rng = random.Random(seed * 100003 + k)
        sid = f"sim-session-{k}"
        if script_users is not None:
            entry = script_users[k - 1]
            plan = _scripted_plan(entry)
            start = SIM_EPOCH + float(entry.get("start_offset_hours", k)) * 3600.0
            think = entry.get("think_time") or {}
            lo = float(think.get("min", 20.0))
            hi = float(think.get("max", 240.0))
            gap = lambda step: user_rng.uniform(lo, hi)  # noqa: B023
        else:
            plan = _user_plan(user_rng, f"sim-{k}", days, k)
            start = (
                SIM_EPOCH
                + (k % max(days, 1)) * 86400.0
                + user_rng.uniform(8 * 3600.0, 20 * 3600.0)
            )
            long_gap_user = k % 5 == 0
            gap = lambda step: _gap_for(user_rng, step, long_gap_user)  # noqa: B023
        heapq.heappush(heap, (start, seq, "create", sid, ""))
        seq += 1
        t = start + user_rng.uniform(5.0, 30.0)
        for step, text in enumerate(plan):
            heapq.heappush(heap, (t, seq, "message", sid, text))
            seq += 1
            t += gap(step)

    events = 0
    while heap:
        at, _, kind, sid, text = heapq.heappop(heap)
        if at > clock.now():
            clock.advance(at - clock.now())
        service.pump()
        if kind == "create":
            service.create_session(session_id=sid)
        else:
            service.submit(sid, text)
        events += 1

    clock.advance(cfg.debounce_seconds + 1.0)
    service.pump()
    turns = service.stores.turns.total_appended
    alerts = service.stores.alerts.count()
    service.close()

    return {
        "users": users,
        "events": events,
        "turns": turns,
        "alerts": alerts,
        "root": out_root,
    }
