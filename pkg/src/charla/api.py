"""HTTP surface: the chat session API and the operator views.

Long-polling keeps the transport dependency-free on the client side: the
events endpoint parks up to 25 seconds waiting for something newer than the
caller's cursor. A background thread drives the service pump so debounce
windows and reminders fire without traffic.
"""

from __future__ import annotations

import os
import threading
from contextlib import asynccontextmanager
from pathlib import Path

from fastapi import Depends, FastAPI, HTTPException, Request
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from .gateways import OPS_TOKEN_ENV
from .service import LONG_POLL_SECONDS, ChatService

PUMP_INTERVAL_SECONDS = 0.5


class MessageIn(BaseModel):
    text: str
    kind: str = "text"


def _check_ops_token(request: Request) -> None:
    expected = os.environ.get(OPS_TOKEN_ENV)
    if not expected:
        return
    header = request.headers.get("authorization", "")
    if header != f"Bearer {expected}":
        raise HTTPException(status_code=401, detail="bad or missing ops token")


def create_app(service: ChatService, static_dir: str | None = None) -> FastAPI:
    stop_event = threading.Event()

    def _pump_loop() -> None:
        while not stop_event.wait(PUMP_INTERVAL_SECONDS):
            service.pump()

    @asynccontextmanager
    async def _lifespan(app: FastAPI):
        thread = threading.Thread(target=_pump_loop, name="charla-pump", daemon=True)
        thread.start()
        try:
            yield
        finally:
            stop_event.set()
            thread.join(timeout=2.0)
            service.close()

    app = FastAPI(title="charla", docs_url=None, redoc_url=None, lifespan=_lifespan)
    app.state.service = service

    @app.get("/healthz")
    def healthz() -> dict:
        return {"ok": True}

    @app.post("/api/sessions", status_code=201)
    def create_session() -> dict:
        sid = service.create_session()
        return {"session_id": sid}

    @app.post("/api/sessions/{sid}/messages", status_code=202)
    def post_message(sid: str, message: MessageIn) -> dict:
        try:
            service.submit(sid, message.text, message.kind)
        except KeyError:
            raise HTTPException(status_code=404, detail="unknown session")
        return {"accepted": True}

    @app.get("/api/sessions/{sid}/events")
    def get_events(sid: str, since: int = 0, timeout: float = LONG_POLL_SECONDS) -> dict:
        timeout = max(0.0, min(timeout, LONG_POLL_SECONDS))
        try:
            events = service.wait_events(sid, since, timeout)
        except KeyError:
            raise HTTPException(status_code=404, detail="unknown session")
        cursor = events[-1]["seq"] if events else since
        return {"events": events, "cursor": cursor}

    @app.get("/api/ops/alerts", dependencies=[Depends(_check_ops_token)])
    def ops_alerts(since: int = 0) -> dict:
        alerts, cursor = service.alerts_since(since)
        return {"alerts": alerts, "cursor": cursor}

    @app.get("/api/ops/ranking", dependencies=[Depends(_check_ops_token)])
    def ops_ranking(n: int = 10) -> dict:
        return {"ranking": service.ranking(n)}

    @app.get("/api/ops/stats", dependencies=[Depends(_check_ops_token)])
    def ops_stats() -> dict:
        return service.stats()

    if static_dir and Path(static_dir).is_dir():
        app.mount("/", StaticFiles(directory=static_dir, html=True), name="console")

    return app
