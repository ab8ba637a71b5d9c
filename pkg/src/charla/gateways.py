"""Text-generation and translation gateways.

The engine only ever sees these two small interfaces. HTTP implementations
talk JSON to whatever endpoints the environment provides; mock
implementations replay scripted fixtures so everything runs offline and
deterministically.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Protocol

import requests

COMPLETION_URL_ENV = "COMPLETION_URL"
COMPLETION_KEY_ENV = "COMPLETION_KEY"
TRANSLATE_URL_ENV = "TRANSLATE_URL"
TRANSLATE_KEY_ENV = "TRANSLATE_KEY"
ALERT_WEBHOOK_ENV = "ALERT_WEBHOOK_URL"
OPS_TOKEN_ENV = "OPS_TOKEN"


class GatewayError(Exception):
    """Transport-level failure talking to a provider."""


@dataclass(frozen=True)
class ProviderRequest:
    prompt: str
    max_tokens: int
    temperature: float
    stop_sequences: tuple[str, ...] = ()


@dataclass(frozen=True)
class GatewayResult:
    text: str
    latency_ms: float = 0.0
    truncated: bool = False


class CompletionGateway(Protocol):
    def complete(self, request: ProviderRequest) -> GatewayResult: ...


class TranslationGateway(Protocol):
    def translate(self, text: str, source: str, target: str) -> str: ...


class HttpCompletionGateway:
    def __init__(self, url: str, api_key: str | None = None, timeout: float = 30.0) -> None:
        self.url = url
        self.api_key = api_key
        self.timeout = timeout

    def complete(self, request: ProviderRequest) -> GatewayResult:
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        payload = {
            "prompt": request.prompt,
            "max_tokens": request.max_tokens,
            "temperature": request.temperature,
            "stop": list(request.stop_sequences),
        }
        try:
            resp = requests.post(self.url, json=payload, headers=headers, timeout=self.timeout)
            resp.raise_for_status()
            body = resp.json()
        except (requests.RequestException, ValueError) as exc:
            raise GatewayError(f"completion endpoint failed: {exc}") from exc
        text = body.get("text")
        if text is None:  # OpenAI-style shape as a fallback
            choices = body.get("choices") or []
            text = choices[0].get("text", "") if choices else ""
        return GatewayResult(text=text, truncated=bool(body.get("truncated", False)))


class HttpTranslationGateway:
    def __init__(self, url: str, api_key: str | None = None, timeout: float = 30.0) -> None:
        self.url = url
        self.api_key = api_key
        self.timeout = timeout

    def translate(self, text: str, source: str, target: str) -> str:
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        payload = {"text": text, "source": source, "target": target}
        try:
            resp = requests.post(self.url, json=payload, headers=headers, timeout=self.timeout)
            resp.raise_for_status()
            body = resp.json()
        except (requests.RequestException, ValueError) as exc:
            raise GatewayError(f"translation endpoint failed: {exc}") from exc
        return body.get("text", text)


class MockCompletionGateway:
    """Replays an ordered list of scripted replies, cycling when exhausted."""

    def __init__(self, replies: list[str], fail_times: int = 0) -> None:
        if not replies:
            raise ValueError("mock completion needs at least one scripted reply")
        self.replies = list(replies)
        self.fail_times = fail_times
        self.calls: list[ProviderRequest] = []
        self._cursor = 0

    @classmethod
    def from_fixture(cls, path: str | Path) -> "MockCompletionGateway":
        data = json.loads(Path(path).read_text("utf-8"))
        return cls(list(data["completions"]))

    def complete(self, request: ProviderRequest) -> GatewayResult:
        self.calls.append(request)
        if self.fail_times > 0:
            self.fail_times -= 1
            raise GatewayError("scripted failure")
        text = self.replies[self._cursor % len(self.replies)]
        self._cursor += 1
        return GatewayResult(text=text)


class MockTranslationGateway:
    """Reversible tag scheme: strips the source-language tag when present,
    otherwise prepends the target-language tag, so both round trips are
    lossless."""

    def __init__(self) -> None:
        self.calls: list[tuple[str, str, str]] = []

    @staticmethod
    def _tag(language: str) -> str:
        return f"⟦{language.upper()}⟧"

    def translate(self, text: str, source: str, target: str) -> str:
        self.calls.append((text, source, target))
        source_tag = self._tag(source)
        if text.startswith(source_tag):
            return text[len(source_tag):]
        return self._tag(target) + text


class IdentityTranslationGateway:
    def translate(self, text: str, source: str, target: str) -> str:
        return text


@dataclass
class FlakyCompletionGateway:
    """Fails a set number of times before handing off to the inner gateway."""

    inner: CompletionGateway
    failures: int = 0
    attempts: int = field(default=0)

    def complete(self, request: ProviderRequest) -> GatewayResult:
        self.attempts += 1
        if self.attempts <= self.failures:
            raise GatewayError(f"scripted failure #{self.attempts}")
        return self.inner.complete(request)


def completion_from_env(default_replies: list[str]) -> CompletionGateway:
    url = os.environ.get(COMPLETION_URL_ENV)
    if url:
        return HttpCompletionGateway(url, os.environ.get(COMPLETION_KEY_ENV))
    return MockCompletionGateway(default_replies)


def translation_from_env() -> TranslationGateway:
    url = os.environ.get(TRANSLATE_URL_ENV)
    if url:
        return HttpTranslationGateway(url, os.environ.get(TRANSLATE_KEY_ENV))
    return MockTranslationGateway()
