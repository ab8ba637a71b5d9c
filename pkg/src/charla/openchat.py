"""Open-dialogue prompt construction and provider calls.

The prompt is the persona preamble, the per-topic scene prompt, the current
topic's context lines and a trailing speaker cue. Context lines render as
"name: text" in the provider language; re-anchoring control lines render
bare. If the whitespace-token budget overflows, the oldest context lines are
dropped in pairs; the preamble, the topic prompt and the newest line always
survive.
"""

from __future__ import annotations

import logging

from .config import Config
from .gateways import (
    CompletionGateway,
    GatewayError,
    GatewayResult,
    ProviderRequest,
    TranslationGateway,
)
from .model import ContextEntry, Persona, SessionState, Speaker

log = logging.getLogger(__name__)

USER_TO_PROVIDER = "user_to_provider"
PROVIDER_TO_USER = "provider_to_user"


class ProviderUnavailable(Exception):
    """All attempts failed or the provider returned nothing usable."""


def count_tokens(text: str) -> int:
    """Conservative whitespace token count used for the context budget."""
    return len(text.split())


def bridge(text: str, direction: str, gateway: TranslationGateway, cfg: Config) -> str:
    """Translate between user and provider languages; identity when disabled.

    A failing translation endpoint degrades to the untranslated text; the
    conversation must not stall on the bridge.
    """
    if direction == USER_TO_PROVIDER:
        source, target = cfg.user_language, cfg.provider_language
    elif direction == PROVIDER_TO_USER:
        source, target = cfg.provider_language, cfg.user_language
    else:
        raise ValueError(f"unknown bridge direction {direction!r}")
    if not cfg.bridge_enabled:
        return text
    try:
        return gateway.translate(text, source, target)
    except GatewayError as exc:
        log.warning("translation failed (%s); passing text through", exc)
        return text


def _render_entry(entry: ContextEntry, bot_name: str, alias: str) -> str | None:
    if entry.is_boundary:
        return None
    text = entry.text_provider_language
    if text is None:
        text = entry.text_user_language
    if entry.is_control:
        return text
    speaker_name = alias if entry.speaker is Speaker.USER else bot_name
    return f"{speaker_name}: {text}"


def build_prompt(state: SessionState, cfg: Config) -> ProviderRequest:
    """Assemble the full provider request for the session's active topic."""
    if state.persona is None or state.alias is None or state.active_topic is None:
        raise ValueError("open dialogue needs persona, alias and active topic")
    persona: Persona = state.persona
    bot = persona.value
    alias = state.alias
    topic = cfg.topic(state.active_topic)

    preamble = cfg.preamble_template.format(bot=bot, alias=alias)
    topic_prompt = topic.open_prompt.format(bot=bot, alias=alias)
    cue = f"{bot}:"

    lines = [
        rendered
        for entry in state.topic_context()
        if (rendered := _render_entry(entry, bot, alias)) is not None
    ]

    head_tokens = count_tokens(preamble) + count_tokens(topic_prompt) + count_tokens(cue)
    budget = cfg.context_token_budget
    # drop oldest context lines two at a time until the prompt fits;
    # the newest line stays even when the budget cannot be met
    while len(lines) > 1 and head_tokens + sum(count_tokens(l) for l in lines) > budget:
        del lines[: 2 if len(lines) > 2 else 1]

    prompt = "\n".join([preamble, topic_prompt, *lines, cue])
    stops = [f"{alias}:", *cfg.raw["provider"].get("extra_stop_sequences", [])]
    return ProviderRequest(
        prompt=prompt,
        max_tokens=cfg.max_tokens,
        temperature=cfg.temperature,
        stop_sequences=tuple(stops),
    )


def _strip_cues(text: str, bot_name: str, alias: str) -> str:
    """Drop leaked speaker cues: a leading bot cue and anything after an
    alias cue the stop sequences should have caught."""
    cleaned = text.strip()
    bot_cue = f"{bot_name}:"
    if cleaned.startswith(bot_cue):
        cleaned = cleaned[len(bot_cue):].lstrip()
    alias_cue = f"{alias}:"
    cut = cleaned.find(alias_cue)
    if cut != -1:
        cleaned = cleaned[:cut]
    return cleaned.strip()


def generate_reply(
    request: ProviderRequest,
    gateway: CompletionGateway,
    cfg: Config,
    *,
    bot_name: str,
    alias: str,
    sleep=None,
) -> GatewayResult:
    """Call the provider with retries and backoff; raise when out of options.

    The caller turns ProviderUnavailable into a controlled follow-up, so a
    user never sees an error message.
    """
    attempts = cfg.provider_retries + 1
    backoffs = cfg.backoff_seconds
    last_error: Exception | None = None
    for attempt in range(attempts):
        try:
            result = gateway.complete(request)
        except GatewayError as exc:
            last_error = exc
            log.warning("provider attempt %d/%d failed: %s", attempt + 1, attempts, exc)
            if attempt < attempts - 1 and sleep is not None:
                delay = backoffs[min(attempt, len(backoffs) - 1)] if backoffs else 0.0
                sleep(delay)
            continue
        text = _strip_cues(result.text, bot_name, alias)
        if not text:
            raise ProviderUnavailable("provider returned an empty reply")
        return GatewayResult(text=text, latency_ms=result.latency_ms, truncated=result.truncated)
    raise ProviderUnavailable(f"provider failed after {attempts} attempts: {last_error}")
