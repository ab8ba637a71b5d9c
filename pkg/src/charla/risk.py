"""Risk phrase scanning and alert dispatch.

Matching is case- and accent-insensitive on word boundaries, always against
the user's original text. Only alert-severity findings produce records; a
message yields at most one record no matter how many patterns it trips.
The shipped lexicon is a small starter set meant to be replaced by a
clinician-maintained list.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass

import requests

from .config import fold
from .model import AlertRecord, Severity

log = logging.getLogger(__name__)

EXCERPT_LIMIT = 200


@dataclass(frozen=True)
class Finding:
    pattern: str
    severity: Severity
    start: int


class RiskLexicon:
    def __init__(self, entries: list[dict]) -> None:
        if not entries:
            raise ValueError("risk lexicon must not be empty")
        self._compiled: list[tuple[re.Pattern, str, Severity]] = []
        for entry in entries:
            pattern = entry["pattern"].strip()
            if not pattern:
                raise ValueError("risk lexicon pattern must not be empty")
            folded = fold(pattern)
            words = [re.escape(w) for w in folded.split()]
            regex = re.compile(r"(?<!\w)" + r"\s+".join(words) + r"(?!\w)")
            self._compiled.append((regex, pattern, Severity(entry["severity"])))

    def scan(self, text: str) -> list[Finding]:
        """All findings in one text, alert severity first, then by position."""
        folded = fold(text)
        findings: list[Finding] = []
        for regex, pattern, severity in self._compiled:
            m = regex.search(folded)
            if m:
                findings.append(Finding(pattern=pattern, severity=severity, start=m.start()))
        findings.sort(key=lambda f: (f.severity is not Severity.ALERT, f.start))
        return findings


class WebhookSink:
    """POSTs alert payloads to an operator-configured URL."""

    def __init__(self, url: str, timeout: float = 10.0) -> None:
        self.url = url
        self.timeout = timeout

    def push(self, record: AlertRecord) -> bool:
        payload = {
            "alias": record.alias,
            "severity": Severity.ALERT.value,
            "excerpt": record.message_excerpt,
            "at": record.at,
        }
        try:
            resp = requests.post(self.url, json=payload, timeout=self.timeout)
            resp.raise_for_status()
            return True
        except requests.RequestException as exc:
            log.warning("alert webhook failed: %s", exc)
            return False


def dispatch(
    findings: list[Finding],
    identity: str,
    text: str,
    at: float,
    sink=None,
) -> AlertRecord | None:
    """Build at most one alert record per message; watch findings only log."""
    alerts = [f for f in findings if f.severity is Severity.ALERT]
    watches = [f for f in findings if f.severity is Severity.WATCH]
    for finding in watches:
        log.info("watch finding for %s: %s", identity, finding.pattern)
    if not alerts:
        return None
    top = alerts[0]
    record = AlertRecord(
        alias=identity,
        matched_pattern=top.pattern,
        message_excerpt=text[:EXCERPT_LIMIT],
        at=at,
        delivered=False,
    )
    if sink is not None:
        record.delivered = bool(sink.push(record))
    return record
