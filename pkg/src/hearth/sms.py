"""SMS notification path: rendering, modem emulation, lossy-link delivery.

Alerts are rendered to 160-character messages and queued with a dedupe key so
one alert episode produces one notification. The queue pumps messages through
a Bernoulli-loss link model with geometric retry backoff; the default sink is
a text-mode AT-command modem emulator that logs the full handshake transcript
the way a serial console would show it.
"""

from __future__ import annotations

import json
import random
import re
import urllib.request
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

from .alerts import Alert, AlertState
from .errors import InvalidDestination, InvalidInput

SMS_MAX_LEN = 160
CTRL_Z = "<CTRL+Z>"

_E164 = re.compile(r"^\+[1-9]\d{1,14}$")


class SmsState(str, Enum):
    QUEUED = "QUEUED"
    SENDING = "SENDING"
    DELIVERED = "DELIVERED"
    FAILED = "FAILED"


@dataclass
class SmsMessage:
    dedupe_key: str
    destination: str
    body: str
    attempts: int = 0
    state: SmsState = SmsState.QUEUED
    first_attempt_ms: int | None = None
    next_attempt_ms: int = 0

    def __post_init__(self):
        if len(self.body) > SMS_MAX_LEN:
            raise InvalidInput(f"body exceeds {SMS_MAX_LEN} chars")
        if not _E164.match(self.destination):
            raise InvalidDestination(f"not an E.164 number: {self.destination!r}")


def render_sms(alert: Alert, home_name: str, destination: str) -> SmsMessage:
    """Render an ACTIVE alert to a message; the dedupe key is stable per alert."""
    if alert.state is not AlertState.ACTIVE:
        raise InvalidInput(f"alert {alert.id} is {alert.state.value}, not ACTIVE")
    if not _E164.match(destination):
        raise InvalidDestination(f"not an E.164 number: {destination!r}")
    detail = home_name
    if alert.evidence:
        last = alert.evidence[-1]
        detail = f"{home_name} reading {last.value:g} {last.unit}".rstrip()
    body = f"ALERT {alert.kind.value} {alert.device} at {alert.raised_at}ms: {detail}"
    return SmsMessage(
        dedupe_key=f"{alert.id}:{alert.kind.value}",
        destination=destination,
        body=body[:SMS_MAX_LEN],
    )


# --------------------------------------------------------------------------
# AT command codec and modem emulator


def encode_at_transcript(msg: SmsMessage) -> list[str]:
    """Host-side lines of a text-mode send, in wire order."""
    return [
        "AT",
        "AT+CMGF=1",
        f'AT+CMGS="{msg.destination}"',
        msg.body,
        CTRL_Z,
    ]


def parse_at_transcript(lines: list[str]) -> tuple[str, str]:
    """Recover (destination, body) from host lines; the emulator's parser."""
    if len(lines) != 5:
        raise InvalidInput(f"expected 5 transcript lines, got {len(lines)}")
    if lines[0] != "AT" or lines[1] != "AT+CMGF=1" or lines[4] != CTRL_Z:
        raise InvalidInput("malformed AT handshake")
    m = re.match(r'^AT\+CMGS="(.+)"$', lines[2])
    if not m:
        raise InvalidInput(f"malformed CMGS line: {lines[2]!r}")
    return m.group(1), lines[3]


class ModemEmulator:
    """Text-mode cellular modem that answers the CMGF/CMGS handshake.

    Keeps the transcript (">> " host to modem, "<< " modem to host) in memory
    and optionally appends it to a log file.
    """

    def __init__(self, log_path: str | Path | None = None):
        self.transcript: list[str] = []
        self.sent: list[tuple[str, str]] = []
        self._counter = 0
        self._log_path = Path(log_path) if log_path else None

    def _emit(self, lines: list[str]) -> None:
        self.transcript.extend(lines)
        if self._log_path:
            with open(self._log_path, "a", encoding="utf-8") as f:
                f.writelines(line + "\n" for line in lines)

    def deliver(self, msg: SmsMessage, attempt: int) -> None:
        destination, body = parse_at_transcript(encode_at_transcript(msg))
        self._counter += 1
        self.sent.append((destination, body))
        self._emit(
            [
                ">> AT",
                "<< OK",
                ">> AT+CMGF=1",
                "<< OK",
                f'>> AT+CMGS="{destination}"',
                "<< >",
                f">> {body}",
                f">> {CTRL_Z}",
                f"<< +CMGS: {self._counter}",
                "<< OK",
            ]
        )

    def reject(self, msg: SmsMessage, attempt: int) -> None:
        self._emit(
            [
                ">> AT",
                "<< OK",
                ">> AT+CMGF=1",
                "<< OK",
                f'>> AT+CMGS="{msg.destination}"',
                "<< >",
                f">> {msg.body}",
                f">> {CTRL_Z}",
                "<< ERROR",
            ]
        )


class FileSink:
    """Writes one JSON line per delivered message; no modem involved."""

    def __init__(self, path: str | Path):
        self.path = Path(path)

    def deliver(self, msg: SmsMessage, attempt: int) -> None:
        record = {
            "dedupe_key": msg.dedupe_key,
            "destination": msg.destination,
            "body": msg.body,
            "attempt": attempt,
        }
        with open(self.path, "a", encoding="utf-8") as f:
            f.write(json.dumps(record, separators=(",", ":")) + "\n")


class WebhookSink:
    """POSTs each delivered message as JSON to a configured URL."""

    def __init__(self, url: str, timeout: float = 5.0):
        self.url = url
        self.timeout = timeout

    def deliver(self, msg: SmsMessage, attempt: int) -> None:
        payload = json.dumps(
            {
                "dedupe_key": msg.dedupe_key,
                "destination": msg.destination,
                "body": msg.body,
                "attempt": attempt,
            }
        ).encode("utf-8")
        req = urllib.request.Request(
            self.url, data=payload, headers={"Content-Type": "application/json"}
        )
        urllib.request.urlopen(req, timeout=self.timeout).close()


# --------------------------------------------------------------------------
# Link model, retry policy, queue


@dataclass
class LinkModel:
    """Bernoulli-loss cellular uplink with fixed latency, seeded for replay."""

    loss_probability: float = 0.0
    latency_ms: int = 0
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.loss_probability <= 1.0:
            raise InvalidInput(
                f"loss_probability must be in [0, 1], got {self.loss_probability}"
            )
        if self.latency_ms < 0:
            raise InvalidInput(f"latency_ms must be >= 0, got {self.latency_ms}")
        self._rng = random.Random(self.seed)

    def transmit(self) -> bool:
        if self.loss_probability == 0.0:
            return True
        return self._rng.random() >= self.loss_probability


@dataclass(frozen=True)
class RetryPolicy:
    max_retries: int = 5
    base_ms: int = 1000
    multiplier: float = 2.0

    def __post_init__(self):
        if self.max_retries < 0:
            raise InvalidInput(f"max_retries must be >= 0, got {self.max_retries}")
        if self.base_ms <= 0:
            raise InvalidInput(f"base_ms must be > 0, got {self.base_ms}")
        if self.multiplier < 1.0:
            raise InvalidInput(f"multiplier must be >= 1, got {self.multiplier}")

    def backoff_offset_ms(self, failed_attempts: int) -> int:
        """Offset of the next attempt from the first one, geometric in attempts."""
        return int(self.base_ms * self.multiplier ** (failed_attempts - 1))


class SmsQueue:
    """FIFO of messages with per-episode dedupe and at-least-once pumping."""

    def __init__(self):
        self.messages: list[SmsMessage] = []

    def submit(self, msg: SmsMessage) -> bool:
        """Enqueue unless an undelivered message already carries the dedupe key."""
        for existing in self.messages:
            if (
                existing.dedupe_key == msg.dedupe_key
                and existing.state in (SmsState.QUEUED, SmsState.SENDING)
            ):
                return False
        self.messages.append(msg)
        return True

    def pump(self, link: LinkModel, policy: RetryPolicy, now_ms: int, sink=None) -> list[dict]:
        """Attempt every due message once; reschedule or fail the losers."""
        events = []
        for msg in self.messages:
            if msg.state is not SmsState.QUEUED or msg.next_attempt_ms > now_ms:
                continue
            msg.state = SmsState.SENDING
            msg.attempts += 1
            if msg.first_attempt_ms is None:
                msg.first_attempt_ms = now_ms
            events.append(
                {
                    "event": "attempt",
                    "dedupe_key": msg.dedupe_key,
                    "attempt": msg.attempts,
                    "t_ms": now_ms,
                }
            )
            if link.transmit():
                if sink is not None:
                    sink.deliver(msg, msg.attempts)
                msg.state = SmsState.DELIVERED
                events.append(
                    {
                        "event": "delivered",
                        "dedupe_key": msg.dedupe_key,
                        "attempt": msg.attempts,
                        "t_ms": now_ms + link.latency_ms,
                    }
                )
            else:
                if sink is not None and hasattr(sink, "reject"):
                    sink.reject(msg, msg.attempts)
                if msg.attempts >= policy.max_retries + 1:
                    msg.state = SmsState.FAILED
                    events.append(
                        {
                            "event": "failed",
                            "dedupe_key": msg.dedupe_key,
                            "attempt": msg.attempts,
                            "t_ms": now_ms,
                        }
                    )
                else:
                    msg.state = SmsState.QUEUED
                    msg.next_attempt_ms = msg.first_attempt_ms + policy.backoff_offset_ms(
                        msg.attempts
                    )
        return events

    @property
    def pending(self) -> int:
        return sum(1 for m in self.messages if m.state is SmsState.QUEUED)
