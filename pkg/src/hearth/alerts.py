"""Debounced, deduplicated alerting over reading streams.

A rule trips only after `k` consecutive triggering samples (debounce), raises
at most one ACTIVE alert per (kind, device) at a time, and analog rules clear
through a lower hysteresis level so a value hovering at the threshold cannot
flap. Intrusion and lights-left-on only arm while the home is in AWAY mode;
intrusion never clears on its own, someone has to acknowledge it.
"""

from __future__ import annotations

import logging
from collections import defaultdict
from dataclasses import dataclass
from enum import Enum

from .errors import InvalidInput, NotFound
from .home import SensorReading

log = logging.getLogger(__name__)

DEFAULT_DEBOUNCE = 3


class HomeMode(str, Enum):
    HOME = "HOME"
    AWAY = "AWAY"


class AlertKind(str, Enum):
    TEMP_HIGH = "TEMP_HIGH"
    GAS_HIGH = "GAS_HIGH"
    SMOKE_HIGH = "SMOKE_HIGH"
    INTRUSION = "INTRUSION"
    WATER_LEAK = "WATER_LEAK"
    LIGHTS_LEFT_ON = "LIGHTS_LEFT_ON"


class AlertState(str, Enum):
    ACTIVE = "ACTIVE"
    ACKED = "ACKED"
    CLEARED = "CLEARED"


# Rules that compare a level against raise/clear thresholds.
ANALOG_KINDS = frozenset(
    {AlertKind.TEMP_HIGH, AlertKind.GAS_HIGH, AlertKind.SMOKE_HIGH, AlertKind.WATER_LEAK}
)
# Rules armed only while nobody is home.
MODE_GATED_KINDS = frozenset({AlertKind.INTRUSION, AlertKind.LIGHTS_LEFT_ON})


@dataclass(frozen=True)
class RuleConfig:
    kind: AlertKind
    raise_level: float | None = None
    clear_level: float | None = None
    k: int = DEFAULT_DEBOUNCE

    def __post_init__(self):
        if self.k < 1:
            raise InvalidInput(f"debounce k must be >= 1, got {self.k}")
        if self.kind in ANALOG_KINDS:
            if self.raise_level is None or self.clear_level is None:
                raise InvalidInput(f"{self.kind.value} needs raise and clear levels")
            if not self.clear_level < self.raise_level:
                raise InvalidInput(
                    f"{self.kind.value} clear level {self.clear_level} must be "
                    f"strictly below raise level {self.raise_level}"
                )


def default_rules(k: int = DEFAULT_DEBOUNCE) -> dict[AlertKind, RuleConfig]:
    return {
        AlertKind.TEMP_HIGH: RuleConfig(AlertKind.TEMP_HIGH, 25.0, 23.0, k),
        AlertKind.GAS_HIGH: RuleConfig(AlertKind.GAS_HIGH, 1000.0, 800.0, k),
        AlertKind.SMOKE_HIGH: RuleConfig(AlertKind.SMOKE_HIGH, 300.0, 240.0, k),
        AlertKind.INTRUSION: RuleConfig(AlertKind.INTRUSION, k=k),
        AlertKind.WATER_LEAK: RuleConfig(AlertKind.WATER_LEAK, 0.5, 0.4, k),
        AlertKind.LIGHTS_LEFT_ON: RuleConfig(AlertKind.LIGHTS_LEFT_ON, k=k),
    }


@dataclass
class Alert:
    id: int
    kind: AlertKind
    device: str
    raised_at: int
    evidence: list[SensorReading]
    state: AlertState = AlertState.ACTIVE

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "kind": self.kind.value,
            "device": self.device,
            "raised_at": self.raised_at,
            "state": self.state.value,
            "evidence": [r.to_dict() for r in self.evidence],
        }


class AlertEngine:
    """Single-writer rule evaluator fed one tick's readings at a time."""

    def __init__(
        self,
        rules: dict[AlertKind, RuleConfig],
        channels: dict[str, AlertKind],
        mode: HomeMode = HomeMode.HOME,
    ):
        self.rules = rules
        self.channels = channels  # device id -> the rule kind its readings feed
        self.mode = mode
        self.alerts: list[Alert] = []
        self._by_id: dict[int, Alert] = {}
        self._next_id = 1
        self._evidence: dict[tuple[AlertKind, str], list[SensorReading]] = defaultdict(list)
        self._clear_runs: dict[tuple[AlertKind, str], int] = defaultdict(int)

    # -- trigger / clear predicates ------------------------------------

    def _triggers(self, kind: AlertKind, value: float) -> bool:
        rule = self.rules[kind]
        if kind in ANALOG_KINDS:
            return value > rule.raise_level
        if kind in MODE_GATED_KINDS:
            return self.mode is HomeMode.AWAY and value >= 1.0
        raise InvalidInput(f"no trigger predicate for {kind}")

    def _clears(self, kind: AlertKind, value: float) -> bool:
        if kind in ANALOG_KINDS:
            return value <= self.rules[kind].clear_level
        if kind is AlertKind.LIGHTS_LEFT_ON:
            return value < 1.0  # light actually off, whatever the mode
        return False  # INTRUSION only closes via acknowledge

    def _open_alerts(self, key: tuple[AlertKind, str]) -> list[Alert]:
        kind, device = key
        return [
            a
            for a in self.alerts
            if a.kind is kind and a.device == device and a.state is not AlertState.CLEARED
        ]

    def _has_active(self, key: tuple[AlertKind, str]) -> bool:
        return any(a.state is AlertState.ACTIVE for a in self._open_alerts(key))

    # -- operations ------------------------------------------------------

    def evaluate(self, readings: list[SensorReading]) -> list[Alert]:
        """Advance debounce counters for one tick; return newly raised alerts."""
        raised = []
        for reading in readings:
            kind = self.channels.get(reading.device)
            if kind is None:
                log.debug("ignoring reading from unregistered device %r", reading.device)
                continue
            key = (kind, reading.device)
            evidence = self._evidence[key]
            if self._has_active(key):
                evidence.clear()
                continue
            if self._triggers(kind, reading.value):
                evidence.append(reading)
                if len(evidence) >= self.rules[kind].k:
                    alert = Alert(
                        id=self._next_id,
                        kind=kind,
                        device=reading.device,
                        raised_at=reading.t_ms,
                        evidence=list(evidence),
                        state=AlertState.ACTIVE,
                    )
                    self._next_id += 1
                    self.alerts.append(alert)
                    self._by_id[alert.id] = alert
                    evidence.clear()
                    self._clear_runs[key] = 0
                    raised.append(alert)
            else:
                evidence.clear()
        return raised

    def clear_check(self, readings: list[SensorReading]) -> list[Alert]:
        """Hysteresis pass: clear open alerts held below their clear level k ticks."""
        cleared = []
        for reading in readings:
            kind = self.channels.get(reading.device)
            if kind is None:
                continue
            key = (kind, reading.device)
            open_alerts = self._open_alerts(key)
            if not open_alerts:
                self._clear_runs[key] = 0
                continue
            if self._clears(kind, reading.value):
                self._clear_runs[key] += 1
                if self._clear_runs[key] >= self.rules[kind].k:
                    for alert in open_alerts:
                        alert.state = AlertState.CLEARED
                        cleared.append(alert)
                    self._clear_runs[key] = 0
            else:
                self._clear_runs[key] = 0
        return cleared

    def set_mode(self, mode: HomeMode) -> bool:
        """Switch HOME/AWAY; restarts debounce for the mode-gated rules."""
        if mode is self.mode:
            return False
        self.mode = mode
        for key in list(self._evidence):
            if key[0] in MODE_GATED_KINDS:
                self._evidence[key].clear()
        for key in list(self._clear_runs):
            if key[0] in MODE_GATED_KINDS:
                self._clear_runs[key] = 0
        return True

    def acknowledge(self, alert_id: int) -> tuple[Alert, bool]:
        """ACTIVE -> ACKED; acking an ACKED or CLEARED alert is a no-op."""
        alert = self._by_id.get(alert_id)
        if alert is None:
            raise NotFound(f"no alert with id {alert_id}")
        if alert.state is AlertState.ACTIVE:
            alert.state = AlertState.ACKED
            return alert, True
        return alert, False

    @property
    def active_count(self) -> int:
        return sum(1 for a in self.alerts if a.state is AlertState.ACTIVE)
