"""Deterministic virtual hardware: devices, a fixed-tick clock, stimuli.

Each device holds a latent physical state (ambient temperature, true gas
concentration, switch position, ...) that stimuli and actuator commands
mutate; sampling runs the latent state through the same forward models the
real circuits would (divider, op-amp, ADC quantization) so the conversion
math in `sensors` can be exercised end to end. Identical (scenario, seed,
ticks) always produces an identical trace.
"""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass, field
from enum import Enum

from .errors import InvalidInput, SchemaError, UnknownDevice, UnsupportedActuator
from .sensors import (
    DEFAULT_ADC,
    AdcConfig,
    GasCurve,
    LeakConfig,
    LightState,
    LPG_CURVE,
    Mq2Config,
    adc_encode,
    leak_rms,
    light_state,
    lm35_celsius,
    mq2_divider_volts,
    mq2_ppm,
    mq2_rs,
)

DEFAULT_TICK_MS = 100


class DeviceKind(str, Enum):
    TEMP = "TEMP"
    GAS = "GAS"
    PIR = "PIR"
    LEAK = "LEAK"
    LIGHT = "LIGHT"


# Scenario payload key accepted by each device kind.
STIMULUS_KEYS = {
    DeviceKind.TEMP: "ambient_c",
    DeviceKind.GAS: "lpg_ppm",
    DeviceKind.PIR: "motion",
    DeviceKind.LEAK: "vibration_uV",
    DeviceKind.LIGHT: "switch_on",
}


@dataclass(frozen=True)
class SensorReading:
    t_ms: int
    device: str
    raw: int
    value: float
    unit: str

    def to_dict(self) -> dict:
        return {
            "t_ms": self.t_ms,
            "device": self.device,
            "raw": self.raw,
            "value": self.value,
            "unit": self.unit,
        }


@dataclass(frozen=True)
class Stimulus:
    t_ms: int
    target: str
    key: str
    value: object


@dataclass(frozen=True)
class ActuatorCommand:
    device_id: str
    on: bool


@dataclass
class Trace:
    seed: int
    readings: list[SensorReading] = field(default_factory=list)
    actuator_events: list[dict] = field(default_factory=list)


# --------------------------------------------------------------------------
# Devices


@dataclass
class TempDevice:
    id: str
    channel: str = "A1"
    ambient_c: float = 22.0
    noise_sigma: float = 0.0
    kind = DeviceKind.TEMP

    def apply(self, value) -> None:
        self.ambient_c = float(value)

    def sample(self, t_ms: int, adc: AdcConfig, noise) -> SensorReading:
        volts = self.ambient_c / 10.0 + noise(self.noise_sigma)
        code = adc_encode(volts, adc)
        reading = lm35_celsius(code, adc)
        return SensorReading(t_ms, self.id, code, float(reading.celsius), "C")


@dataclass
class GasDevice:
    id: str
    channel: str = "A2"
    cfg: Mq2Config = field(default_factory=Mq2Config)
    curve: GasCurve = LPG_CURVE
    r0_true: float = 10.0
    r0: float = 10.0  # reference used to interpret readings; updated by calibration
    ppm: float = 0.0  # latent true concentration; <= clean-air floor means clean air
    noise_sigma: float = 0.0
    kind = DeviceKind.GAS

    def apply(self, value) -> None:
        ppm = float(value)
        if ppm < 0:
            raise SchemaError(f"lpg_ppm must be >= 0, got {ppm}")
        self.ppm = ppm

    def latent_rs(self) -> float:
        """Invert the curve; the ratio is floored at its clean-air value."""
        clean = self.cfg.clean_air_ratio
        if self.ppm <= 0:
            ratio = clean
        else:
            ratio = min((self.ppm / self.curve.a) ** (1 / self.curve.b), clean)
        return self.r0_true * ratio

    def sample(self, t_ms: int, adc: AdcConfig, noise) -> SensorReading:
        volts = mq2_divider_volts(self.latent_rs(), self.cfg) + noise(self.noise_sigma)
        code = adc_encode(volts, adc)
        if code == 0:
            value = 0.0  # open circuit: below the detection floor
        else:
            value = mq2_ppm(mq2_rs(code, self.cfg, adc), self.r0, self.curve)
        return SensorReading(t_ms, self.id, code, value, "ppm")


@dataclass
class PirDevice:
    id: str
    channel: str = "D2"
    motion: bool = False
    kind = DeviceKind.PIR

    def apply(self, value) -> None:
        self.motion = bool(value)

    def sample(self, t_ms: int, adc: AdcConfig, noise) -> SensorReading:
        raw = 1 if self.motion else 0
        return SensorReading(t_ms, self.id, raw, float(raw), "motion")


@dataclass
class LeakDevice:
    id: str
    channel: str = "A3"
    cfg: LeakConfig = field(default_factory=LeakConfig)
    vibration_v: float = 0.0
    noise_sigma: float = 0.0
    kind = DeviceKind.LEAK

    def __post_init__(self):
        self._window: deque[float] = deque(
            [0.0] * self.cfg.window, maxlen=self.cfg.window
        )

    def apply(self, value) -> None:
        uv = float(value)
        if uv < 0:
            raise SchemaError(f"vibration_uV must be >= 0, got {uv}")
        self.vibration_v = uv * 1e-6

    def sample(self, t_ms: int, adc: AdcConfig, noise) -> SensorReading:
        self._window.append(self.vibration_v + noise(self.noise_sigma))
        amplified = leak_rms(list(self._window), self.cfg, adc)
        code = adc_encode(amplified, adc)
        value = code / adc.steps * adc.vref
        return SensorReading(t_ms, self.id, code, value, "Vrms")


@dataclass
class LightDevice:
    id: str
    channel: str = "A0"
    switch_on: bool = False
    noise_sigma: float = 0.0
    kind = DeviceKind.LIGHT

    def apply(self, value) -> None:
        self.set_switch(bool(value))

    def set_switch(self, on: bool) -> bool:
        changed = self.switch_on != on
        self.switch_on = on
        return changed

    def sample(self, t_ms: int, adc: AdcConfig, noise) -> SensorReading:
        volts = (adc.vref if self.switch_on else 0.0) + noise(self.noise_sigma)
        code = adc_encode(volts, adc)
        value = 1.0 if light_state(code, adc) is LightState.ON else 0.0
        return SensorReading(t_ms, self.id, code, value, "on")


Device = TempDevice | GasDevice | PirDevice | LeakDevice | LightDevice


# --------------------------------------------------------------------------
# Scenario loading


@dataclass
class Scenario:
    stimuli: list[Stimulus] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.stimuli)


def load_scenario(document, home: "VirtualHome") -> Scenario:
    """Validate a parsed JSON array of stimuli against the home's registry."""
    if not isinstance(document, list):
        raise SchemaError("scenario must be a JSON array of stimuli")
    stimuli = []
    for i, item in enumerate(document):
        if not isinstance(item, dict):
            raise SchemaError(f"stimulus {i}: expected an object, got {type(item).__name__}")
        try:
            t_ms = int(item["t_ms"])
            target = item["target"]
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError(f"stimulus {i}: missing or bad t_ms/target ({exc})") from exc
        if t_ms < 0:
            raise SchemaError(f"stimulus {i}: t_ms must be >= 0, got {t_ms}")
        device = home.devices.get(target)
        if device is None:
            raise UnknownDevice(f"stimulus {i}: no device {target!r} registered")
        expected = STIMULUS_KEYS[device.kind]
        payload = {k: v for k, v in item.items() if k not in ("t_ms", "target")}
        if set(payload) != {expected}:
            raise SchemaError(
                f"stimulus {i}: {device.kind.value} device {target!r} takes "
                f"{expected!r}, got {sorted(payload) or 'nothing'}"
            )
        value = payload[expected]
        if expected in ("motion", "switch_on"):
            if not isinstance(value, bool):
                raise SchemaError(f"stimulus {i}: {expected} must be a boolean")
        elif not isinstance(value, (int, float)) or isinstance(value, bool):
            raise SchemaError(f"stimulus {i}: {expected} must be a number")
        stimuli.append(Stimulus(t_ms, target, expected, value))
    stimuli.sort(key=lambda s: s.t_ms)
    return Scenario(stimuli)


# --------------------------------------------------------------------------
# The home


class VirtualHome:
    """Single-writer state machine sampling every device once per tick."""

    def __init__(
        self,
        devices: list[Device],
        adc: AdcConfig = DEFAULT_ADC,
        tick_ms: int = DEFAULT_TICK_MS,
        seed: int = 0,
    ):
        self.devices: dict[str, Device] = {}
        for dev in devices:
            if dev.id in self.devices:
                raise SchemaError(f"duplicate device id {dev.id!r}")
            self.devices[dev.id] = dev
        self.adc = adc
        self.tick_ms = tick_ms
        self.seed = seed
        self.t_ms = 0
        self._rng = random.Random(seed)

    def device(self, device_id: str) -> Device:
        try:
            return self.devices[device_id]
        except KeyError:
            raise UnknownDevice(f"no device {device_id!r} registered") from None

    def _noise(self, sigma: float) -> float:
        return self._rng.gauss(0.0, sigma) if sigma > 0 else 0.0

    def apply_stimulus(self, stimulus: Stimulus) -> None:
        device = self.device(stimulus.target)
        if STIMULUS_KEYS[device.kind] != stimulus.key:
            raise SchemaError(
                f"{device.kind.value} device {stimulus.target!r} cannot take "
                f"{stimulus.key!r}"
            )
        device.apply(stimulus.value)

    def apply_command(self, cmd: ActuatorCommand) -> bool:
        """Set a light's switch; returns whether the state actually changed."""
        device = self.device(cmd.device_id)
        if device.kind is not DeviceKind.LIGHT:
            raise UnsupportedActuator(
                f"device {cmd.device_id!r} is {device.kind.value}, not a light"
            )
        return device.set_switch(cmd.on)

    def step(self, dt_ms: int | None = None) -> list[SensorReading]:
        """Sample every device at the current tick, then advance the clock."""
        if dt_ms is not None and dt_ms != self.tick_ms:
            raise InvalidInput(f"step must advance one tick ({self.tick_ms} ms), got {dt_ms}")
        t = self.t_ms
        readings = [dev.sample(t, self.adc, self._noise) for dev in self.devices.values()]
        self.t_ms = t + self.tick_ms
        return readings

    def run(self, scenario: Scenario, n_ticks: int) -> Trace:
        """Interleave stimuli with ticks; stimuli land before their tick samples."""
        if n_ticks < 0:
            raise InvalidInput(f"n_ticks must be >= 0, got {n_ticks}")
        trace = Trace(seed=self.seed)
        pending = list(scenario.stimuli)
        idx = 0
        for _ in range(n_ticks):
            while idx < len(pending) and pending[idx].t_ms <= self.t_ms:
                self.apply_stimulus(pending[idx])
                idx += 1
            trace.readings.extend(self.step())
        return trace
