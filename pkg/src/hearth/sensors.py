"""Pure conversion and detection math for the gateway's sensor suite.

Everything in this module is side-effect free: raw ADC codes or voltages in,
engineering values out. The virtual home and the alert engine both build on
these primitives, and the calibration pipeline lives here too.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from statistics import fmean, pstdev

from .errors import (
    CalibrationError,
    InvalidInput,
    NotCalibrated,
    SensorOpenCircuit,
)

# Temperature alarm trips strictly above this many whole degrees.
TEMP_ALARM_C = 25

# The temperature channel runs the sensor's 10 mV/°C output through a 10x
# gain stage ahead of the ADC, so one degree is 100 mV at the pin.
MV_PER_DEGREE = 100


@dataclass(frozen=True)
class AdcConfig:
    """Successive-approximation ADC front end (Arduino-UNO class defaults)."""

    vref: float = 5.0
    resolution_bits: int = 10

    def __post_init__(self):
        if not (isinstance(self.vref, (int, float)) and self.vref > 0):
            raise InvalidInput(f"vref must be > 0, got {self.vref!r}")
        if self.resolution_bits not in range(8, 17):
            raise InvalidInput(
                f"resolution_bits must be in [8, 16], got {self.resolution_bits!r}"
            )

    @property
    def steps(self) -> int:
        return 1 << self.resolution_bits

    @property
    def max_code(self) -> int:
        return self.steps - 1


DEFAULT_ADC = AdcConfig()


def adc_encode(volts: float, cfg: AdcConfig = DEFAULT_ADC) -> int:
    """Quantize a voltage: floor(v / vref * 2^bits), clamped to the code range."""
    if not math.isfinite(volts):
        raise InvalidInput(f"cannot encode non-finite voltage {volts!r}")
    code = math.floor(volts / cfg.vref * cfg.steps)
    return min(max(code, 0), cfg.max_code)


def _check_code(code: int, cfg: AdcConfig) -> None:
    if not isinstance(code, int) or not 0 <= code <= cfg.max_code:
        raise InvalidInput(f"ADC code {code!r} outside [0, {cfg.max_code}]")


# --------------------------------------------------------------------------
# LM35 temperature channel


@dataclass(frozen=True)
class TempReading:
    millivolts: int
    celsius: int
    alarm: bool


def lm35_celsius(code: int, cfg: AdcConfig = DEFAULT_ADC) -> TempReading:
    """Convert a temperature-channel ADC code to whole degrees.

    Integer arithmetic end to end (the sensor is only good to about half a
    degree, so fractions carry no information): the code becomes millivolts,
    millivolts become degrees at 100 mV/°C, and the alarm flag - the virtual
    pin-13 LED - trips strictly above 25 °C.
    """
    _check_code(code, cfg)
    mv_full_scale = round(cfg.vref * 1000)
    millivolts = code * mv_full_scale // cfg.steps
    celsius = millivolts // MV_PER_DEGREE
    return TempReading(millivolts, celsius, celsius > TEMP_ALARM_C)


# --------------------------------------------------------------------------
# MQ-2 gas channel


@dataclass(frozen=True)
class Mq2Config:
    """Divider hookup for the MQ-2 module.

    The board's trim pot (0-50 kΩ) sits in series with a fixed 4.7 kΩ
    protection resistor; together they form the load the sensor divides
    against.
    """

    r_adjust: float = 5.3
    r_protect: float = 4.7
    vcc: float = 5.0
    clean_air_ratio: float = 9.83

    def __post_init__(self):
        if not 0 <= self.r_adjust <= 50:
            raise InvalidInput(
                f"r_adjust must be in [0, 50] kΩ, got {self.r_adjust!r}"
            )
        if self.r_protect <= 0:
            raise InvalidInput(f"r_protect must be > 0, got {self.r_protect!r}")
        if self.vcc <= 0:
            raise InvalidInput(f"vcc must be > 0, got {self.vcc!r}")
        if self.clean_air_ratio <= 0:
            raise InvalidInput(
                f"clean_air_ratio must be > 0, got {self.clean_air_ratio!r}"
            )

    @property
    def r_load(self) -> float:
        return self.r_adjust + self.r_protect


class Gas(str, Enum):
    LPG = "LPG"
    SMOKE = "SMOKE"


@dataclass(frozen=True)
class GasCurve:
    """Power-law fit of the sensor's log-log response: ppm = a * (Rs/R0)^b."""

    gas: Gas
    a: float
    b: float

    def __post_init__(self):
        if self.a <= 0:
            raise InvalidInput(f"curve scale a must be > 0, got {self.a!r}")
        if self.b >= 0:
            raise InvalidInput(f"curve exponent b must be < 0, got {self.b!r}")


# Shipped as tunable defaults, not ground truth; override via config.
LPG_CURVE = GasCurve(Gas.LPG, a=574.25, b=-2.222)
SMOKE_CURVE = GasCurve(Gas.SMOKE, a=3616.1, b=-2.675)


@dataclass(frozen=True)
class CalibrationRecord:
    r0: float
    sample_count: int
    rs_mean: float
    rs_stddev: float
    r_load: float
    t_ms: int = 0

    def to_dict(self) -> dict:
        return {
            "r0": self.r0,
            "sample_count": self.sample_count,
            "rs_mean": self.rs_mean,
            "rs_stddev": self.rs_stddev,
            "r_load": self.r_load,
            "t_ms": self.t_ms,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CalibrationRecord":
        return cls(
            r0=float(d["r0"]),
            sample_count=int(d["sample_count"]),
            rs_mean=float(d["rs_mean"]),
            rs_stddev=float(d["rs_stddev"]),
            r_load=float(d["r_load"]),
            t_ms=int(d.get("t_ms", 0)),
        )


def mq2_divider_volts(rs: float, cfg: Mq2Config) -> float:
    """Forward model: divider output for a given sensor resistance."""
    if rs < 0:
        raise InvalidInput(f"sensor resistance must be >= 0, got {rs!r}")
    return cfg.vcc * cfg.r_load / (rs + cfg.r_load)


def mq2_rs(code: int, cfg: Mq2Config, adc: AdcConfig = DEFAULT_ADC) -> float:
    """Solve the divider for the sensor resistance, in kΩ."""
    _check_code(code, adc)
    if code == 0:
        raise SensorOpenCircuit("divider output at ground (code 0)")
    vout = code / adc.steps * adc.vref
    return max(cfg.r_load * (cfg.vcc - vout) / vout, 0.0)


def mq2_calibrate(
    samples: list[int],
    cfg: Mq2Config,
    adc: AdcConfig = DEFAULT_ADC,
    t_ms: int = 0,
) -> CalibrationRecord:
    """Derive R0 from clean-air samples: mean Rs divided by the clean-air ratio."""
    if not samples:
        raise CalibrationError("no samples taken")
    rs_values = [mq2_rs(code, cfg, adc) for code in samples]
    rs_mean = fmean(rs_values)
    return CalibrationRecord(
        r0=rs_mean / cfg.clean_air_ratio,
        sample_count=len(rs_values),
        rs_mean=rs_mean,
        rs_stddev=pstdev(rs_values),
        r_load=cfg.r_load,
        t_ms=t_ms,
    )


def mq2_ppm(rs: float, r0: float, curve: GasCurve) -> float:
    """Concentration from the Rs/R0 ratio via the curve's power law."""
    if r0 <= 0:
        raise NotCalibrated(f"reference resistance must be > 0, got {r0!r}")
    if rs <= 0:
        raise InvalidInput(f"sensor resistance must be > 0, got {rs!r}")
    return curve.a * (rs / r0) ** curve.b


# --------------------------------------------------------------------------
# PIR motion channel


class DigitalLevel(int, Enum):
    LOW = 0
    HIGH = 1


class MotionState(str, Enum):
    NONE = "NONE"
    MOTION = "MOTION"


def pir_state(level: DigitalLevel) -> MotionState:
    """The PIR behaves like a pushbutton: high means motion, low means none."""
    if not isinstance(level, DigitalLevel):
        raise InvalidInput(f"expected a DigitalLevel, got {level!r}")
    return MotionState.MOTION if level is DigitalLevel.HIGH else MotionState.NONE


# --------------------------------------------------------------------------
# Water-leak vibration channel


@dataclass(frozen=True)
class LeakConfig:
    """Op-amp gain plus the RMS window and threshold for leak detection."""

    gain: float = 1000.0
    window: int = 50
    threshold: float = 0.5

    def __post_init__(self):
        if self.gain < 1:
            raise InvalidInput(f"gain must be >= 1, got {self.gain!r}")
        if self.window < 1:
            raise InvalidInput(f"window must be >= 1, got {self.window!r}")
        if self.threshold <= 0:
            raise InvalidInput(f"threshold must be > 0, got {self.threshold!r}")


class LeakVerdict(str, Enum):
    QUIET = "QUIET"
    LEAK = "LEAK"


def leak_rms(
    raw_window: list[float], cfg: LeakConfig, adc: AdcConfig = DEFAULT_ADC
) -> float:
    """Amplified RMS of a raw-voltage window, saturated at the ADC reference."""
    if len(raw_window) != cfg.window:
        raise InvalidInput(
            f"window must hold {cfg.window} samples, got {len(raw_window)}"
        )
    rms = math.sqrt(fmean(v * v for v in raw_window))
    return min(cfg.gain * rms, adc.vref)


def leak_detect(
    raw_window: list[float], cfg: LeakConfig, adc: AdcConfig = DEFAULT_ADC
) -> LeakVerdict:
    """LEAK iff the amplified RMS is strictly above the threshold."""
    if leak_rms(raw_window, cfg, adc) > cfg.threshold:
        return LeakVerdict.LEAK
    return LeakVerdict.QUIET


# --------------------------------------------------------------------------
# Light-switch node channel


class LightState(str, Enum):
    OFF = "OFF"
    ON = "ON"


def light_state(code: int, cfg: AdcConfig = DEFAULT_ADC) -> LightState:
    """ON iff the switch node reads at or above mid-scale (512 on a 10-bit ADC)."""
    _check_code(code, cfg)
    return LightState.ON if code >= cfg.steps // 2 else LightState.OFF
