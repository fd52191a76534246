"""Gateway configuration: one JSON document, one source of truth.

Holds the device registry, rule thresholds, curve parameters, link model,
retry policy, API binding and data directory. Everything has a default so a
config file only needs to override what differs from the demo home.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .alerts import AlertKind, HomeMode, RuleConfig, default_rules
from .errors import InvalidInput, SchemaError
from .home import (
    DeviceKind,
    GasDevice,
    LeakDevice,
    LightDevice,
    PirDevice,
    TempDevice,
)
from .sensors import AdcConfig, Gas, GasCurve, LeakConfig, LPG_CURVE, Mq2Config, SMOKE_CURVE
from .sms import LinkModel, RetryPolicy

DEFAULT_DEVICES = (
    {"id": "temp1", "kind": "TEMP", "channel": "A1"},
    {"id": "gas1", "kind": "GAS", "channel": "A2", "r_adjust": 5.3},
    {"id": "pir1", "kind": "PIR", "channel": "D2"},
    {"id": "leak1", "kind": "LEAK", "channel": "A3"},
    {"id": "light1", "kind": "LIGHT", "channel": "A0"},
)


@dataclass(frozen=True)
class GatewayConfig:
    home_name: str = "hearth-home"
    seed: int = 0
    tick_ms: int = 100
    mode: HomeMode = HomeMode.HOME
    destination: str = "+97455500001"
    data_dir: str = "data"
    adc: AdcConfig = field(default_factory=AdcConfig)
    device_specs: tuple = DEFAULT_DEVICES
    rules: dict = field(default_factory=default_rules)
    link: dict = field(default_factory=lambda: {"loss_probability": 0.0, "latency_ms": 0, "seed": 0})
    retry: RetryPolicy = field(default_factory=RetryPolicy)
    api_host: str = "127.0.0.1"
    api_port: int = 8732
    api_token: str = "hearth-dev-token"
    notifier: str = "modem"
    webhook_url: str | None = None
    ui_dir: str | None = None

    def build_devices(self) -> list:
        """Construct fresh device instances (latent state starts at baseline)."""
        return [_build_device(spec, self.adc) for spec in self.device_specs]

    def build_link(self) -> LinkModel:
        return LinkModel(**self.link)

    def channels(self) -> dict[str, AlertKind]:
        """Map each device id to the alert rule its readings feed."""
        out = {}
        for spec in self.device_specs:
            kind = DeviceKind(spec["kind"])
            if kind is DeviceKind.TEMP:
                out[spec["id"]] = AlertKind.TEMP_HIGH
            elif kind is DeviceKind.GAS:
                gas = Gas(spec.get("gas", "LPG"))
                out[spec["id"]] = (
                    AlertKind.GAS_HIGH if gas is Gas.LPG else AlertKind.SMOKE_HIGH
                )
            elif kind is DeviceKind.PIR:
                out[spec["id"]] = AlertKind.INTRUSION
            elif kind is DeviceKind.LEAK:
                out[spec["id"]] = AlertKind.WATER_LEAK
            elif kind is DeviceKind.LIGHT:
                out[spec["id"]] = AlertKind.LIGHTS_LEFT_ON
        return out


def _build_device(spec: dict, adc: AdcConfig):
    kind = DeviceKind(spec["kind"])
    dev_id = spec["id"]
    sigma = float(spec.get("noise_sigma", 0.0))
    if kind is DeviceKind.TEMP:
        return TempDevice(
            dev_id,
            channel=spec.get("channel", "A1"),
            ambient_c=float(spec.get("ambient_c", 22.0)),
            noise_sigma=sigma,
        )
    if kind is DeviceKind.GAS:
        gas = Gas(spec.get("gas", "LPG"))
        default_curve = LPG_CURVE if gas is Gas.LPG else SMOKE_CURVE
        curve = GasCurve(
            gas,
            a=float(spec.get("curve_a", default_curve.a)),
            b=float(spec.get("curve_b", default_curve.b)),
        )
        cfg = Mq2Config(
            r_adjust=float(spec.get("r_adjust", 5.3)),
            vcc=float(spec.get("vcc", 5.0)),
            clean_air_ratio=float(spec.get("clean_air_ratio", 9.83)),
        )
        r0 = float(spec.get("r0", 10.0))
        return GasDevice(
            dev_id,
            channel=spec.get("channel", "A2"),
            cfg=cfg,
            curve=curve,
            r0_true=float(spec.get("r0_true", r0)),
            r0=r0,
            noise_sigma=sigma,
        )
    if kind is DeviceKind.PIR:
        return PirDevice(dev_id, channel=spec.get("channel", "D2"))
    if kind is DeviceKind.LEAK:
        return LeakDevice(
            dev_id,
            channel=spec.get("channel", "A3"),
            cfg=LeakConfig(
                gain=float(spec.get("gain", 1000.0)),
                window=int(spec.get("window", 50)),
                threshold=float(spec.get("threshold", 0.5)),
            ),
            noise_sigma=sigma,
        )
    if kind is DeviceKind.LIGHT:
        return LightDevice(
            dev_id,
            channel=spec.get("channel", "A0"),
            switch_on=bool(spec.get("switch_on", False)),
            noise_sigma=sigma,
        )
    raise SchemaError(f"unsupported device kind {spec['kind']!r}")


def _parse_rules(doc: dict) -> dict[AlertKind, RuleConfig]:
    rules = default_rules()
    for name, override in doc.items():
        try:
            kind = AlertKind(name)
        except ValueError as exc:
            raise SchemaError(f"unknown rule kind {name!r}") from exc
        if not isinstance(override, dict):
            raise SchemaError(f"rule {name}: expected an object")
        base = rules[kind]
        try:
            rules[kind] = RuleConfig(
                kind,
                raise_level=override.get("raise_level", base.raise_level),
                clear_level=override.get("clear_level", base.clear_level),
                k=int(override.get("k", base.k)),
            )
        except InvalidInput as exc:
            raise SchemaError(f"rule {name}: {exc}") from exc
    return rules


def from_dict(doc: dict) -> GatewayConfig:
    """Validate a parsed config document; raises SchemaError with the bad path."""
    if not isinstance(doc, dict):
        raise SchemaError("config must be a JSON object")
    known = {
        "home_name", "seed", "tick_ms", "mode", "destination", "data_dir",
        "adc", "devices", "rules", "link", "retry", "api", "notifier",
        "webhook_url", "ui_dir",
    }
    unknown = set(doc) - known
    if unknown:
        raise SchemaError(f"unknown config keys: {sorted(unknown)}")
    try:
        adc_doc = doc.get("adc", {})
        adc = AdcConfig(
            vref=float(adc_doc.get("vref", 5.0)),
            resolution_bits=int(adc_doc.get("resolution_bits", 10)),
        )
        device_specs = tuple(doc.get("devices", DEFAULT_DEVICES))
        ids = [spec["id"] for spec in device_specs]
        if len(ids) != len(set(ids)):
            raise SchemaError("duplicate device ids in config")
        for spec in device_specs:
            _build_device(spec, adc)  # validate eagerly
        retry_doc = doc.get("retry", {})
        api_doc = doc.get("api", {})
        link_doc = doc.get("link", {})
        notifier = doc.get("notifier", "modem")
        if notifier not in ("modem", "file", "webhook"):
            raise SchemaError(f"notifier must be modem|file|webhook, got {notifier!r}")
        if notifier == "webhook" and not doc.get("webhook_url"):
            raise SchemaError("webhook notifier needs webhook_url")
        return GatewayConfig(
            home_name=str(doc.get("home_name", "hearth-home")),
            seed=int(doc.get("seed", 0)),
            tick_ms=int(doc.get("tick_ms", 100)),
            mode=HomeMode(str(doc.get("mode", "HOME")).upper()),
            destination=str(doc.get("destination", "+97455500001")),
            data_dir=str(doc.get("data_dir", "data")),
            adc=adc,
            device_specs=device_specs,
            rules=_parse_rules(doc.get("rules", {})),
            link={
                "loss_probability": float(link_doc.get("loss_probability", 0.0)),
                "latency_ms": int(link_doc.get("latency_ms", 0)),
                "seed": int(link_doc.get("seed", 0)),
            },
            retry=RetryPolicy(
                max_retries=int(retry_doc.get("max_retries", 5)),
                base_ms=int(retry_doc.get("base_ms", 1000)),
                multiplier=float(retry_doc.get("multiplier", 2.0)),
            ),
            api_host=str(api_doc.get("host", "127.0.0.1")),
            api_port=int(api_doc.get("port", 8732)),
            api_token=str(api_doc.get("token", "hearth-dev-token")),
            notifier=notifier,
            webhook_url=doc.get("webhook_url"),
            ui_dir=doc.get("ui_dir"),
        )
    except SchemaError:
        raise
    except (InvalidInput, KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"bad config: {exc}") from exc


def load_config(path: str | Path) -> GatewayConfig:
    path = Path(path)
    try:
        with open(path, "r", encoding="utf-8") as f:
            doc = json.load(f)
    except OSError as exc:
        raise SchemaError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise SchemaError(f"config {path} is not valid JSON: {exc}") from exc
    return from_dict(doc)
