"""The gateway tick loop: one logical writer over home, engine, queue, ledger.

Per tick, in fixed order: pending remote commands are applied, due scenario
stimuli land, every device is sampled, rules are evaluated and cleared, new
alerts are rendered to SMS and the queue is pumped, and everything is
appended to the ledger. Remote mutations arrive through a serialized command
channel and are answered only after the tick that applied them completes, so
every response reflects observable post-command state.

Headless simulation drives the same loop with a virtual wall clock (a fixed
epoch plus simulated time), which makes runs byte-reproducible.
"""

from __future__ import annotations

import queue as queue_mod
import threading
import time
from collections import deque
from datetime import datetime, timedelta, timezone
from pathlib import Path

from .alerts import AlertEngine, HomeMode
from .config import GatewayConfig
from .errors import HearthError, InvalidInput, NotCalibrated
from .home import ActuatorCommand, DeviceKind, Scenario, VirtualHome
from .sensors import mq2_calibrate
from .sms import (
    FileSink,
    ModemEmulator,
    SmsQueue,
    SmsState,
    WebhookSink,
    render_sms,
)
from .storage import CalibrationStore, Ledger, ReadingLog

# Ledger kinds pushed on the event stream, in ledger order.
STREAM_KINDS = frozenset({"reading", "alert", "mode", "light"})

SIM_EPOCH = datetime(2000, 1, 1, tzinfo=timezone.utc)


def sim_wall(t_ms: int) -> str:
    """Deterministic wall time for headless runs: fixed epoch + simulated ms."""
    return (SIM_EPOCH + timedelta(milliseconds=t_ms)).strftime("%Y-%m-%dT%H:%M:%S.%f")[:-3] + "Z"


def live_wall(t_ms: int) -> str:
    return datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%S.%f")[:-3] + "Z"


class Gateway:
    """Owns the home and all downstream state; mutated only by its tick loop."""

    def __init__(
        self,
        config: GatewayConfig,
        scenario: Scenario | None = None,
        data_dir: str | Path | None = None,
        wall_clock=sim_wall,
    ):
        self.config = config
        self.data_dir = Path(data_dir if data_dir is not None else config.data_dir)
        self.data_dir.mkdir(parents=True, exist_ok=True)
        self._wall = wall_clock

        self.home = VirtualHome(
            config.build_devices(),
            adc=config.adc,
            tick_ms=config.tick_ms,
            seed=config.seed,
        )
        self.engine = AlertEngine(config.rules, config.channels(), mode=config.mode)
        self.queue = SmsQueue()
        self.link = config.build_link()
        self.policy = config.retry
        self.sink = self._build_sink()

        self.ledger = Ledger(self.data_dir / "ledger.jsonl")
        self.readings_log = ReadingLog(self.data_dir / "readings.jsonl")
        self.calibrations = CalibrationStore(self.data_dir / "calibration.json")
        self._adopt_stored_calibrations()

        self._stimuli: list = []
        self._stim_idx = 0
        if scenario is not None:
            self.set_scenario(scenario)

        self._commands: queue_mod.Queue = queue_mod.Queue()
        self._subscribers: list[queue_mod.Queue] = []
        self._sub_lock = threading.Lock()
        self._state_lock = threading.Lock()
        self._latest: dict[str, dict] = {}
        self._recent: dict[str, deque] = {
            dev_id: deque(maxlen=1000) for dev_id in self.home.devices
        }
        self._snapshot: dict | None = None  # rebuilt at the end of every tick
        self._pushed_seq = self.ledger.last_seq

        self._thread: threading.Thread | None = None
        self._stop = threading.Event()

    def _build_sink(self):
        if self.config.notifier == "file":
            return FileSink(self.data_dir / "sms.jsonl")
        if self.config.notifier == "webhook":
            return WebhookSink(self.config.webhook_url)
        return ModemEmulator(self.data_dir / "modem.log")

    def _adopt_stored_calibrations(self) -> None:
        for dev in self.home.devices.values():
            if dev.kind is DeviceKind.GAS:
                try:
                    dev.r0 = self.calibrations.load(dev.id).r0
                except NotCalibrated:
                    pass

    def set_scenario(self, scenario: Scenario) -> None:
        """Install stimuli to drive future ticks; must precede the first tick."""
        if self.home.t_ms > 0:
            raise InvalidInput("scenario must be set before the first tick")
        self._stimuli = list(scenario.stimuli)
        self._stim_idx = 0

    # -- tick loop ---------------------------------------------------------

    def _append(self, kind: str, payload: dict, t_ms: int) -> None:
        self.ledger.append(kind, payload, t_ms, self._wall(t_ms))

    def tick(self) -> None:
        t = self.home.t_ms

        # remote commands first, so this tick's samples already see them
        replies = []
        while True:
            try:
                cmd, box = self._commands.get_nowait()
            except queue_mod.Empty:
                break
            try:
                result_fn = self._apply_command(cmd, t)
                replies.append((box, None, result_fn))
            except HearthError as exc:
                replies.append((box, exc, None))

        while self._stim_idx < len(self._stimuli) and self._stimuli[self._stim_idx].t_ms <= t:
            self.home.apply_stimulus(self._stimuli[self._stim_idx])
            self._stim_idx += 1

        readings = self.home.step()
        with self._state_lock:
            for r in readings:
                d = r.to_dict()
                self._latest[r.device] = d
                self._recent[r.device].appendleft(d)
        for r in readings:
            d = r.to_dict()
            self.readings_log.write(d)
            self._append("reading", d, t)
        self.readings_log.flush()

        for alert in self.engine.evaluate(readings):
            self._append("alert", {"event": "raised", "alert": alert.to_dict()}, t)
            msg = render_sms(alert, self.config.home_name, self.config.destination)
            if self.queue.submit(msg):
                self._append(
                    "sms",
                    {"event": "queued", "dedupe_key": msg.dedupe_key, "body": msg.body},
                    t,
                )
        for alert in self.engine.clear_check(readings):
            self._append("alert", {"event": "cleared", "alert": alert.to_dict()}, t)

        for ev in self.queue.pump(self.link, self.policy, now_ms=t, sink=self.sink):
            self._append("sms", ev, t)

        self._refresh_snapshot(t)
        for box, exc, result_fn in replies:
            box.put((exc, result_fn() if result_fn else None))

        self._publish()

    def _refresh_snapshot(self, t: int) -> None:
        """Freeze one coherent view of the tick that just completed."""
        with self._state_lock:
            self._snapshot = {
                "t_ms": t,
                "wall": self._wall(t),
                "mode": self.engine.mode.value,
                "devices": {dev: dict(r) for dev, r in self._latest.items()},
                "lights": {
                    dev_id: ("ON" if self._latest.get(dev_id, {}).get("value", 0.0) >= 1.0 else "OFF")
                    for dev_id, dev in self.home.devices.items()
                    if dev.kind is DeviceKind.LIGHT
                },
                "active_alerts": self.engine.active_count,
            }

    def _apply_command(self, cmd: tuple, t: int):
        op = cmd[0]
        if op == "light":
            _, device_id, on = cmd
            changed = self.home.apply_command(ActuatorCommand(device_id, on))
            if changed:
                self._append("light", {"device": device_id, "on": on}, t)
            return lambda: {
                "device": device_id,
                "state": "ON" if self.latest_reading(device_id)["value"] >= 1.0 else "OFF",
            }
        if op == "mode":
            _, mode_str = cmd
            try:
                mode = HomeMode(mode_str.upper())
            except (ValueError, AttributeError):
                raise InvalidInput(f"mode must be HOME or AWAY, got {mode_str!r}")
            if self.engine.set_mode(mode):
                self._append("mode", {"mode": mode.value}, t)
            return lambda: {"mode": self.engine.mode.value}
        if op == "ack":
            _, alert_id = cmd
            alert, changed = self.engine.acknowledge(alert_id)
            if changed:
                self._append("alert", {"event": "acked", "alert": alert.to_dict()}, t)
            return lambda: {"alert": alert.to_dict()}
        raise InvalidInput(f"unknown command {op!r}")

    def _publish(self) -> None:
        entries = [
            e for e in self.ledger.since(self._pushed_seq) if e.kind in STREAM_KINDS
        ]
        if entries:
            self._pushed_seq = entries[-1].seq
        with self._sub_lock:
            subscribers = list(self._subscribers)
        for entry in entries:
            for sub in subscribers:
                sub.put(entry)

    # -- headless ------------------------------------------------------------

    def simulate(self, ticks: int) -> dict:
        """Run the loop without wall-clock pacing; returns a run summary."""
        if ticks < 0:
            raise InvalidInput(f"ticks must be >= 0, got {ticks}")
        for _ in range(ticks):
            self.tick()
        self.close()
        by_kind: dict[str, int] = {}
        for alert in self.engine.alerts:
            by_kind[alert.kind.value] = by_kind.get(alert.kind.value, 0) + 1
        return {
            "ticks": ticks,
            "t_ms": self.home.t_ms,
            "alerts": by_kind,
            "sms_delivered": sum(
                1 for m in self.queue.messages if m.state is SmsState.DELIVERED
            ),
            "sms_failed": sum(1 for m in self.queue.messages if m.state is SmsState.FAILED),
            "ledger": str(self.ledger.path),
            "readings": str(self.readings_log.path),
        }

    # -- remote-control surface (thread-safe) --------------------------------

    def submit_command(self, *cmd, timeout: float = 10.0) -> dict:
        """Enqueue a mutation for the next tick and wait for its result."""
        box: queue_mod.Queue = queue_mod.Queue(maxsize=1)
        self._commands.put((cmd, box))
        if self._thread is None:  # headless: apply on a synchronous tick
            self.tick()
        try:
            exc, result = box.get(timeout=timeout)
        except queue_mod.Empty:
            raise TimeoutError("gateway did not answer the command in time") from None
        if exc is not None:
            raise exc
        return result

    def latest_reading(self, device_id: str) -> dict | None:
        with self._state_lock:
            return self._latest.get(device_id)

    def readings_for(self, device_id: str, limit: int) -> list[dict]:
        with self._state_lock:
            recent = self._recent.get(device_id)
            if recent is None:
                return []
            return list(recent)[:limit]

    def has_device(self, device_id: str) -> bool:
        return device_id in self.home.devices

    def device_kind(self, device_id: str) -> DeviceKind:
        return self.home.device(device_id).kind

    def state_view(self) -> dict:
        """The most recent completed tick, as one coherent snapshot."""
        with self._state_lock:
            if self._snapshot is not None:
                snap = dict(self._snapshot)
                snap["devices"] = {d: dict(r) for d, r in snap["devices"].items()}
                snap["lights"] = dict(snap["lights"])
                return snap
        return {
            "t_ms": 0,
            "wall": self._wall(0),
            "mode": self.engine.mode.value,
            "devices": {},
            "lights": {
                dev_id: "OFF"
                for dev_id, dev in self.home.devices.items()
                if dev.kind is DeviceKind.LIGHT
            },
            "active_alerts": 0,
        }

    def alert_events_since(self, seq: int = 0) -> list[dict]:
        return [
            {"seq": e.seq, "t_ms": e.t_ms, "wall": e.wall, **e.payload}
            for e in self.ledger.since(seq, kinds=frozenset({"alert"}))
        ]

    def subscribe(self) -> queue_mod.Queue:
        sub: queue_mod.Queue = queue_mod.Queue()
        with self._sub_lock:
            self._subscribers.append(sub)
        return sub

    def unsubscribe(self, sub: queue_mod.Queue) -> None:
        with self._sub_lock:
            if sub in self._subscribers:
                self._subscribers.remove(sub)

    def stream_entries_since(self, seq: int) -> list:
        return self.ledger.since(seq, kinds=STREAM_KINDS)

    # -- paced loop ------------------------------------------------------------

    def start(self, speed: float = 1.0, max_ticks: int | None = None) -> None:
        """Run the tick loop on a background thread at tick_ms / speed pacing."""
        if speed <= 0:
            raise InvalidInput(f"speed must be > 0, got {speed}")
        if self._thread is not None:
            raise InvalidInput("gateway already running")
        period = self.config.tick_ms / 1000.0 / speed
        self._stop.clear()

        def loop():
            ticks = 0
            while not self._stop.is_set():
                started = time.monotonic()
                self.tick()
                ticks += 1
                if max_ticks is not None and ticks >= max_ticks:
                    break
                elapsed = time.monotonic() - started
                if (pause := period - elapsed) > 0:
                    self._stop.wait(pause)

        self._thread = threading.Thread(target=loop, name="hearth-tick-loop", daemon=True)
        self._thread.start()

    def stop(self) -> None:
        if self._thread is not None:
            self._stop.set()
            self._thread.join(timeout=10)
            self._thread = None
        self.close()

    def close(self) -> None:
        self.ledger.close()
        self.readings_log.close()


def calibrate_device(
    config: GatewayConfig,
    device_id: str,
    samples: int,
    data_dir: str | Path | None = None,
):
    """Clean-air calibration against the simulator; persists the record."""
    home = VirtualHome(
        config.build_devices(), adc=config.adc, tick_ms=config.tick_ms, seed=config.seed
    )
    device = home.device(device_id)
    if device.kind is not DeviceKind.GAS:
        raise InvalidInput(f"device {device_id!r} is {device.kind.value}, not GAS")
    codes = []
    for _ in range(samples):
        tick = home.step()
        codes.append(next(r.raw for r in tick if r.device == device_id))
    record = mq2_calibrate(codes, device.cfg, config.adc, t_ms=home.t_ms)
    store = CalibrationStore(
        Path(data_dir if data_dir is not None else config.data_dir) / "calibration.json"
    )
    store.save(device_id, record)
    return record
