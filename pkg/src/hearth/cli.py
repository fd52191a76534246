"""Operator entry points: run the gateway, simulate, calibrate, replay.

Exit codes: 0 success, 1 validation problem (bad flags, bad config, bad
scenario), 2 runtime failure. `--config` falls back to the HEARTH_CONFIG
environment variable, then to the built-in demo home.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .api import ApiServer
from .config import GatewayConfig, load_config
from .errors import (
    CalibrationError,
    HearthError,
    InvalidDestination,
    InvalidInput,
    NotCalibrated,
    NotFound,
    SchemaError,
    UnknownDevice,
    UnsupportedActuator,
)
from .gateway import Gateway, calibrate_device, live_wall, sim_wall
from .home import load_scenario
from .storage import replay_file

VALIDATION_ERRORS = (
    SchemaError,
    InvalidInput,
    CalibrationError,
    UnknownDevice,
    UnsupportedActuator,
    NotFound,
    InvalidDestination,
    NotCalibrated,
)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def build_parser() -> _Parser:
    parser = _Parser(prog="hearth", description="Smart-home monitoring gateway")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="start the gateway and its control API")
    run.add_argument("--config", help="config file (default: $HEARTH_CONFIG, else built-in)")
    run.add_argument("--scenario", help="scenario file driving the virtual home")
    run.add_argument("--speed", type=float, default=1.0, help="wall-clock speed multiplier")
    run.add_argument("--ticks", type=int, help="stop after this many ticks")

    simulate = sub.add_parser("simulate", help="headless run writing trace and ledger")
    simulate.add_argument("--config")
    simulate.add_argument("--scenario")
    simulate.add_argument("--ticks", type=int, required=True)

    calibrate = sub.add_parser("calibrate", help="clean-air calibration of a gas device")
    calibrate.add_argument("--config")
    calibrate.add_argument("--device", required=True)
    calibrate.add_argument("--samples", type=int, required=True)

    replay = sub.add_parser("replay", help="print the alert timeline of a ledger file")
    replay.add_argument("--ledger", required=True)

    return parser


def _resolve_config(args) -> GatewayConfig:
    path = getattr(args, "config", None) or os.environ.get("HEARTH_CONFIG")
    if path:
        return load_config(path)
    print("no config given; using the built-in demo home", file=sys.stderr)
    return GatewayConfig()


def _load_scenario_file(path: str, gateway: Gateway):
    try:
        with open(path, "r", encoding="utf-8") as f:
            doc = json.load(f)
    except OSError as exc:
        raise SchemaError(f"cannot read scenario {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise SchemaError(f"scenario {path} is not valid JSON: {exc}") from exc
    gateway.set_scenario(load_scenario(doc, gateway.home))


def cmd_run(args) -> int:
    config = _resolve_config(args)
    gateway = Gateway(config, wall_clock=live_wall)
    if args.scenario:
        _load_scenario_file(args.scenario, gateway)
    server = ApiServer(
        gateway,
        host=config.api_host,
        port=config.api_port,
        token=config.api_token,
        ui_dir=config.ui_dir,
    )
    server.start()
    gateway.start(speed=args.speed, max_ticks=args.ticks)
    print(f"gateway up: http://{config.api_host}:{server.port}/api/v1/state")
    if config.ui_dir:
        print(f"dashboard:  http://{config.api_host}:{server.port}/ui/")
    try:
        if args.ticks is not None:
            gateway._thread.join()
        else:
            while True:
                gateway._thread.join(timeout=1.0)
                if not gateway._thread.is_alive():
                    break
    except KeyboardInterrupt:
        print("stopping", file=sys.stderr)
    finally:
        gateway.stop()
        server.stop()
    return 0


def cmd_simulate(args) -> int:
    config = _resolve_config(args)
    gateway = Gateway(config, wall_clock=sim_wall)
    if args.scenario:
        _load_scenario_file(args.scenario, gateway)
    if args.ticks < 0:
        raise InvalidInput(f"--ticks must be >= 0, got {args.ticks}")
    summary = gateway.simulate(args.ticks)
    print(f"simulated {summary['ticks']} ticks ({summary['t_ms']} ms)")
    alerts = ", ".join(f"{k}={v}" for k, v in summary["alerts"].items()) or "none"
    print(f"alerts: {alerts}")
    print(f"sms: delivered={summary['sms_delivered']} failed={summary['sms_failed']}")
    print(f"ledger: {summary['ledger']}")
    print(f"readings: {summary['readings']}")
    return 0


def cmd_calibrate(args) -> int:
    config = _resolve_config(args)
    record = calibrate_device(config, args.device, args.samples)
    print(
        f"calibrated {args.device}: r0={record.r0:.4f} kohm "
        f"(rs_mean={record.rs_mean:.4f}, stddev={record.rs_stddev:.4f}, "
        f"n={record.sample_count}, r_load={record.r_load:.1f})"
    )
    return 0


def cmd_replay(args) -> int:
    if not os.path.exists(args.ledger):
        raise SchemaError(f"no such ledger file: {args.ledger}")
    count = 0
    for entry in replay_file(args.ledger):
        if entry.kind != "alert":
            continue
        payload = entry.payload
        alert = payload["alert"]
        print(
            f"{entry.t_ms:>8} ms  {entry.wall}  {payload['event'].upper():<8} "
            f"{alert['kind']} {alert['device']} (id {alert['id']})"
        )
        count += 1
    if count == 0:
        print("no alert events in ledger")
    return 0


COMMANDS = {
    "run": cmd_run,
    "simulate": cmd_simulate,
    "calibrate": cmd_calibrate,
    "replay": cmd_replay,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 1
    try:
        return COMMANDS[args.command](args)
    except VALIDATION_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (HearthError, OSError) as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
