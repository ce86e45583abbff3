"""Operator entry point: hub, chair fleets, replay, reports, scenarios.

Exit codes: 0 success, 1 expectation/check failure, 2 configuration error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import signal
import sys
import threading
import time
from datetime import datetime, timedelta, timezone
from pathlib import Path

from .bus import InMemoryBus, MessageBus
from .clock import WallClock
from .firmware import FirmwareConfig, FirmwareSim
from .hub import HubConfig, HubService, topic_for
from .hub.service import replay_day
from .model import ConfigError, SmartChairError, Thresholds
from .profiles import default_profile, profile_from_dict
from .report import daily_report
from .scenario import Scenario, run_scenario
from .store import ChairStore, MemoryStore, NdjsonStore

logger = logging.getLogger(__name__)


def make_bus(spec: str) -> MessageBus:
    if spec == "memory":
        return InMemoryBus()
    if spec.startswith("mqtt://"):
        from .mqtt_bus import MqttBus

        return MqttBus.from_url(spec)
    raise ConfigError(f"--bus must be 'memory' or mqtt://host[:port], got {spec!r}")


def make_store(store_dir: str | None) -> ChairStore:
    return NdjsonStore(store_dir) if store_dir else MemoryStore()


def load_hub_config(args) -> HubConfig:
    if getattr(args, "config", None):
        return HubConfig.from_file(args.config)
    chairs = list(range(1, getattr(args, "sim_chairs", 0) + 1)) or [1]
    return HubConfig(chairs=chairs)


class Fleet:
    """A set of simulated chairs driven on one clock against one bus."""

    def __init__(self, bus: MessageBus, chair_ids, posture_spec: str, seed: int, rate: float):
        self.bus = bus
        self.interval = 1.0 / rate
        self.timeline = _parse_posture_spec(posture_spec)
        initial = self.timeline[0][1]
        self.firmwares = {}
        self.command_subs = {}
        for chair in chair_ids:
            self.firmwares[chair] = FirmwareSim(
                FirmwareConfig(chair_id=chair, publish_interval=self.interval),
                initial,
                seed=seed * 1000 + chair,
            )
            self.command_subs[chair] = self.bus.subscribe(topic_for(chair, "sendingEnabled"))
        self._applied = 0
        self._started_at: float | None = None

    def step(self, now: float) -> None:
        if self._started_at is None:
            self._started_at = now
        elapsed = now - self._started_at
        while self._applied < len(self.timeline) and self.timeline[self._applied][0] <= elapsed:
            _, profile = self.timeline[self._applied]
            for firmware in self.firmwares.values():
                firmware.set_profile(profile)
            self._applied += 1
        for chair, firmware in self.firmwares.items():
            commands = [m.payload for m in self.command_subs[chair].drain()]
            for topic, payload in firmware.step(now, commands):
                self.bus.publish(topic, payload, published_at=now)


def _parse_posture_spec(spec: str) -> list[tuple[float, object]]:
    """'3' -> fixed posture; a JSON file may hold a {timeline: [...]} schedule."""
    if spec.isdigit():
        return [(0.0, default_profile(int(spec)))]
    try:
        raw = json.loads(Path(spec).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as err:
        raise ConfigError(f"cannot read posture script {spec!r}: {err}") from err
    if isinstance(raw, dict) and "timeline" in raw:
        timeline = []
        for i, entry in enumerate(raw["timeline"]):
            at = float(entry.get("at", 0.0))
            if "profile" in entry:
                profile = profile_from_dict(entry["profile"])
            elif "posture" in entry:
                profile = default_profile(int(entry["posture"]))
            else:
                raise ConfigError(f"timeline[{i}]: needs 'posture' or 'profile'")
            timeline.append((at, profile))
        if not timeline:
            raise ConfigError("posture timeline is empty")
        return sorted(timeline, key=lambda e: e[0])
    if isinstance(raw, dict):
        return [(0.0, profile_from_dict(raw))]
    raise ConfigError(f"posture script {spec!r}: expected a profile or timeline object")


def _install_stop_handler(stop: threading.Event) -> None:
    def handle(_signum, _frame):
        stop.set()

    for sig in (signal.SIGINT, signal.SIGTERM):
        try:
            signal.signal(sig, handle)
        except ValueError:
            pass  # not the main thread


# -- subcommands -------------------------------------------------------------

def cmd_hub(args) -> int:
    config = load_hub_config(args)
    bus = make_bus(args.bus)
    store = make_store(args.store_dir)
    hub = HubService(bus, store, config, WallClock())

    from .hub.ws import WebSocketFanout

    fanout = WebSocketFanout(hub, host=args.ws_host, port=args.ws_port)
    hub.fanout = fanout
    fanout.start()
    print(f"hub: chairs={config.chairs} bus={args.bus} ws=ws://{fanout.host}:{fanout.port}")

    stop = threading.Event()
    _install_stop_handler(stop)
    fleet = None
    if args.sim_chairs > 0:
        if args.bus != "memory":
            raise ConfigError("--sim-chairs requires --bus memory (run 'sim' separately for MQTT)")
        fleet = Fleet(bus, config.chairs, args.posture, args.seed, args.rate)
        print(f"embedded fleet: {len(fleet.firmwares)} chair(s), posture {args.posture}")
    try:
        interval = 1.0 / args.rate
        next_tick = time.time()
        while not stop.is_set():
            if fleet is not None:
                fleet.step(time.time())
            hub.pump()
            next_tick += interval
            stop.wait(max(next_tick - time.time(), 0.0))
    finally:
        fanout.stop()
        hub.close()
        bus.close()
        store.close()
    return 0


def cmd_sim(args) -> int:
    bus = make_bus(args.bus)
    if isinstance(bus, InMemoryBus):
        raise ConfigError("a standalone fleet needs --bus mqtt://... (nothing listens in-memory)")
    chair_ids = list(range(1, args.chairs + 1))
    fleet = Fleet(bus, chair_ids, args.posture, args.seed, args.rate)
    print(f"fleet: {args.chairs} chair(s) on {args.bus}, posture {args.posture}")
    stop = threading.Event()
    _install_stop_handler(stop)
    try:
        interval = 1.0 / args.rate
        next_tick = time.time()
        while not stop.is_set():
            fleet.step(time.time())
            next_tick += interval
            stop.wait(max(next_tick - time.time(), 0.0))
    finally:
        bus.close()
    return 0


def cmd_scenario(args) -> int:
    if args.bus != "memory":
        raise ConfigError(
            "scenarios run on the in-memory bus; determinism on a virtual clock "
            "is not achievable through an external broker"
        )
    scenario = Scenario.from_file(args.script)
    store = make_store(args.store_dir)
    result = run_scenario(scenario, store=store, speed=args.speed, seed=args.seed)
    store.close()
    if args.json:
        print(json.dumps(result.to_dict(), indent=2))
    else:
        for expectation in result.expectations:
            print(expectation.line())
        failed = sum(1 for e in result.expectations if not e.passed)
        print(f"scenario: {len(result.expectations) - failed}/{len(result.expectations)} expectations met")
    return 0 if result.passed else 1


def cmd_replay(args) -> int:
    store = NdjsonStore(args.store_dir)
    thresholds = Thresholds()
    if args.config:
        thresholds = HubConfig.from_file(args.config).thresholds
    stream = replay_day(store, args.chair, args.day, thresholds)
    store.close()
    if args.json:
        for payload in stream:
            sys.stdout.write(payload.decode("utf-8") + "\n")
    else:
        digest = hashlib.sha256(b"\n".join(stream)).hexdigest()
        print(f"replayed {len(stream)} appData messages for chair {args.chair} on {args.day}")
        print(f"stream sha256: {digest}")
    return 0


def cmd_report(args) -> int:
    store = NdjsonStore(args.store_dir)
    sessions = store.sessions(args.chair, args.day)
    store.close()
    report = daily_report(sessions).to_dict()
    report["day"] = args.day
    report["chairId"] = args.chair
    print(json.dumps(report, indent=2))
    return 0


def cmd_compact(args) -> int:
    store = NdjsonStore(args.store_dir)
    cutoff = (datetime.now(timezone.utc) - timedelta(days=args.keep_days)).strftime("%Y-%m-%d")
    removed = store.compact(cutoff)
    store.close()
    print(f"dropped {removed} sample file(s) older than {cutoff}; sessions kept")
    return 0


# -- parser -------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="smartchair",
        description="Smart-chair posture stack: hub, simulated fleets, replay, reports.",
    )
    parser.add_argument("--log-level", default="warning",
                        choices=["debug", "info", "warning", "error"])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("hub", help="run the hub (optionally with an embedded simulated fleet)")
    p.add_argument("--bus", default="memory", help="memory or mqtt://host[:port]")
    p.add_argument("--config", help="JSON config: chairs, thresholds, session_expiry_secs")
    p.add_argument("--store-dir", help="persist samples/sessions under this directory")
    p.add_argument("--ws-host", default="127.0.0.1")
    p.add_argument("--ws-port", type=int, default=8765)
    p.add_argument("--sim-chairs", type=int, default=0,
                   help="embed N simulated chairs (memory bus only)")
    p.add_argument("--posture", default="1", help="posture 1-9 or a timeline script.json")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--rate", type=float, default=1.0, help="frames per second per chair")
    p.set_defaults(func=cmd_hub)

    p = sub.add_parser("sim", help="run a standalone simulated fleet against an MQTT broker")
    p.add_argument("--bus", required=True, help="mqtt://host[:port]")
    p.add_argument("--chairs", type=int, default=1)
    p.add_argument("--posture", default="1", help="posture 1-9 or a timeline script.json")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--rate", type=float, default=1.0)
    p.set_defaults(func=cmd_sim)

    p = sub.add_parser("scenario", help="run a scripted end-to-end scenario")
    p.add_argument("script", help="scenario JSON file")
    p.add_argument("--bus", default="memory", help="must be 'memory' (kept for symmetry)")
    p.add_argument("--seed", type=int, default=None, help="override the script seed")
    p.add_argument("--speed", type=float, default=0.0,
                   help="0 = as fast as possible; X = X virtual seconds per wall second")
    p.add_argument("--store-dir", help="persist the run (default: in-memory)")
    p.add_argument("--json", action="store_true", help="emit the full result as JSON")
    p.set_defaults(func=cmd_scenario)

    p = sub.add_parser("replay", help="re-process a stored day and print the stream digest")
    p.add_argument("--store-dir", required=True)
    p.add_argument("--chair", type=int, required=True)
    p.add_argument("--day", required=True, help="YYYY-MM-DD (UTC)")
    p.add_argument("--config", help="hub config for threshold overrides")
    p.add_argument("--json", action="store_true", help="print every appData message")
    p.set_defaults(func=cmd_replay)

    p = sub.add_parser("report", help="print the daily report for a chair")
    p.add_argument("--store-dir", required=True)
    p.add_argument("--chair", type=int, required=True)
    p.add_argument("--day", required=True, help="YYYY-MM-DD (UTC)")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("compact", help="drop raw samples older than N days, keep sessions")
    p.add_argument("--store-dir", required=True)
    p.add_argument("--keep-days", type=int, required=True)
    p.set_defaults(func=cmd_compact)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=getattr(logging, args.log_level.upper()),
        format="%(asctime)s %(name)s %(levelname)s %(message)s",
    )
    try:
        return args.func(args)
    except ConfigError as err:
        print(f"configuration error: {err}", file=sys.stderr)
        return 2
    except SmartChairError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
