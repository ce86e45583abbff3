"""Scripted end-to-end scenarios on a virtual clock.

A scenario wires hub + simulated chairs + a scripted human over the
in-memory bus and checks expectations against the live appData/appStatus
streams. Runs are deterministic for a fixed seed.

Script format (JSON):

    {
      "chairs": [1, 2],
      "seed": 42,
      "postures": {"1": 1},
      "events": [
        {"at": 0,  "action": "login",  "chair": 1, "client": "app-1",
         "expect_success": true},
        {"at": 60, "action": "expect_state", "chair": 1, "state": "green"},
        {"at": 61, "action": "set_posture", "chair": 1, "posture": 8},
        {"at": 61, "action": "expect_state", "chair": 1, "state": "red",
         "within": 15},
        {"at": 80, "action": "logout", "chair": 1, "client": "app-1"}
      ]
    }

expect_state without "within" checks the latest state at time `at`; with
"within" it passes when the state is seen anywhere in [at, at+within].
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from pathlib import Path

from .bus import InMemoryBus
from .clock import VirtualClock
from .firmware import FirmwareConfig, FirmwareSim
from .hub import APP_LOGIN_TOPIC, HubConfig, HubService
from .hub.topics import TOPIC_PREFIX, topic_for
from .model import ConfigError, Thresholds
from .profiles import default_profile, profile_from_dict
from .store import ChairStore, MemoryStore

ACTIONS = ("login", "logout", "set_posture", "drop_frames", "expect_state")


@dataclass(frozen=True)
class ScenarioEvent:
    at: float
    action: str
    chair: int
    client: str = "app"
    posture: int | None = None
    profile: dict | None = None
    count: int = 0
    state: str | None = None
    within: float | None = None
    expect_success: bool | None = None

    @classmethod
    def from_dict(cls, raw: dict, index: int) -> "ScenarioEvent":
        action = raw.get("action")
        if action not in ACTIONS:
            raise ConfigError(f"events[{index}]: unknown action {action!r}")
        if "chair" not in raw:
            raise ConfigError(f"events[{index}]: missing chair")
        event = cls(
            at=float(raw.get("at", 0.0)),
            action=action,
            chair=int(raw["chair"]),
            client=str(raw.get("client", "app")),
            posture=int(raw["posture"]) if "posture" in raw else None,
            profile=raw.get("profile"),
            count=int(raw.get("count", 0)),
            state=raw.get("state"),
            within=float(raw["within"]) if "within" in raw else None,
            expect_success=raw.get("expect_success"),
        )
        if action == "expect_state" and event.state not in ("green", "orange", "red"):
            raise ConfigError(f"events[{index}]: expect_state needs a state")
        if action == "set_posture" and event.posture is None and event.profile is None:
            raise ConfigError(f"events[{index}]: set_posture needs a posture or profile")
        if action == "drop_frames" and event.count < 1:
            raise ConfigError(f"events[{index}]: drop_frames needs a positive count")
        return event


@dataclass
class Scenario:
    chairs: list[int]
    events: list[ScenarioEvent]
    seed: int = 0
    tick: float = 1.0
    postures: dict[int, int] = field(default_factory=dict)
    thresholds: Thresholds = field(default_factory=Thresholds)
    session_expiry_secs: float = 600.0
    duration: float | None = None

    def __post_init__(self) -> None:
        if not self.chairs:
            raise ConfigError("scenario needs at least one chair")
        last = 0.0
        logged_in: set[int] = set()
        for i, event in enumerate(self.events):
            if event.at < last:
                raise ConfigError(f"events[{i}]: times must be non-decreasing")
            last = event.at
            if event.chair not in self.chairs:
                raise ConfigError(f"events[{i}]: chair {event.chair} not in scenario chairs")
            if event.action == "login":
                logged_in.add(event.chair)
            elif event.action == "expect_state" and event.chair not in logged_in:
                raise ConfigError(f"events[{i}]: expect_state before any login on chair {event.chair}")

    @classmethod
    def from_dict(cls, raw: dict) -> "Scenario":
        if "chairs" not in raw:
            raise ConfigError("scenario needs a 'chairs' list")
        events = [ScenarioEvent.from_dict(e, i) for i, e in enumerate(raw.get("events", []))]
        return cls(
            chairs=[int(c) for c in raw["chairs"]],
            events=events,
            seed=int(raw.get("seed", 0)),
            tick=float(raw.get("tick", 1.0)),
            postures={int(k): int(v) for k, v in raw.get("postures", {}).items()},
            thresholds=Thresholds.from_dict(raw.get("thresholds", {})),
            session_expiry_secs=float(raw.get("session_expiry_secs", 600.0)),
            duration=float(raw["duration"]) if "duration" in raw else None,
        )

    @classmethod
    def from_file(cls, path: str | Path) -> "Scenario":
        try:
            raw = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as err:
            raise ConfigError(f"cannot read scenario {path}: {err}") from err
        return cls.from_dict(raw)

    def horizon(self) -> float:
        if self.duration is not None:
            return self.duration
        last = max((e.at + (e.within or 0.0) for e in self.events), default=0.0)
        return last + 2 * self.tick


@dataclass
class ExpectationResult:
    at: float
    description: str
    passed: bool
    detail: str = ""

    def line(self) -> str:
        mark = "PASS" if self.passed else "FAIL"
        detail = f" ({self.detail})" if self.detail else ""
        return f"[{mark}] t={self.at:g} {self.description}{detail}"


@dataclass
class ScenarioResult:
    passed: bool
    expectations: list[ExpectationResult]
    event_log: list[dict]
    diagnostics: dict

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "expectations": [
                {"at": e.at, "description": e.description, "passed": e.passed, "detail": e.detail}
                for e in self.expectations
            ],
            "event_log": self.event_log,
            "diagnostics": self.diagnostics,
        }


class _StateExpectation:
    def __init__(self, event: ScenarioEvent):
        self.event = event
        self.deadline = event.at + (event.within or 0.0)
        self.met = False
        self.last_seen: str | None = None

    def observe(self, at: float, state: str) -> None:
        if self.event.within is not None:
            if self.event.at <= at <= self.deadline and state == self.event.state:
                self.met = True
        elif at <= self.event.at:
            self.last_seen = state

    def finalize(self) -> ExpectationResult:
        event = self.event
        if event.within is not None:
            desc = f"chair {event.chair} reaches {event.state} within {event.within:g}s"
            return ExpectationResult(event.at, desc, self.met)
        desc = f"chair {event.chair} is {event.state}"
        passed = self.last_seen == event.state
        detail = "" if passed else f"observed {self.last_seen!r}"
        return ExpectationResult(event.at, desc, passed, detail)


class ScenarioRunner:
    """Drives hub, chairs, and script over one virtual timeline."""

    def __init__(
        self,
        scenario: Scenario,
        store: ChairStore | None = None,
        speed: float = 0.0,
        seed: int | None = None,
    ):
        self.scenario = scenario
        self.seed = scenario.seed if seed is None else seed
        self.speed = speed
        self.store = store or MemoryStore()
        self.clock = VirtualClock(0.0)
        self.bus = InMemoryBus()
        self.hub = HubService(
            self.bus,
            self.store,
            HubConfig(
                chairs=scenario.chairs,
                thresholds=scenario.thresholds,
                session_expiry_secs=scenario.session_expiry_secs,
            ),
            self.clock,
        )
        self.firmwares: dict[int, FirmwareSim] = {}
        self._command_subs = {}
        for chair in scenario.chairs:
            posture = scenario.postures.get(chair, 1)
            firmware = FirmwareSim(
                FirmwareConfig(chair_id=chair),
                default_profile(posture),
                seed=self.seed * 1000 + chair,
            )
            firmware.step(0.0)  # chairs are powered and connected before the
            firmware.step(0.0)  # script starts: disconnected -> connecting -> idle
            self.firmwares[chair] = firmware
            self._command_subs[chair] = self.bus.subscribe(topic_for(chair, "sendingEnabled"))
        self._app_data = self.bus.subscribe(f"{TOPIC_PREFIX}/+/appData")
        self._app_status = self.bus.subscribe(f"{TOPIC_PREFIX}/+/appStatus")
        self.event_log: list[dict] = []
        self._state_expectations: list[_StateExpectation] = []
        self._status_expectations: list[dict] = []
        self._last_state: dict[int, str] = {}

    def run(self) -> ScenarioResult:
        pending = list(self.scenario.events)
        horizon = self.scenario.horizon()
        ticks = int(round(horizon / self.scenario.tick))
        for i in range(ticks + 1):
            t = i * self.scenario.tick
            self.clock.set(t)
            while pending and pending[0].at <= t:
                self._apply(pending.pop(0), t)
            for chair, firmware in self.firmwares.items():
                commands = [m.payload for m in self._command_subs[chair].drain()]
                for topic, payload in firmware.step(t, commands):
                    self.bus.publish(topic, payload, published_at=t)
            self.hub.pump()
            self._observe(t)
            if self.speed > 0:
                time.sleep(self.scenario.tick / self.speed)
        return self._finalize()

    def _apply(self, event: ScenarioEvent, t: float) -> None:
        if event.action in ("login", "logout"):
            payload = {"chairId": event.chair, "query": event.action, "client_id": event.client}
            self.bus.publish(APP_LOGIN_TOPIC, json.dumps(payload), published_at=t)
            self._log(t, event.action, chair=event.chair, client=event.client)
            if event.expect_success is not None:
                self._status_expectations.append(
                    {"event": event, "matched": None}
                )
        elif event.action == "set_posture":
            profile = (
                profile_from_dict(event.profile)
                if event.profile is not None
                else default_profile(event.posture)
            )
            self.firmwares[event.chair].set_profile(profile)
            self._log(t, "set_posture", chair=event.chair, posture=profile.posture_id)
        elif event.action == "drop_frames":
            self.firmwares[event.chair].drop_next_frames(event.count)
            self._log(t, "drop_frames", chair=event.chair, count=event.count)
        elif event.action == "expect_state":
            expectation = _StateExpectation(event)
            expectation.last_seen = self._last_state.get(event.chair)
            self._state_expectations.append(expectation)

    def _observe(self, t: float) -> None:
        for message in self._app_status.drain():
            body = json.loads(message.payload)
            self._log(t, "appStatus", **body)
            for pending in self._status_expectations:
                event = pending["event"]
                if (
                    pending["matched"] is None
                    and body.get("chairId") == event.chair
                    and body.get("query") == event.action
                ):
                    pending["matched"] = bool(body.get("success"))
                    break
        for message in self._app_data.drain():
            body = json.loads(message.payload)
            chair = body["chairId"]
            state = body["chdata"]["actual_sitting_state"]
            if self._last_state.get(chair) != state:
                self._log(t, "state_change", chair=chair, state=state)
                self._last_state[chair] = state
            for expectation in self._state_expectations:
                if chair == expectation.event.chair:
                    expectation.observe(t, state)

    def _finalize(self) -> ScenarioResult:
        results = []
        for pending in self._status_expectations:
            event = pending["event"]
            want = event.expect_success
            got = pending["matched"]
            desc = f"{event.action} chair {event.chair} -> success:{str(want).lower()}"
            passed = got is not None and got == want
            detail = "" if passed else f"observed {got!r}"
            results.append(ExpectationResult(event.at, desc, passed, detail))
        for expectation in self._state_expectations:
            results.append(expectation.finalize())
        results.sort(key=lambda r: r.at)
        passed = all(r.passed for r in results)
        self.bus.close()
        return ScenarioResult(
            passed=passed,
            expectations=results,
            event_log=self.event_log,
            diagnostics=dict(self.hub.diagnostics),
        )

    def _log(self, t: float, kind: str, **fields) -> None:
        entry = {"t": t, "kind": kind}
        entry.update(fields)
        self.event_log.append(entry)


def run_scenario(
    scenario: Scenario,
    store: ChairStore | None = None,
    speed: float = 0.0,
    seed: int | None = None,
) -> ScenarioResult:
    return ScenarioRunner(scenario, store=store, speed=speed, seed=seed).run()
