"""Hub service: login management and the pressure-data pipeline.

Subscribes to the shared appLogin and pressure topics, mutates the chair
registry on a single serialized event stream, persists every frame, and
fans processed appData out over the bus and (byte-identically) over the
WebSocket layer.
"""

from __future__ import annotations

import json
import logging
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Protocol

from ..bus import MessageBus, BusMessage
from ..clock import WallClock
from ..model import (
    ConfigError,
    PressureSample,
    Thresholds,
    ValidationError,
    compute_sample_stats,
)
from ..report import SessionRecord
from ..session import ChairSession
from ..store import ChairStore, SampleRecord, StoreError
from .registry import ChairRegistry, LoginRequest
from .topics import APP_LOGIN_TOPIC, PRESSURE_TOPIC, topic_for

logger = logging.getLogger(__name__)


class Fanout(Protocol):
    """Live fan-out sink mirroring the appData channel (WebSocket layer)."""

    def send(self, chair_id: int, payload: bytes) -> None:
        ...


@dataclass
class HubConfig:
    chairs: list[int]
    thresholds: Thresholds = field(default_factory=Thresholds)
    session_expiry_secs: float = 600.0

    @classmethod
    def from_dict(cls, raw: dict) -> "HubConfig":
        if "chairs" not in raw or not isinstance(raw["chairs"], list):
            raise ConfigError("config needs a 'chairs' list")
        thresholds = Thresholds.from_dict(raw.get("thresholds", {}))
        return cls(
            chairs=[int(c) for c in raw["chairs"]],
            thresholds=thresholds,
            session_expiry_secs=float(raw.get("session_expiry_secs", 600.0)),
        )

    @classmethod
    def from_file(cls, path: str | Path) -> "HubConfig":
        try:
            raw = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as err:
            raise ConfigError(f"cannot read config {path}: {err}") from err
        return cls.from_dict(raw)


def build_app_data(sample: PressureSample, now: float, stats, chdata: dict) -> bytes:
    """Encode the appData message; MQTT and WebSocket carry these bytes."""
    msg = {
        "chairId": sample.chair_id,
        "data": list(sample.readings),
        "sum": stats.sum,
        "actual_time": int(now),
        "avg": stats.seat_avg,
        "deviation": stats.seat_dispersion,
        "chdata": chdata,
    }
    return json.dumps(msg, separators=(",", ":")).encode()


class HubService:
    """Single hub instance over one bus; call pump() to process events."""

    def __init__(
        self,
        bus: MessageBus,
        store: ChairStore,
        config: HubConfig,
        clock=None,
        fanout: Fanout | None = None,
    ):
        self.bus = bus
        self.store = store
        self.config = config
        self.clock = clock or WallClock()
        self.fanout = fanout
        self.registry = ChairRegistry(config.chairs, config.thresholds)
        self.diagnostics = {
            "malformed_logins": 0,
            "malformed_frames": 0,
            "pings": 0,
            "frames": 0,
            "store_errors": 0,
            "session_errors": 0,
            "expired_sessions": 0,
        }
        self._sub = bus.subscribe([APP_LOGIN_TOPIC, PRESSURE_TOPIC], capacity=4096)

    def pump(self) -> int:
        """Process every queued inbound message; returns the count."""
        processed = 0
        while True:
            message = self._sub.get(timeout=0)
            if message is None:
                break
            self._dispatch(message)
            processed += 1
        self.expire_sessions(self.clock.now())
        return processed

    def run(self, stop: threading.Event, poll_secs: float = 0.2) -> None:
        """Blocking loop for live mode."""
        while not stop.is_set():
            message = self._sub.get(timeout=poll_secs)
            if message is not None:
                self._dispatch(message)
            self.expire_sessions(self.clock.now())

    def close(self) -> None:
        self.bus.unsubscribe(self._sub)

    def _dispatch(self, message: BusMessage) -> None:
        now = self.clock.now()
        if message.topic == APP_LOGIN_TOPIC:
            self._handle_login(message.payload, now)
        elif message.topic == PRESSURE_TOPIC:
            self._handle_pressure(message.payload, now)

    # -- chair/application management ------------------------------------

    def _handle_login(self, payload: bytes, now: float) -> None:
        try:
            obj = json.loads(payload)
        except (UnicodeDecodeError, json.JSONDecodeError):
            self.diagnostics["malformed_logins"] += 1
            logger.warning("unparseable appLogin payload: %r", payload[:80])
            return
        try:
            request = LoginRequest.from_payload(obj)
        except ValidationError as err:
            self.diagnostics["malformed_logins"] += 1
            chair_id = obj.get("chairId") if isinstance(obj, dict) else None
            if isinstance(chair_id, int) and not isinstance(chair_id, bool) and chair_id >= 1:
                self._publish_status(chair_id, str(obj.get("query")), False, str(err))
            return

        if request.query == "login":
            outcome = self.registry.login(request.chair_id, request.client_id, now)
        else:
            outcome = self.registry.logout(request.chair_id, request.client_id, now)
            if outcome.record is not None:
                self._persist_session(outcome.record)
        self._publish_status(request.chair_id, request.query, outcome.success, outcome.reason)
        if outcome.command:
            self._send_command(request.chair_id, outcome.command)

    def _publish_status(self, chair_id: int, query: str, success: bool, reason: str | None) -> None:
        msg: dict = {"chairId": chair_id, "query": query, "success": success}
        if reason:
            msg["reason"] = reason
        self.bus.publish(
            topic_for(chair_id, "appStatus"),
            json.dumps(msg, separators=(",", ":")),
            published_at=self.clock.now(),
        )

    def _send_command(self, chair_id: int, command: str) -> None:
        self.bus.publish(
            topic_for(chair_id, "sendingEnabled"),
            json.dumps({"command": command}, separators=(",", ":")),
            published_at=self.clock.now(),
        )

    # -- pressure-data pipeline -------------------------------------------

    def _handle_pressure(self, payload: bytes, now: float) -> None:
        try:
            obj = json.loads(payload)
        except (UnicodeDecodeError, json.JSONDecodeError):
            self.diagnostics["malformed_frames"] += 1
            return
        if isinstance(obj, dict) and obj.get("ping") == 1:
            self.diagnostics["pings"] += 1
            return
        try:
            sample = PressureSample.from_payload(obj, received_at=now)
        except ValidationError as err:
            self.diagnostics["malformed_frames"] += 1
            logger.debug("dropping malformed frame: %s", err)
            return

        self.diagnostics["frames"] += 1
        stats = compute_sample_stats(sample, self.config.thresholds)
        record = SampleRecord(chair_id=sample.chair_id, data=sample.readings, sum=stats.sum, ts=now)
        try:
            self.store.append_sample(record)
        except StoreError as err:
            self.diagnostics["store_errors"] += 1
            logger.error("sample persistence failed, live fan-out continues: %s", err)

        slot = self.registry.slot(sample.chair_id)
        if slot is None or slot.session is None:
            return  # vacant or unregistered chair: stored, not classified
        try:
            chdata = slot.session.update(sample, now)
        except Exception:
            self.diagnostics["session_errors"] += 1
            logger.exception("session update failed for chair %d", sample.chair_id)
            return
        slot.tally.observe(now, chdata)
        slot.last_activity = now

        app_data = build_app_data(sample, now, slot.session.last_stats, chdata)
        self.bus.publish(topic_for(sample.chair_id, "appData"), app_data, published_at=now)
        if self.fanout is not None:
            self.fanout.send(sample.chair_id, app_data)

    # -- session expiry ----------------------------------------------------

    def expire_sessions(self, now: float) -> None:
        for record in self.registry.expire_idle(now, self.config.session_expiry_secs):
            self.diagnostics["expired_sessions"] += 1
            self._persist_session(record)
            self._publish_status(record.chair_id, "logout", True, "expired")
            self._send_command(record.chair_id, "stop")

    def _persist_session(self, record: SessionRecord) -> None:
        try:
            self.store.close_session(record)
        except StoreError as err:
            self.diagnostics["store_errors"] += 1
            logger.error("session persistence failed: %s", err)


def replay_session(
    record: SessionRecord, samples: list[SampleRecord], thresholds: Thresholds
) -> list[bytes]:
    """Re-run the pipeline over stored frames of one session.

    Returns the appData byte stream the live run produced; identical inputs
    must reproduce it bit-for-bit.
    """
    session = ChairSession.open(record.chair_id, record.start_time, thresholds)
    out: list[bytes] = []
    for rec in samples:
        if not (record.start_time <= rec.ts < record.end_time):
            continue
        sample = PressureSample(
            chair_id=rec.chair_id,
            seat=tuple(rec.data[:4]),
            back=tuple(rec.data[4:]),
            received_at=rec.ts,
        )
        chdata = session.update(sample, rec.ts)
        out.append(build_app_data(sample, rec.ts, session.last_stats, chdata))
    return out


def replay_day(store: ChairStore, chair_id: int, day: str, thresholds: Thresholds) -> list[bytes]:
    """Replay every stored session of one chair-day, in session order."""
    out: list[bytes] = []
    for record in store.sessions(chair_id, day):
        samples = store.query(chair_id, record.start_time, record.end_time)
        out.extend(replay_session(record, samples, thresholds))
    return out
