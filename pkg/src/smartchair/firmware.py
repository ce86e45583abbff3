"""Chair firmware simulator.

Models the measurement node's control loop on an injected clock: connect
(with 5 s retry), wait idle with keepalive pings, and stream one pressure
frame per second while measuring. Commands arrive on the chair's
sendingEnabled channel; data and pings leave on the shared pressure topic.
"""

from __future__ import annotations

import json
import logging
import random
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

from .hub.topics import topic_for
from .model import PressureSample
from .profiles import PostureProfile, generate_frame

logger = logging.getLogger(__name__)


class FirmwarePhase(Enum):
    DISCONNECTED = "disconnected"
    CONNECTING = "connecting"
    IDLE = "idle"
    MEASURING = "measuring"


@dataclass(frozen=True)
class FirmwareConfig:
    chair_id: int
    publish_interval: float = 1.0
    ping_interval: float = 30.0
    retry_delay: float = 5.0
    connect_failures: int = 0  # simulated failed attempts before success


def encode_pressure_payload(sample: PressureSample) -> bytes:
    """Wire form of one frame: readings as 2-decimal strings."""
    body = {
        "chairId": sample.chair_id,
        "data": [f"{v:.2f}" for v in sample.readings],
    }
    return json.dumps(body, separators=(",", ":")).encode()


def encode_ping_payload(chair_id: int) -> bytes:
    return json.dumps({"chairId": chair_id, "ping": 1}, separators=(",", ":")).encode()


class FirmwareSim:
    """One simulated chair node; step() drives the control loop."""

    def __init__(
        self,
        config: FirmwareConfig,
        profile: PostureProfile,
        seed: int | None = None,
        rng: random.Random | None = None,
    ):
        self.config = config
        self.profile = profile
        self.rng = rng or random.Random(seed)
        self.phase = FirmwarePhase.DISCONNECTED
        self.last_publish_at: float | None = None
        self.last_ping_at: float | None = None
        self.diagnostics = {"unknown_commands": 0, "dropped_frames": 0}
        self.command_topic = topic_for(config.chair_id, "sendingEnabled")
        self.data_topic = topic_for(config.chair_id, "pressureData")
        self._failures_left = config.connect_failures
        self._retry_at: float | None = None
        self._next_publish: float | None = None
        self._next_ping: float | None = None
        self._drop_frames = 0

    @property
    def chair_id(self) -> int:
        return self.config.chair_id

    def set_profile(self, profile: PostureProfile) -> None:
        self.profile = profile

    def drop_next_frames(self, count: int) -> None:
        """Swallow the next `count` publishes (models a lossy link)."""
        self._drop_frames += count

    def step(self, now: float, commands: Sequence[bytes] = ()) -> list[tuple[str, bytes]]:
        """Advance the loop to `now`; returns (topic, payload) to publish."""
        out: list[tuple[str, bytes]] = []

        if self.phase is FirmwarePhase.DISCONNECTED:
            if self._retry_at is None or now >= self._retry_at:
                self.phase = FirmwarePhase.CONNECTING
            return out
        if self.phase is FirmwarePhase.CONNECTING:
            if self._failures_left > 0:
                self._failures_left -= 1
                self._retry_at = now + self.config.retry_delay
                self.phase = FirmwarePhase.DISCONNECTED
            else:
                self.phase = FirmwarePhase.IDLE
                self._next_ping = now + self.config.ping_interval
            return out

        for raw in commands:
            self._handle_command(raw, now)

        if self.phase is FirmwarePhase.IDLE:
            if self._next_ping is not None and now >= self._next_ping:
                out.append((self.data_topic, encode_ping_payload(self.chair_id)))
                self.last_ping_at = now
                self._next_ping += self.config.ping_interval
        elif self.phase is FirmwarePhase.MEASURING:
            if self._next_publish is not None and now >= self._next_publish:
                frame = generate_frame(self.profile, self.rng, self.chair_id, now)
                if self._drop_frames > 0:
                    self._drop_frames -= 1
                    self.diagnostics["dropped_frames"] += 1
                else:
                    out.append((self.data_topic, encode_pressure_payload(frame)))
                self.last_publish_at = now
                self._next_publish += self.config.publish_interval
        return out

    def _handle_command(self, raw: bytes, now: float) -> None:
        command = _decode_command(raw)
        if command == "start":
            if self.phase is FirmwarePhase.IDLE:
                self.phase = FirmwarePhase.MEASURING
                self._next_publish = now
        elif command == "stop":
            if self.phase is FirmwarePhase.MEASURING:
                self.phase = FirmwarePhase.IDLE
                self._next_publish = None
                self._next_ping = now + self.config.ping_interval
        else:
            self.diagnostics["unknown_commands"] += 1
            logger.debug("chair %d: ignoring command %r", self.chair_id, raw[:64])


def _decode_command(raw: bytes) -> str | None:
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError:
        return None
    try:
        obj = json.loads(text)
    except json.JSONDecodeError:
        return text.strip().lower() or None
    if isinstance(obj, dict):
        command = obj.get("command")
        return command.lower() if isinstance(command, str) else None
    if isinstance(obj, str):
        return obj.lower()
    return None
