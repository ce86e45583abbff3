"""Canonical topic layout. Every module builds topics through here; chairs
are added by configuration, never by copying topic strings around."""

from __future__ import annotations

from ..model import ValidationError

TOPIC_PREFIX = "qiot/things/Matuska/chairs"

# Channels addressed per chair.
PER_CHAIR_CHANNELS = ("sendingEnabled", "appStatus", "appData")
# Shared inbound channels; the chair id travels in the payload.
SHARED_CHANNELS = {"appLogin": "appLogin", "pressureData": "chairPressureData"}

APP_LOGIN_TOPIC = f"{TOPIC_PREFIX}/appLogin"
PRESSURE_TOPIC = f"{TOPIC_PREFIX}/chairPressureData"


def topic_for(chair_id: int, channel: str) -> str:
    """Canonical topic string for a chair/channel pair."""
    if not isinstance(chair_id, int) or chair_id < 1:
        raise ValidationError(f"chair_id: must be a positive integer, got {chair_id!r}")
    if channel in PER_CHAIR_CHANNELS:
        return f"{TOPIC_PREFIX}/ch{chair_id}/{channel}"
    if channel in SHARED_CHANNELS:
        return f"{TOPIC_PREFIX}/{SHARED_CHANNELS[channel]}"
    raise ValidationError(f"channel: unknown channel {channel!r}")


def ws_path(chair_id: int) -> str:
    """WebSocket path mirroring a chair's appData channel."""
    if not isinstance(chair_id, int) or chair_id < 1:
        raise ValidationError(f"chair_id: must be a positive integer, got {chair_id!r}")
    return f"/ws/ch{chair_id}/appData"
