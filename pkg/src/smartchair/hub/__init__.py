"""Hub: session management, pressure-data pipeline, live fan-out."""

from .topics import APP_LOGIN_TOPIC, PRESSURE_TOPIC, topic_for, ws_path
from .registry import ChairRegistry, LoginRequest
from .service import HubConfig, HubService

__all__ = [
    "APP_LOGIN_TOPIC",
    "ChairRegistry",
    "HubConfig",
    "HubService",
    "LoginRequest",
    "PRESSURE_TOPIC",
    "topic_for",
    "ws_path",
]
