"""Smart-chair sitting-posture stack: simulated chairs, pub/sub hub, posture rules."""

from .model import (
    ConfigError,
    PressureSample,
    RoutingError,
    SampleStats,
    SittingState,
    SmartChairError,
    Thresholds,
    ValidationError,
    compute_sample_stats,
)
from .rules import classify
from .session import ChairSession
from .report import DailyReport, SessionRecord, daily_report

__all__ = [
    "ChairSession",
    "ConfigError",
    "DailyReport",
    "PressureSample",
    "RoutingError",
    "SampleStats",
    "SessionRecord",
    "SittingState",
    "SmartChairError",
    "Thresholds",
    "ValidationError",
    "classify",
    "compute_sample_stats",
    "daily_report",
]
