"""Core domain types: pressure frames, per-frame statistics, thresholds."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence

SEAT_SENSORS = 4
BACK_SENSORS = 2
READING_MIN = 0.0
READING_MAX = 15.0


class SmartChairError(Exception):
    """Base class for errors raised by this package."""


class ValidationError(SmartChairError, ValueError):
    """Malformed input; message names the offending field."""


class ConfigError(SmartChairError, ValueError):
    """Invalid configuration (thresholds, profiles, scenario scripts)."""


class RoutingError(SmartChairError):
    """Message delivered to the wrong chair session."""


class SittingState(str, Enum):
    GREEN = "green"
    ORANGE = "orange"
    RED = "red"

    @property
    def severity(self) -> int:
        return _SEVERITY[self]


_SEVERITY = {SittingState.GREEN: 0, SittingState.ORANGE: 1, SittingState.RED: 2}


@dataclass(frozen=True)
class Thresholds:
    """Rule-engine and windowing parameters.

    odt/rdt/ocdt are compared against the rolling mean of the per-frame
    seat dispersion (population variance of the four seat readings).
    """

    odt: float = 3.0
    rdt: float = 6.8
    ocdt: float = 0.8
    presence_sum: float = 1.0
    long_sit_secs: float = 3600.0
    presence_window: int = 10
    dispersion_window: int = 5
    back_eps: float = 0.5

    def __post_init__(self) -> None:
        if not (0 < self.ocdt < self.odt < self.rdt):
            raise ConfigError(
                f"thresholds must satisfy 0 < ocdt < odt < rdt, "
                f"got ocdt={self.ocdt} odt={self.odt} rdt={self.rdt}"
            )
        if not (self.presence_window >= self.dispersion_window >= 1):
            raise ConfigError(
                f"presence_window >= dispersion_window >= 1 required, "
                f"got {self.presence_window} and {self.dispersion_window}"
            )
        if not self.long_sit_secs > 0:
            raise ConfigError(f"long_sit_secs must be positive, got {self.long_sit_secs}")
        if not (math.isfinite(self.presence_sum) and self.presence_sum > 0):
            raise ConfigError(f"presence_sum must be positive, got {self.presence_sum}")
        if not (math.isfinite(self.back_eps) and self.back_eps >= 0):
            raise ConfigError(f"back_eps must be >= 0, got {self.back_eps}")

    @classmethod
    def from_dict(cls, raw: dict) -> "Thresholds":
        known = {f for f in cls.__dataclass_fields__}
        bad = set(raw) - known
        if bad:
            raise ConfigError(f"unknown threshold fields: {sorted(bad)}")
        return cls(**raw)


def _check_reading(value: object, name: str) -> float:
    try:
        x = float(value)  # type: ignore[arg-type]
    except (TypeError, ValueError):
        raise ValidationError(f"{name}: not a number ({value!r})") from None
    if not math.isfinite(x):
        raise ValidationError(f"{name}: non-finite reading {x!r}")
    if not (READING_MIN <= x <= READING_MAX):
        raise ValidationError(f"{name}: {x} outside [{READING_MIN:g}, {READING_MAX:g}]")
    return x


@dataclass(frozen=True)
class PressureSample:
    """One 6-sensor force frame: 4 seat readings then 2 back readings."""

    chair_id: int
    seat: tuple[float, float, float, float]
    back: tuple[float, float]
    received_at: float = 0.0

    def __post_init__(self) -> None:
        if not isinstance(self.chair_id, int) or self.chair_id < 1:
            raise ValidationError(f"chair_id: must be a positive integer, got {self.chair_id!r}")
        if len(self.seat) != SEAT_SENSORS:
            raise ValidationError(f"seat: expected {SEAT_SENSORS} readings, got {len(self.seat)}")
        if len(self.back) != BACK_SENSORS:
            raise ValidationError(f"back: expected {BACK_SENSORS} readings, got {len(self.back)}")
        object.__setattr__(
            self, "seat", tuple(_check_reading(v, f"seat[{i}]") for i, v in enumerate(self.seat))
        )
        object.__setattr__(
            self, "back", tuple(_check_reading(v, f"back[{i}]") for i, v in enumerate(self.back))
        )

    @property
    def readings(self) -> tuple[float, ...]:
        """All six readings in wire order (seat 0-3, back 4-5)."""
        return self.seat + self.back

    @classmethod
    def from_payload(cls, payload: dict, received_at: float = 0.0) -> "PressureSample":
        """Build a sample from a decoded pressure message.

        Accepts readings as strings or numbers (the chair firmware sends
        2-decimal strings); `data` holds seat readings at indices 0-3 and
        back readings at 4-5.
        """
        if not isinstance(payload, dict):
            raise ValidationError(f"payload: expected object, got {type(payload).__name__}")
        chair_id = payload.get("chairId")
        if not isinstance(chair_id, int) or isinstance(chair_id, bool) or chair_id < 1:
            raise ValidationError(f"chairId: must be a positive integer, got {chair_id!r}")
        data = payload.get("data")
        if not isinstance(data, (list, tuple)) or len(data) != SEAT_SENSORS + BACK_SENSORS:
            raise ValidationError(f"data: expected {SEAT_SENSORS + BACK_SENSORS}-element array")
        values = [_check_reading(v, f"data[{i}]") for i, v in enumerate(data)]
        return cls(
            chair_id=chair_id,
            seat=tuple(values[:SEAT_SENSORS]),
            back=tuple(values[SEAT_SENSORS:]),
            received_at=received_at,
        )


@dataclass(frozen=True)
class SampleStats:
    """Per-frame derived quantities used by the posture rules."""

    sum: float
    seat_avg: float
    seat_dispersion: float
    back_dispersion: float
    back_present: bool


def population_variance(values: Sequence[float]) -> float:
    """Mean of squared deviations from the mean (divisor = len)."""
    n = len(values)
    mean = math.fsum(values) / n
    return math.fsum((v - mean) ** 2 for v in values) / n


def compute_sample_stats(sample: PressureSample, thresholds: Thresholds) -> SampleStats:
    """Reduce one frame to the quantities the classifier consumes.

    Dispersions are population variances (the worked reference value
    0.00461875 for seat readings with mean 5.6125 is a variance, not a
    standard deviation).
    """
    total = math.fsum(sample.readings)
    seat_avg = math.fsum(sample.seat) / SEAT_SENSORS
    seat_dispersion = population_variance(sample.seat)
    back_dispersion = population_variance(sample.back)
    back_present = math.fsum(sample.back) >= thresholds.back_eps
    return SampleStats(
        sum=total,
        seat_avg=seat_avg,
        seat_dispersion=seat_dispersion,
        back_dispersion=back_dispersion,
        back_present=back_present,
    )


def mean(values: Iterable[float]) -> float:
    xs = list(values)
    if not xs:
        raise ValueError("mean of empty sequence")
    return math.fsum(xs) / len(xs)
