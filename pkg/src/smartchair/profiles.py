"""Posture profiles and calibrated frame generation for simulated chairs.

Each of the nine postures targets a mean per-frame seat dispersion taken
from bench calibration data. A frame is produced as

    seat[i] = base[i] + tilt * tilt_pattern[i] + noise[i]

where the static base spread carries most of the target dispersion and the
shared tilt plus per-sensor Gaussian noise make up the remainder, so the
expected per-frame variance equals the target exactly (before clamping to
the 0-15 sensor range).
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field

from .model import (
    READING_MAX,
    READING_MIN,
    ConfigError,
    PressureSample,
    population_variance,
)

# Mean per-frame seat dispersion target for postures 1-9 (calibration data).
CALIBRATION_TARGETS = {
    1: 0.266,
    2: 0.850,
    3: 3.758,
    4: 4.576,
    5: 3.431,
    6: 9.573,
    7: 6.865,
    8: 7.698,
    9: 7.959,
}

# Whether the posture keeps the backrest loaded. 2 is a forward lean (no
# back contact); 3-5 lean while touching the backrest. 6-9 classify red
# with or without contact, so their values are conventions, not data.
BACK_CONTACT_DEFAULTS = {1: True, 2: False, 3: True, 4: True, 5: True,
                         6: False, 7: True, 8: True, 9: False}

# Orthogonal zero-mean spread patterns over the four seat sensors.
_PATTERNS = (
    (1.0, 1.0, -1.0, -1.0),
    (1.0, -1.0, 1.0, -1.0),
    (1.0, -1.0, -1.0, 1.0),
)

_SEAT_CENTER = 6.5
_BASE_SPREAD_SHARE = 0.97  # fraction of target carried by the static base
_TILT_SHARE = 0.6          # fraction of the residual carried by the tilt
_BACK_BASE = (3.2, 3.6)
_BACK_NOISE = 0.15
_ENVELOPE_SIGMAS = 2.5     # noise envelope that must fit the sensor range


@dataclass(frozen=True)
class PostureProfile:
    """Generator parameters for one simulated posture."""

    posture_id: int
    seat_base: tuple[float, float, float, float]
    back_base: tuple[float, float]
    target_dispersion: float
    back_contact: bool
    tilt_pattern: tuple[float, float, float, float] = _PATTERNS[0]
    tilt_share: float = _TILT_SHARE
    back_noise: float = _BACK_NOISE
    sigma_tilt: float = field(init=False)
    sigma_noise: float = field(init=False)

    def __post_init__(self) -> None:
        if len(self.seat_base) != 4 or len(self.back_base) != 2:
            raise ConfigError("seat_base needs 4 levels and back_base 2")
        for v in self.seat_base + self.back_base:
            if not (READING_MIN <= v <= READING_MAX):
                raise ConfigError(f"base level {v} outside sensor range")
        if not (math.isfinite(self.target_dispersion) and self.target_dispersion >= 0):
            raise ConfigError(f"target_dispersion must be >= 0, got {self.target_dispersion}")
        if not (0.0 <= self.tilt_share <= 1.0):
            raise ConfigError(f"tilt_share must be in [0, 1], got {self.tilt_share}")

        base_var = population_variance(self.seat_base)
        residual = self.target_dispersion - base_var
        if residual < -1e-9:
            raise ConfigError(
                f"target_dispersion {self.target_dispersion} below the base spread "
                f"variance {base_var:.4f}; lower the seat_base spread"
            )
        residual = max(residual, 0.0)
        # E[frame variance] = base_var + sigma_tilt^2 + 0.75 * sigma_noise^2
        sigma_tilt = math.sqrt(self.tilt_share * residual)
        sigma_noise = math.sqrt((1.0 - self.tilt_share) * residual / 0.75)
        object.__setattr__(self, "sigma_tilt", sigma_tilt)
        object.__setattr__(self, "sigma_noise", sigma_noise)

        envelope = _ENVELOPE_SIGMAS * math.hypot(sigma_tilt, sigma_noise)
        lo = min(self.seat_base) - envelope
        hi = max(self.seat_base) + envelope
        if lo < READING_MIN - 1.0 or hi > READING_MAX + 1.0:
            raise ConfigError(
                f"target_dispersion {self.target_dispersion} unreachable: noise envelope "
                f"[{lo:.2f}, {hi:.2f}] clips too hard against the {READING_MIN:g}-{READING_MAX:g} range"
            )


def default_profile(
    posture_id: int,
    *,
    back_contact: bool | None = None,
    target_dispersion: float | None = None,
) -> PostureProfile:
    """Calibrated profile for one of the nine catalogued postures."""
    if posture_id not in CALIBRATION_TARGETS:
        raise ConfigError(f"posture_id must be 1-9, got {posture_id!r}")
    target = CALIBRATION_TARGETS[posture_id] if target_dispersion is None else target_dispersion
    base_pattern = _PATTERNS[posture_id % 3]
    tilt_pattern = _PATTERNS[(posture_id + 1) % 3]
    half_spread = math.sqrt(_BASE_SPREAD_SHARE * target)
    seat_base = tuple(_SEAT_CENTER + half_spread * p for p in base_pattern)
    contact = BACK_CONTACT_DEFAULTS[posture_id] if back_contact is None else back_contact
    return PostureProfile(
        posture_id=posture_id,
        seat_base=seat_base,  # type: ignore[arg-type]
        back_base=_BACK_BASE if contact else (0.0, 0.0),
        target_dispersion=target,
        back_contact=contact,
        tilt_pattern=tilt_pattern,
    )


def profile_from_dict(raw: dict) -> PostureProfile:
    """Profile from a config mapping; unspecified fields fall back to the
    posture's defaults."""
    if "posture_id" not in raw:
        raise ConfigError("profile config needs a posture_id")
    base = default_profile(
        int(raw["posture_id"]),
        back_contact=raw.get("back_contact"),
        target_dispersion=raw.get("target_dispersion"),
    )
    overrides = {}
    for key in ("seat_base", "back_base", "tilt_pattern"):
        if key in raw:
            overrides[key] = tuple(float(v) for v in raw[key])
    for key in ("tilt_share", "back_noise"):
        if key in raw:
            overrides[key] = float(raw[key])
    if not overrides:
        return base
    return PostureProfile(
        posture_id=base.posture_id,
        seat_base=overrides.get("seat_base", base.seat_base),
        back_base=overrides.get("back_base", base.back_base),
        target_dispersion=base.target_dispersion,
        back_contact=base.back_contact,
        tilt_pattern=overrides.get("tilt_pattern", base.tilt_pattern),
        tilt_share=overrides.get("tilt_share", base.tilt_share),
        back_noise=overrides.get("back_noise", base.back_noise),
    )


def _clamp(x: float) -> float:
    return READING_MIN if x < READING_MIN else READING_MAX if x > READING_MAX else x


def generate_frame(
    profile: PostureProfile,
    rng: random.Random,
    chair_id: int = 1,
    now: float = 0.0,
) -> PressureSample:
    """Draw one pressure frame for the posture; advances the RNG state."""
    tilt = rng.gauss(0.0, profile.sigma_tilt) if profile.sigma_tilt > 0 else 0.0
    seat = tuple(
        _clamp(b + tilt * p + (rng.gauss(0.0, profile.sigma_noise) if profile.sigma_noise > 0 else 0.0))
        for b, p in zip(profile.seat_base, profile.tilt_pattern)
    )
    if profile.back_contact:
        back = tuple(
            _clamp(b + (rng.gauss(0.0, profile.back_noise) if profile.back_noise > 0 else 0.0))
            for b in profile.back_base
        )
    else:
        back = (0.0, 0.0)
    return PressureSample(chair_id=chair_id, seat=seat, back=back, received_at=now)
