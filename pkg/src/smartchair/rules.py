"""Sitting-state classification rules.

Decision table over the rolling seat dispersion (odt=orange threshold,
rdt=red threshold), back contact, and the long-sitting flag:

    long sitting                      -> red, unconditionally
    back contact,    d <  odt        -> green
    back contact,    odt <= d < rdt  -> orange
    back contact,    d >= rdt        -> red
    no back contact, d <  odt        -> orange
    no back contact, d >= odt        -> red

Sitting without backrest contact is never classified green, however small
the dispersion; equality at a threshold goes to the more severe state.
"""

from __future__ import annotations

import math

from .model import SittingState, Thresholds, ValidationError


def classify(
    avg_deviation: float,
    back_present: bool,
    long_sitting: bool,
    thresholds: Thresholds,
) -> SittingState:
    """Map a rolling seat dispersion to green/orange/red. Pure function."""
    if not math.isfinite(avg_deviation) or avg_deviation < 0:
        raise ValidationError(f"avg_deviation: must be finite and >= 0, got {avg_deviation!r}")
    if long_sitting:
        return SittingState.RED
    if back_present:
        if avg_deviation < thresholds.odt:
            return SittingState.GREEN
        if avg_deviation < thresholds.rdt:
            return SittingState.ORANGE
        return SittingState.RED
    if avg_deviation < thresholds.odt:
        return SittingState.ORANGE
    return SittingState.RED
