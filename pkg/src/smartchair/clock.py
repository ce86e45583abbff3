"""Clock injection: virtual time for tests and simulation, wall time for live runs."""

from __future__ import annotations

import time


class VirtualClock:
    """Manually advanced clock; now() never moves on its own."""

    def __init__(self, start: float = 0.0):
        self._now = float(start)

    def now(self) -> float:
        return self._now

    def set(self, t: float) -> None:
        if t < self._now:
            raise ValueError(f"virtual clock cannot go backwards: {t} < {self._now}")
        self._now = float(t)

    def advance(self, dt: float) -> float:
        self.set(self._now + dt)
        return self._now


class WallClock:
    def now(self) -> float:
        return time.time()
