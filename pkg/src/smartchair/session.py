"""Per-chair rolling state: windows, occupancy detection, timers, history.

One ChairSession is owned by exactly one logical owner at a time; it has no
internal locking. Feed it frames in arrival order via update() and read the
exported snapshot dict (the `chdata` object streamed to clients).
"""

from __future__ import annotations

import math
from collections import deque
from typing import Deque, Tuple

from .model import (
    PressureSample,
    RoutingError,
    SampleStats,
    SittingState,
    Thresholds,
    compute_sample_stats,
    mean,
)
from .rules import classify


class ChairSession:
    """Evaluation state machine for one chair from login to logout.

    Occupancy uses the last `presence_window` frame sums: a single sum at or
    above `presence_sum` keeps the chair seated, a full window below it flips
    to vacant. Dispersion averages use the last `dispersion_window` frames.
    No field changes (other than duration) until the presence window has
    filled once.
    """

    def __init__(self, chair_id: int, start_time: float, thresholds: Thresholds | None = None):
        if not isinstance(chair_id, int) or chair_id < 1:
            raise ValueError(f"chair_id must be a positive integer, got {chair_id!r}")
        self.chair_id = chair_id
        self.start_time = float(start_time)
        self.thresholds = thresholds or Thresholds()

        self.sitting_status = 0
        self.sitting_state = SittingState.GREEN
        self.sitting_time = 0.0
        self.long_sitting = 0
        self.avg_deviation = 0.0
        self.avg_back_deviation = 0.0
        self.back_data_present = 0
        self.duration = 0.0
        self.sitting_history: list[dict] = []
        self.last_stats: SampleStats | None = None
        self.non_monotonic_count = 0

        self._window: Deque[Tuple[float, SampleStats]] = deque(
            maxlen=self.thresholds.presence_window
        )
        self._episode_start: float | None = None
        self._high_run_start: float | None = None
        self._low_run_start: float | None = None
        self._last_ts = self.start_time

    @classmethod
    def open(cls, chair_id: int, now: float, thresholds: Thresholds | None = None) -> "ChairSession":
        """Fresh session: empty window, vacant, green, zeroed counters."""
        return cls(chair_id, now, thresholds)

    def update(self, sample: PressureSample, now: float) -> dict:
        """Fold one frame into the session and return the chdata snapshot."""
        if sample.chair_id != self.chair_id:
            raise RoutingError(
                f"sample for chair {sample.chair_id} routed to session of chair {self.chair_id}"
            )
        if now < self._last_ts:
            self.non_monotonic_count += 1

        stats = compute_sample_stats(sample, self.thresholds)
        self.last_stats = stats

        high = stats.sum >= self.thresholds.presence_sum
        if high:
            if self._high_run_start is None:
                self._high_run_start = now
            self._low_run_start = None
        else:
            if self._low_run_start is None:
                self._low_run_start = now
            self._high_run_start = None

        self._window.append((now, stats))
        self.duration = now - self.start_time
        if len(self._window) == self.thresholds.presence_window:
            self._evaluate(now, stats)
        self._last_ts = now
        return self.snapshot()

    def _evaluate(self, now: float, stats: SampleStats) -> None:
        th = self.thresholds
        seated = any(s.sum >= th.presence_sum for _, s in self._window)
        new_status = 1 if seated else 0

        if new_status != self.sitting_status:
            # The window confirms a change that began at the start of the
            # triggering run of frames, not at the confirmation frame.
            if new_status == 1:
                at = self._high_run_start if self._high_run_start is not None else now
                self._episode_start = at
            else:
                at = self._low_run_start if self._low_run_start is not None else now
                self._episode_start = None
            self._append_history(at, new_status)
            self.sitting_status = new_status

        if self.sitting_status == 1 and self._episode_start is not None:
            self.sitting_time = max(now - self._episode_start, 0.0)
        else:
            self.sitting_time = 0.0
        self.long_sitting = 1 if self.sitting_time >= th.long_sit_secs else 0

        tail = list(self._window)[-th.dispersion_window:]
        self.avg_deviation = mean(s.seat_dispersion for _, s in tail)
        self.avg_back_deviation = mean(s.back_dispersion for _, s in tail)
        self.back_data_present = 1 if stats.back_present else 0

        if self.sitting_status == 0:
            # Vacant chairs display green regardless of the rule table.
            self.sitting_state = SittingState.GREEN
        else:
            self.sitting_state = classify(
                self.avg_deviation, bool(self.back_data_present), bool(self.long_sitting), th
            )

    def _append_history(self, timestamp: float, status: int) -> None:
        if self.sitting_history:
            prev = self.sitting_history[-1]["timestamp"]
            if timestamp <= prev:
                # Out-of-order arrivals; keep history strictly increasing.
                timestamp = math.nextafter(prev, math.inf)
        self.sitting_history.append({"timestamp": timestamp, "sitting_status": status})

    def snapshot(self) -> dict:
        """Export the chdata object (field names and order are wire contract)."""
        return {
            "actual_sitting_state": self.sitting_state.value,
            "avg_deviation": self.avg_deviation,
            "avg_back_deviation": self.avg_back_deviation,
            "chair_id": self.chair_id,
            "actual_sitting_time": int(self.sitting_time),
            "back_data_present": self.back_data_present,
            "long_sitting": self.long_sitting,
            "duration": int(self.duration),
            "start_time": self.start_time,
            "sitting_history": [dict(e) for e in self.sitting_history],
            "actual_sitting_status": self.sitting_status,
        }
