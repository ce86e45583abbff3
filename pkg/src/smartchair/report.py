"""Session records and daily aggregation."""

from __future__ import annotations

from dataclasses import dataclass, field

from .model import SittingState

STATE_NAMES = tuple(s.value for s in SittingState)


@dataclass
class SessionRecord:
    """Persisted summary of one login-to-logout span on one chair."""

    chair_id: int
    start_time: float
    end_time: float
    sitting_history: list[dict] = field(default_factory=list)
    state_secs: dict[str, float] = field(default_factory=lambda: {s: 0.0 for s in STATE_NAMES})
    long_sitting_episodes: int = 0
    red_episodes: int = 0

    def to_dict(self) -> dict:
        return {
            "chairId": self.chair_id,
            "start_time": self.start_time,
            "end_time": self.end_time,
            "sitting_history": [dict(e) for e in self.sitting_history],
            "state_secs": dict(self.state_secs),
            "long_sitting_episodes": self.long_sitting_episodes,
            "red_episodes": self.red_episodes,
        }

    @classmethod
    def from_dict(cls, raw: dict) -> "SessionRecord":
        return cls(
            chair_id=raw["chairId"],
            start_time=raw["start_time"],
            end_time=raw["end_time"],
            sitting_history=list(raw.get("sitting_history", [])),
            state_secs={s: float(raw.get("state_secs", {}).get(s, 0.0)) for s in STATE_NAMES},
            long_sitting_episodes=int(raw.get("long_sitting_episodes", 0)),
            red_episodes=int(raw.get("red_episodes", 0)),
        )

    def seated_intervals(self) -> list[tuple[float, float]]:
        """Seated (start, end) spans derived from the transition history."""
        spans: list[tuple[float, float]] = []
        sit_at: float | None = None
        for entry in self.sitting_history:
            ts, status = entry["timestamp"], entry["sitting_status"]
            if status == 1 and sit_at is None:
                sit_at = ts
            elif status == 0 and sit_at is not None:
                spans.append((sit_at, ts))
                sit_at = None
        if sit_at is not None:
            spans.append((sit_at, self.end_time))
        return spans


class SessionTally:
    """Live accumulator feeding a SessionRecord at close.

    Attributes per-state seconds only while seated; counts entries into the
    red state and long-sitting episodes.
    """

    def __init__(self, start_time: float):
        self.state_secs = {s: 0.0 for s in STATE_NAMES}
        self.red_episodes = 0
        self.long_sitting_episodes = 0
        self._last_ts = start_time
        self._prev_state = SittingState.GREEN.value
        self._prev_status = 0
        self._prev_long = 0

    def observe(self, now: float, chdata: dict) -> None:
        delta = max(now - self._last_ts, 0.0)
        if self._prev_status == 1:
            self.state_secs[self._prev_state] += delta
        state = chdata["actual_sitting_state"]
        if state == SittingState.RED.value and self._prev_state != SittingState.RED.value:
            self.red_episodes += 1
        if chdata["long_sitting"] == 1 and self._prev_long == 0:
            self.long_sitting_episodes += 1
        self._prev_state = state
        self._prev_status = chdata["actual_sitting_status"]
        self._prev_long = chdata["long_sitting"]
        self._last_ts = now

    def close(self, now: float) -> None:
        delta = max(now - self._last_ts, 0.0)
        if self._prev_status == 1:
            self.state_secs[self._prev_state] += delta
        self._last_ts = now


@dataclass
class DailyReport:
    """Aggregate of one chair's sessions over one day."""

    chair_id: int | None = None
    session_count: int = 0
    total_session_secs: float = 0.0
    total_seated_secs: float = 0.0
    state_secs: dict[str, float] = field(default_factory=lambda: {s: 0.0 for s in STATE_NAMES})
    longest_sit_secs: float = 0.0
    red_episodes: int = 0
    long_sitting_episodes: int = 0

    def to_dict(self) -> dict:
        return {
            "chairId": self.chair_id,
            "session_count": self.session_count,
            "total_session_secs": self.total_session_secs,
            "total_seated_secs": self.total_seated_secs,
            "state_secs": dict(self.state_secs),
            "longest_sit_secs": self.longest_sit_secs,
            "red_episodes": self.red_episodes,
            "long_sitting_episodes": self.long_sitting_episodes,
        }


def daily_report(sessions: list[SessionRecord]) -> DailyReport:
    """Aggregate session records (one chair, one day) into a report.

    Empty input yields an all-zero report.
    """
    report = DailyReport()
    for rec in sessions:
        if report.chair_id is None:
            report.chair_id = rec.chair_id
        elif rec.chair_id != report.chair_id:
            raise ValueError(
                f"sessions span multiple chairs: {report.chair_id} and {rec.chair_id}"
            )
        report.session_count += 1
        report.total_session_secs += max(rec.end_time - rec.start_time, 0.0)
        for name in STATE_NAMES:
            report.state_secs[name] += rec.state_secs.get(name, 0.0)
        for start, end in rec.seated_intervals():
            span = max(end - start, 0.0)
            report.total_seated_secs += span
            report.longest_sit_secs = max(report.longest_sit_secs, span)
        report.red_episodes += rec.red_episodes
        report.long_sitting_episodes += rec.long_sitting_episodes
    return report
